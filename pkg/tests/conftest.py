import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evidex.embeddings import EmbeddingTable

FIXTURES = Path(__file__).parent.parent / "fixtures"


def make_table(entries: dict) -> EmbeddingTable:
    tokens = list(entries)
    matrix = np.array([entries[t] for t in tokens], dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(len(tokens), -1)
    return EmbeddingTable(tokens, matrix)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def random_ot_instance(rng, min_side=2, max_side=5, dim=4):
    """Random weights and Euclidean cost matrix, the acceptance-test shape."""
    m = int(rng.integers(min_side, max_side + 1))
    n = int(rng.integers(min_side, max_side + 1))
    a = rng.random(m) + 0.05
    a /= a.sum()
    b = rng.random(n) + 0.05
    b /= b.sum()
    va = rng.normal(size=(m, dim))
    vb = rng.normal(size=(n, dim))
    diff = va[:, None, :] - vb[None, :, :]
    C = np.sqrt((diff * diff).sum(axis=2))
    return a, b, C
