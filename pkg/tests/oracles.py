"""Independent brute-force oracle for the transportation problem.

Enumerates every basic feasible solution of the transportation polytope:
basic solutions correspond to spanning trees of the complete bipartite
graph K_{m,n}, which are enumerated as acyclic parent assignments
(each column picks a row parent, each non-root row picks a column
parent). For each tree basis the allocations solve a small linear
system whose inverse has entries in {-1, 0, 1}; the optimum is the
cheapest allocation that is non-negative.

Everything here is deliberately independent of the production solver.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_CHUNK = 100_000


@lru_cache(maxsize=None)
def _tree_bases(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(cells, inverse_bases) for every spanning tree of K_{m,n}.

    cells: [T, m+n-1] flat cell indices (row*n + col) of each basis.
    inverse_bases: [T, m+n-1, m+n-1] int8 inverses of the basis matrices
    (constraints: all m row sums, first n-1 column sums).
    """
    N = m + n
    K = N - 1
    # Children and their allowed parents; vertex ids: rows 0..m-1,
    # columns m..m+n-1. Row 0 is the root.
    child_ids = list(range(1, m)) + list(range(m, m + n))
    choices = [np.arange(m, m + n, dtype=np.int8)] * (m - 1) + [
        np.arange(0, m, dtype=np.int8)
    ] * n
    grids = np.meshgrid(*choices, indexing="ij")
    assignment = np.stack([g.ravel() for g in grids], axis=1)  # [A, K]

    parent = np.zeros((assignment.shape[0], N), dtype=np.int8)
    for k, child in enumerate(child_ids):
        parent[:, child] = assignment[:, k]
    # Pointer jumping: in a tree every vertex's far ancestor is the root.
    reach = parent.copy()
    steps = 1
    while steps < N:
        reach = np.take_along_axis(reach, reach.astype(np.int64), axis=1)
        steps *= 2
    acyclic = (reach == 0).all(axis=1)
    parent = parent[acyclic]
    T = parent.shape[0]
    assert T == m ** (n - 1) * n ** (m - 1), "spanning tree count mismatch"

    cells = np.empty((T, K), dtype=np.int64)
    for k, child in enumerate(child_ids):
        p = parent[:, child].astype(np.int64)
        if child < m:  # row child attached to a column parent
            cells[:, k] = child * n + (p - m)
        else:  # column child attached to a row parent
            cells[:, k] = p * n + (child - m)

    inverses = np.empty((T, K, K), dtype=np.int8)
    for start in range(0, T, _CHUNK):
        chunk = cells[start : start + _CHUNK]
        tc = chunk.shape[0]
        B = np.zeros((tc, K, K), dtype=np.float64)
        rows = chunk // n
        cols = chunk % n
        ti = np.repeat(np.arange(tc), K)
        ki = np.tile(np.arange(K), tc)
        B[ti, rows.ravel(), ki] = 1.0
        keep = cols.ravel() < n - 1
        B[ti[keep], m + cols.ravel()[keep], ki[keep]] = 1.0
        inv = np.linalg.inv(B)
        rounded = np.rint(inv)
        assert np.abs(inv - rounded).max() < 1e-8, "basis inverse not integral"
        inverses[start : start + _CHUNK] = rounded.astype(np.int8)
    return cells, inverses


def min_cost_transport(a, b, C) -> float:
    """Exact transportation optimum by enumerating all basic feasible
    solutions. Supports up to ~5x5 comfortably."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    m, n = C.shape
    b = b * (a.sum() / b.sum())
    cells, inverses = _tree_bases(m, n)
    rhs = np.concatenate([a, b[:-1]])
    flat_costs = C.ravel()
    best = np.inf
    for start in range(0, cells.shape[0], _CHUNK):
        inv_chunk = inverses[start : start + _CHUNK]
        cell_chunk = cells[start : start + _CHUNK]
        alloc = np.einsum("tkl,l->tk", inv_chunk, rhs)
        feasible = (alloc >= -1e-9).all(axis=1)
        if feasible.any():
            totals = (alloc * flat_costs[cell_chunk]).sum(axis=1)
            best = min(best, float(totals[feasible].min()))
    return best
