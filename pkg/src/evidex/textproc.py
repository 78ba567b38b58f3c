"""Tokenization, stopword filtering, nBOW documents, and keyword scoring.

A Document carries the normalized bag-of-words weights of its
in-vocabulary tokens: each distinct token gets occurrence_count / total
weight, renormalized after out-of-vocabulary tokens are dropped.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .embeddings import EmbeddingTable
from .errors import EmptyDocumentError

# Word characters minus underscore; unicode-aware, so letters and digits
# of any script survive while punctuation splits.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_TITLE_BOOST = 3.0


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-letter/non-digit boundaries."""
    return _TOKEN_RE.findall(text.lower())


def remove_stopwords(tokens: list[str], stoplist: set[str]) -> list[str]:
    """Order-preserving filter; ``stoplist`` is expected lowercased."""
    return [t for t in tokens if t not in stoplist]


def load_stopwords(path) -> set[str]:
    """Read a stopword file: UTF-8, one token per line, '#' comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip()
            if word:
                words.add(word.lower())
    return words


def bundled_stopwords(language: str = "en") -> set[str]:
    """Stopword list shipped with the package for ``language``."""
    ref = resources.files("evidex.data.stopwords").joinpath(f"{language}.txt")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValueError(f"no bundled stopword list for language {language!r}") from None
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.add(word.lower())
    return words


@dataclass(frozen=True)
class Document:
    """nBOW representation over the deduplicated in-vocabulary support."""

    tokens: tuple[str, ...]
    weights: np.ndarray
    source_token_count: int
    dropped_oov: tuple[str, ...] = ()

    def weight_map(self) -> dict[str, float]:
        return dict(zip(self.tokens, self.weights.tolist()))

    def __eq__(self, other) -> bool:
        # Support order is an input artifact; compare as token -> weight maps.
        if not isinstance(other, Document):
            return NotImplemented
        return (
            self.weight_map() == other.weight_map()
            and self.source_token_count == other.source_token_count
            and sorted(self.dropped_oov) == sorted(other.dropped_oov)
        )

    def __len__(self) -> int:
        return len(self.tokens)


def build_document(tokens: list[str], table: EmbeddingTable) -> Document:
    """Build the nBOW Document for already-cleaned ``tokens``.

    Out-of-vocabulary tokens are dropped and recorded; weights are
    occurrence counts over the remaining total, so they sum to one.
    Raises EmptyDocumentError when nothing in-vocabulary remains.
    """
    kept: list[str] = []
    dropped: list[str] = []
    for tok in tokens:
        (kept if tok in table else dropped).append(tok)
    if not kept:
        raise EmptyDocumentError("empty document support")
    counts = Counter(kept)
    support = list(counts)
    total = len(kept)
    weights = np.array([counts[t] / total for t in support], dtype=np.float64)
    weights.setflags(write=False)
    return Document(
        tokens=tuple(support),
        weights=weights,
        source_token_count=len(tokens),
        dropped_oov=tuple(dropped),
    )


@dataclass(frozen=True)
class KeywordSet:
    """Scored query terms, descending score, ties lexicographic."""

    keywords: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def terms(self) -> list[str]:
        return [term for term, _ in self.keywords]

    def __len__(self) -> int:
        return len(self.keywords)

    def __bool__(self) -> bool:
        return bool(self.keywords)


def extract_keywords(
    title: str,
    body: str,
    k: int,
    stopwords: set[str] | None = None,
) -> KeywordSet:
    """Top-``k`` terms by frequency, tripled when the term occurs in the title.

    Frequency counts occurrences across title and body together. Stopwords
    never appear in the result. Fewer than ``k`` terms are returned when the
    text is small.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if stopwords is None:
        stopwords = bundled_stopwords()
    title_tokens = remove_stopwords(tokenize(title), stopwords)
    body_tokens = remove_stopwords(tokenize(body), stopwords)
    counts = Counter(title_tokens) + Counter(body_tokens)
    if not counts:
        return KeywordSet()
    in_title = set(title_tokens)
    scored = [
        (term, freq * (_TITLE_BOOST if term in in_title else 1.0))
        for term, freq in counts.items()
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return KeywordSet(tuple(scored[:k]))
