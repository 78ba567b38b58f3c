"""Pretrained word-vector tables: text/binary loaders and vector lookup.

Vectors are stored as 32-bit floats on disk (the common pretrained format)
and widened to 64-bit in memory so downstream transport solves do not
accumulate single-precision error.
"""

from __future__ import annotations

import logging
import math
from typing import BinaryIO, Iterable

import numpy as np

from .errors import EmbeddingLoadError

logger = logging.getLogger(__name__)

_HEADER_MAX = 128  # bytes; a sane "<vocab> <dim>\n" header is far shorter


class EmbeddingTable:
    """Immutable token -> R^n vector map.

    Construction copies nothing it does not own; the backing matrix is
    marked read-only so lookups can hand out views safely.
    """

    __slots__ = ("_index", "_matrix", "dimension")

    def __init__(self, tokens: Iterable[str], matrix: np.ndarray):
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        tokens = list(tokens)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise ValueError("token count and matrix rows differ")
        self._index = {tok: i for i, tok in enumerate(tokens)}
        if len(self._index) != len(tokens):
            raise ValueError("duplicate tokens")
        matrix.setflags(write=False)
        self._matrix = matrix
        self.dimension = int(matrix.shape[1])

    @property
    def vocab_size(self) -> int:
        return len(self._index)

    def tokens(self) -> list[str]:
        return list(self._index)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def lookup(self, token: str) -> np.ndarray | None:
        """Exact stored vector for ``token`` (case-sensitive), or None."""
        i = self._index.get(token)
        if i is None:
            return None
        return self._matrix[i]

    def rows(self, tokens: list[str]) -> np.ndarray:
        """Stacked vectors for known tokens; raises KeyError on a miss."""
        idx = [self._index[t] for t in tokens]
        return self._matrix[idx]

    def __eq__(self, other) -> bool:
        # Entry order is a storage artifact; equality is the token -> vector map.
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        if self.dimension != other.dimension or self._index.keys() != other._index.keys():
            return False
        return all(
            np.array_equal(self._matrix[i], other._matrix[other._index[tok]])
            for tok, i in self._index.items()
        )

    def __repr__(self) -> str:
        return f"EmbeddingTable(vocab_size={self.vocab_size}, dimension={self.dimension})"


def _parse_header(line: bytes, where: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise EmbeddingLoadError(f"{where}: malformed header {line!r}")
    try:
        vocab, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingLoadError(f"{where}: malformed header {line!r}") from None
    if vocab < 0 or dim < 1:
        raise EmbeddingLoadError(f"{where}: malformed header {line!r}")
    return vocab, dim


def load_text(reader: BinaryIO) -> EmbeddingTable:
    """Parse the whitespace text format: ``<vocab> <dim>`` header, then one
    ``<token> <f_1> ... <f_n>`` line per entry.

    Duplicate tokens keep the first occurrence; later ones are logged as
    warnings and do not count toward the vocabulary.
    """
    header = reader.readline()
    vocab, dim = _parse_header(header, "line 1")
    tokens: list[str] = []
    seen: set[str] = set()
    rows = np.empty((vocab, dim), dtype=np.float64)
    count = 0
    entries = 0
    lineno = 1
    for raw in reader:
        lineno += 1
        if not raw.strip():
            continue
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EmbeddingLoadError(f"line {lineno}: not valid UTF-8") from exc
        fields = text.rstrip("\n").split(" ")
        token, floats = fields[0], fields[1:]
        if len(floats) != dim:
            raise EmbeddingLoadError(
                f"line {lineno}: expected {dim} floats, got {len(floats)}"
            )
        try:
            vec = np.array(floats, dtype=np.float64)
        except ValueError:
            raise EmbeddingLoadError(f"line {lineno}: unparseable float") from None
        if not np.isfinite(vec).all():
            raise EmbeddingLoadError(f"line {lineno}: non-finite value")
        entries += 1
        if entries > vocab:
            raise EmbeddingLoadError(
                f"line {lineno}: more entries than the header announced ({vocab})"
            )
        if token in seen:
            logger.warning("duplicate token %r at line %d ignored", token, lineno)
            continue
        seen.add(token)
        tokens.append(token)
        rows[count] = vec
        count += 1
    if entries != vocab:
        raise EmbeddingLoadError(
            f"line {lineno}: header announced {vocab} entries, found {entries}"
        )
    return EmbeddingTable(tokens, rows[:count])


def load_binary(reader: BinaryIO) -> EmbeddingTable:
    """Parse the binary format: ASCII ``<vocab> <dim>\\n`` header, then per
    entry the token bytes, one space, and ``dim`` little-endian float32s.
    """
    data = reader.read()
    nl = data.find(b"\n", 0, _HEADER_MAX)
    if nl < 0:
        raise EmbeddingLoadError("byte 0: missing header newline")
    vocab, dim = _parse_header(data[:nl], "byte 0")
    vec_bytes = 4 * dim
    pos = nl + 1
    tokens: list[str] = []
    seen: set[str] = set()
    rows = np.empty((vocab, dim), dtype=np.float64)
    count = 0
    for entry in range(vocab):
        sep = data.find(b" ", pos)
        if sep < 0:
            raise EmbeddingLoadError(f"unexpected end of stream at entry {entry}")
        try:
            token = data[pos:sep].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EmbeddingLoadError(f"byte {pos}: token is not valid UTF-8") from exc
        start = sep + 1
        end = start + vec_bytes
        if end > len(data):
            raise EmbeddingLoadError(f"unexpected end of stream at entry {entry}")
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=start)
        if not np.isfinite(vec).all():
            raise EmbeddingLoadError(f"byte {start}: non-finite value")
        if token in seen:
            logger.warning("duplicate token %r at entry %d ignored", token, entry)
        else:
            seen.add(token)
            tokens.append(token)
            rows[count] = vec.astype(np.float64)
            count += 1
        pos = end
    if pos != len(data):
        raise EmbeddingLoadError(f"byte {pos}: trailing bytes after last entry")
    return EmbeddingTable(tokens, rows[:count])


def save_binary(table: EmbeddingTable, writer: BinaryIO) -> None:
    """Serialize ``table`` in the binary format, entries ordered
    lexicographically by token so output is deterministic.
    """
    if table.dimension < 1:
        raise ValueError("degenerate table")
    writer.write(f"{table.vocab_size} {table.dimension}\n".encode("ascii"))
    for token in sorted(table.tokens()):
        vec = table.lookup(token)
        writer.write(token.encode("utf-8"))
        writer.write(b" ")
        writer.write(np.asarray(vec, dtype="<f4").tobytes())


def euclidean(u: np.ndarray, v: np.ndarray) -> float:
    """L2 distance between two equal-length vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(math.sqrt(np.sum((u - v) ** 2)))
