"""Exception types shared across the package."""


class EvidexError(Exception):
    """Base class for all evidex errors."""


class EmbeddingLoadError(EvidexError):
    """Raised when a word-vector file cannot be parsed."""


class EmptyDocumentError(EvidexError):
    """Raised when a document has no in-vocabulary tokens left."""


class TransportError(EvidexError):
    """Invalid input to an optimal-transport solver."""


class SinkhornUnderflowError(TransportError):
    """The Gibbs kernel exp(-c/epsilon) underflowed in plain-domain mode."""


class ExtractionError(EvidexError):
    """Article extraction failed (no title, no content, unparseable page)."""


class QueryError(EvidexError):
    """A search query could not be built."""


class FetchError(EvidexError):
    """Every selected source failed; carries the per-source causes."""

    def __init__(self, errors):
        self.source_errors = list(errors)
        detail = "; ".join(f"{e.source_id}: {e.message}" for e in self.source_errors)
        super().__init__(f"all sources failed: {detail}")


class CalibrationError(EvidexError):
    """Threshold calibration needs at least one pair of each class."""


class VerificationError(EvidexError):
    """The query article could not be processed."""


class ConfigError(EvidexError):
    """Invalid or unreadable configuration."""
