"""Exception types shared across the pipeline."""

from __future__ import annotations


class ClaimcheckError(Exception):
    """Base class for all library errors."""


class MalformedInputError(ClaimcheckError):
    """A loader rejected one or more rows.

    ``rows`` collects every offending row as ``(row_number, field, message)``
    with 1-based row numbers, so a single pass reports all problems.
    """

    def __init__(self, path: str, rows: list[tuple[int, str, str]]):
        self.path = path
        self.rows = rows
        detail = "; ".join(f"row {n} [{field}]: {msg}" for n, field, msg in rows[:10])
        if len(rows) > 10:
            detail += f"; ... ({len(rows) - 10} more)"
        super().__init__(f"{path}: {len(rows)} bad row(s): {detail}")


class DuplicateIdError(ClaimcheckError):
    pass


class SegmentationError(ClaimcheckError):
    pass


class EmptyQueryError(ClaimcheckError):
    """Query has no terms left after analysis."""


class IndexFormatError(ClaimcheckError):
    """Persisted index file is corrupt or has an unsupported version."""


class RerankError(ClaimcheckError):
    """Re-ranking failed; identifies the offending (query, passage) pair."""

    def __init__(self, message: str, query: str | None = None, paragraph_id: str | None = None):
        self.query = query
        self.paragraph_id = paragraph_id
        super().__init__(message)


class ScorerError(ClaimcheckError):
    """A relevance scorer could not produce a probability."""


class EncoderError(ClaimcheckError):
    """Encoder service or cache failure."""


class CacheMissError(EncoderError):
    """Replay-mode cache has no entry for the requested key."""


class PayloadError(EncoderError):
    """Encoder returned a malformed or non-finite payload."""


class ShapeError(ClaimcheckError):
    """Tensor shapes incompatible with the requested operation."""


class TrainingError(ClaimcheckError):
    """Training aborted (e.g. non-finite loss)."""


class CheckpointError(ClaimcheckError):
    """Parameter checkpoint file is corrupt or has an unsupported version."""
