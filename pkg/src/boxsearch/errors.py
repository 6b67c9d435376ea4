"""Exception types shared across the engine."""

from __future__ import annotations


class BoxSearchError(Exception):
    """Base class for all engine errors."""


class IngestError(BoxSearchError):
    """Raised when input data is rejected at store-write time.

    Carries the offending (row, col) for non-finite values; both are None
    for shape mismatches.
    """

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class FormatError(BoxSearchError):
    """Bad magic, version, or otherwise unreadable on-disk artifact."""


class CorruptStoreError(BoxSearchError):
    """Store files present but internally inconsistent (e.g. truncated payload)."""


class NotFoundError(BoxSearchError):
    """Unknown row id."""

    def __init__(self, id: int):
        super().__init__(f"unknown id {id}")
        self.id = id


class SubsetError(BoxSearchError):
    """Column subset is unsorted, duplicated, or out of range."""


class SampleError(BoxSearchError):
    """Requested more distinct ids than are available."""


class IndexMismatchError(BoxSearchError):
    """Query and index disagree on the feature subset or dimensionality."""


class CatalogError(BoxSearchError):
    """Catalog construction is impossible with the requested parameters."""


class TrainError(BoxSearchError):
    """Training preconditions violated (e.g. a single-class label set)."""


class ModelError(BoxSearchError):
    """Trained model is incompatible with the data it is applied to."""
