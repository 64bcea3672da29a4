"""Exception types shared across the toolkit."""


class AttsumError(Exception):
    """Base class for data and format errors raised by this package."""


class CorpusError(AttsumError):
    """Raised when a cluster directory or its files cannot be ingested."""


class EmbeddingError(AttsumError):
    """Raised when an embedding file is malformed or dimensions disagree."""


class CheckpointError(AttsumError):
    """Raised when a model checkpoint cannot be read or does not match."""
