"""Exception types shared across the docloom pipeline."""


class DocloomError(Exception):
    """Base class for all docloom errors."""


class EmptyDocumentError(DocloomError):
    """Document contained zero extractable characters."""


class MalformedDocumentError(DocloomError):
    """Document bytes could not be decoded or parsed."""


class InvalidParamsError(DocloomError):
    """An operation was called with parameters outside its contract."""


class AllZeroError(DocloomError):
    """Hashed embedding collapsed to the zero vector (no usable signal).

    ``index`` is set when the error was raised for one text in a batch.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class DimensionMismatchError(DocloomError):
    """Vector length does not match the expected dimension."""


class ZeroVectorError(DocloomError):
    """Cosine similarity is undefined for a zero-norm vector."""


class DuplicateIdError(DocloomError):
    """A chunk id was added to a store that already contains it."""


class CorruptStoreError(DocloomError):
    """Store file has a bad magic, version, or is truncated/garbled."""


class ChecksumMismatchError(CorruptStoreError):
    """Store file payload does not match its trailing checksum."""


class ProviderUnreachableError(DocloomError):
    """Remote provider could not be reached at all."""


class ProviderError(DocloomError):
    """Remote provider answered with a non-success status."""

    def __init__(self, message: str, status: int | None = None, body: str = ""):
        super().__init__(message)
        self.status = status
        self.body = body


class EmptyCompletionError(DocloomError):
    """Chat-completion provider returned no usable message."""


class NoContextError(DocloomError):
    """The extractive responder had no retrieved sentences to draw from."""


class EmptyDatasetError(DocloomError):
    """Evaluation was asked to run over zero records."""


class ConfigError(DocloomError):
    """Service configuration file is missing, unparsable, or invalid."""
