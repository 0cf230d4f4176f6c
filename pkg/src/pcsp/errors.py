"""Exception hierarchy shared by every module."""


class PCSPError(Exception):
    """Base class for all library errors."""


class DataError(PCSPError):
    """Malformed or out-of-range input data.

    ``where`` names the offending field (``relations[0].tuples[2][1]``) or
    line, when known.
    """

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class SignatureMismatch(PCSPError):
    """Two structures that must be similar are not."""


class ResourceLimitExceeded(PCSPError):
    """A search hit its configured node, time or size cap.

    This is never a negative answer: the question stays undecided.
    """

    def __init__(self, message, limit=None):
        self.limit = limit
        super().__init__(message)


class InvalidTemplate(PCSPError):
    """The pair (A, B) is not a template because A does not map to B."""


class PromiseViolation(PCSPError):
    """An instance provably does not satisfy the promise X -> A."""


class VerdictMismatch(PCSPError):
    """A verdict was used for a template or purpose it does not describe."""
