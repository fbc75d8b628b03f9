"""Exception types shared across the package."""


class ArrayParseError(ValueError):
    """Raised when an intersection-array literal cannot be parsed."""


class ArrayValidationError(ValueError):
    """Raised for structurally unusable input (empty array, d = 0)."""


class UnknownEntryError(KeyError):
    """Raised when a catalog name (or alias) is not known."""


class InternalConsistencyError(RuntimeError):
    """Two independent computation routes disagreed beyond tolerance.

    This always indicates a bug (or a violated precondition), never bad
    user input, which is why it is kept distinct from the ValueErrors.
    """


class NotDistanceRegularError(ValueError):
    """Raised when a concrete graph fails the distance-regularity test."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
