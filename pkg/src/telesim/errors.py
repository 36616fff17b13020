"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An operation was called with inputs that violate its preconditions."""


class ConfigurationError(ValueError):
    """A configuration object is invalid or used in the wrong mode."""


class SingularityError(RuntimeError):
    """The manipulator is at (or too close to) a kinematic singularity."""


class EmptyInputError(ValueError):
    """An aggregate operation received no data."""


class DegenerateDispersionError(ValueError):
    """Effect-size denominator is zero."""


class ParseError(ValueError):
    """A serialized record could not be decoded.

    ``offset`` is the byte offset into the input at which decoding failed.
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedVersionError(ValueError):
    """A file or message declares a format version this build cannot read."""
