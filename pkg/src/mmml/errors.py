"""Exception hierarchy shared by every module of the package."""


class MMMLError(Exception):
    """Base class for all errors raised by :mod:`mmml`."""


class PreconditionError(MMMLError, ValueError):
    """An input violates a documented precondition (e.g. asymmetry)."""


class DimensionError(PreconditionError):
    """Incompatible or out-of-range dimensions."""


class NotSPDError(PreconditionError):
    """A matrix expected to be (symmetric) positive definite is not."""


class DegenerateSetError(PreconditionError):
    """An image set cannot be modeled (too few images, zero variance)."""


class ProtocolError(MMMLError):
    """The labels or split make the discriminant or evaluation undefined."""


class NumericalError(MMMLError):
    """A numerical post-condition failed (PSD check, eigen residual)."""


class FormatError(MMMLError):
    """A data, manifest or model file could not be parsed."""


class UnsupportedVersionError(FormatError):
    """A model file was written by a newer, unknown format version."""
