"""Exception types raised by the library."""


class MIGError(Exception):
    """Base class for all library errors."""


class NotPositiveDefiniteError(MIGError, ValueError):
    """A matrix required to be HPD has an eigenvalue at or below the floor."""


class DegenerateSampleError(MIGError, ValueError):
    """A sample vector carries no energy, so no HPD estimate exists."""


class DegenerateIsotropyError(MIGError, ValueError):
    """An anisotropy ratio was requested against a perfectly isotropic reference."""


class NumericalFailureError(MIGError, ArithmeticError):
    """A decomposition or iteration broke down numerically."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
