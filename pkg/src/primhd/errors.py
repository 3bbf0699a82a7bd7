"""Exception hierarchy shared by the solvers, diagnostics and the harness."""


class PrimhdError(Exception):
    """Base class for all package errors."""


class GridMismatchError(PrimhdError, ValueError):
    """Arrays or states defined on different grids were combined."""


class ConstraintError(PrimhdError, ValueError):
    """A structural constraint (zero mean, barotropic divergence, parity) is violated."""


class HermitianError(PrimhdError, ValueError):
    """Spectral coefficients do not describe a real field."""


class StabilityError(PrimhdError, RuntimeError):
    """The time integration cannot continue."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class BlowUpError(StabilityError):
    """Non-finite values appeared in the solution."""


class CFLError(StabilityError):
    """The advective Courant number exceeds four times the configured limit."""


class ConfigError(PrimhdError, ValueError):
    """Invalid configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SnapshotError(PrimhdError, ValueError):
    """A checkpoint file is malformed or does not match the expected run."""
