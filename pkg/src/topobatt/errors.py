"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, SolverError -> 3,
PreconditionError -> 4.
"""


class TopobattError(Exception):
    """Base class for all package errors."""


class ConfigError(TopobattError):
    """Invalid or inconsistent input parameters."""


class SolverError(TopobattError):
    """A numerical routine failed to produce a trustworthy result."""


class PreconditionError(TopobattError):
    """A documented precondition of an operation is violated."""


class LightConeError(PreconditionError):
    """Finite lattice too small for the requested evolution time."""

    def __init__(self, message: str, minimal_n: int):
        super().__init__(message)
        self.minimal_n = minimal_n


class OnSpectrumError(PreconditionError):
    """Green's function requested on (or too close to) the bath spectrum."""


class AccuracyError(SolverError):
    """Quadrature missed its error target; carries the estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class ContinuationError(SolverError):
    """A pole was lost while continuing in the dissipation strength."""


class StructureError(SolverError):
    """The located pole set does not have the expected structure."""


class ModelInconsistencyError(SolverError):
    """A multiple pole carries a non-vanishing secular coefficient."""
