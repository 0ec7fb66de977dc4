"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: configuration problems are reported by
`ConfigError`, unreadable or inconsistent inputs by `DataError`, and every
numerical failure mode derives from `NumericError`.
"""
from __future__ import annotations


class SparseVarError(Exception):
    """Base class for all package errors."""


class ConfigError(SparseVarError):
    """Invalid run configuration (unknown key, missing field, bad value)."""


class DataError(SparseVarError):
    """Input data cannot be read or is dimensionally inconsistent."""


class NumericError(SparseVarError):
    """Base class for numerical failures."""


class StabilityError(NumericError):
    """A companion matrix has spectral radius >= 1 where stability is required."""


class SingularityError(NumericError):
    """A linear system that must be solvable is singular."""


class FactorizationError(NumericError):
    """A matrix factorization (e.g. Cholesky) failed."""


class InsufficientDataError(DataError):
    """Too few observations for the requested operation."""


class DegenerateInputError(NumericError):
    """Input is degenerate (zero variance, empty split, all fits failed)."""


class DegenerateFitError(NumericError):
    """A fitted model is degenerate (e.g. zero residual sum of squares)."""


class IterationLimitError(NumericError):
    """An iterative routine hit its iteration cap.

    Carries the last iterate in ``last_iterate`` so callers can inspect or
    reuse it.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NonConvergenceError(IterationLimitError):
    """Coordinate descent failed to reach its tolerance within the sweep cap."""


class InfeasibleError(NumericError):
    """A linear program has no feasible point."""


class UnboundedError(NumericError):
    """A linear program is unbounded below."""


class PivotLimitError(IterationLimitError):
    """The simplex solver hit its pivot cap.

    ``pivots`` records how many pivots were performed.
    """

    def __init__(self, message: str, pivots: int, last_iterate=None):
        super().__init__(message, last_iterate=last_iterate)
        self.pivots = pivots


class InternalError(SparseVarError):
    """A condition that indicates a bug in this package, not in the inputs."""
