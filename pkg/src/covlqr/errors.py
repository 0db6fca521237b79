"""Exception hierarchy shared by all covlqr modules."""


class CovLqrError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CovLqrError):
    """Operand shapes are incompatible with the requested operation."""


class NotSymmetric(DimensionMismatch):
    """A matrix required to be symmetric deviates beyond tolerance."""


class NotPositiveDefinite(CovLqrError):
    """Cholesky pivot became nonpositive; the matrix is not PD."""


class Singular(CovLqrError):
    """A linear solve hit a pivot below the singularity threshold."""


class NoConvergence(CovLqrError):
    """An iterative scheme exhausted its budget without converging."""


class Unstable(CovLqrError):
    """A spectral-radius precondition (< 1) was violated."""


class RankDeficient(CovLqrError):
    """Data matrix does not have the full row rank the method requires."""


class TrajectoryDiverged(CovLqrError):
    """A simulated state left the finite range (|entry| > threshold)."""


class NonFiniteObservable(CovLqrError):
    """A lifting function produced NaN or Inf on a data point."""


class SolverFailed(CovLqrError):
    """Controller synthesis did not return a usable optimum.

    ``status`` carries the conic-solver verdict ("infeasible", "unbounded",
    "numerical_failure", ...) when one exists; experiment harnesses count
    every SolverFailed as "no stabilizing controller" but log the status.
    """

    def __init__(self, message: str, status: str | None = None):
        super().__init__(message)
        self.status = status


class UnknownVariable(CovLqrError):
    """An LMI expression references a variable the builder does not own."""


class ConfigError(CovLqrError):
    """A run configuration failed validation; message names the key."""


class EmptyInput(CovLqrError):
    """An aggregation was asked to reduce zero records."""
