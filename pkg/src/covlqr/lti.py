"""LTI plant, seeded stochastic simulation, and sample-covariance assembly.

Data layout follows the package-wide convention: a T-step experiment is
stored as U0 (m x T inputs), X0 (n x T states), X1 (n x T successor states)
and, for simulated records only, W0 (n x T process noise), so that
X1 = [B A] [U0; X0] + W0 holds exactly. D0 denotes the stacked [U0; X0].

Randomness: one numpy Generator (PCG64 bit stream, ziggurat Gaussian
transform) per experiment, seeded from NoiseSpec.seed. Draw order is fixed
and documented: first x(0), then the full input block column by column,
then the full noise block column by column. The Monte Carlo harness derives
per-trial seeds by SeedSequence spawning, so trial results are reproducible
and independent of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, TrajectoryDiverged
from .kernels import rollout

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class LtiSystem:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", linalg.require_square(linalg.as_matrix(self.a), "A"))
        object.__setattr__(self, "b", linalg.as_matrix(self.b))
        if self.b.shape[0] != self.a.shape[0]:
            raise DimensionMismatch("B must have as many rows as A")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    sigma_x: float = 1.0
    sigma_w: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_x < 0 or self.sigma_w < 0:
            raise DimensionMismatch("noise standard deviations must be >= 0")


@dataclass(frozen=True)
class DataRecord:
    u0: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    w0: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "u0", linalg.as_matrix(self.u0))
        object.__setattr__(self, "x0", linalg.as_matrix(self.x0))
        object.__setattr__(self, "x1", linalg.as_matrix(self.x1))
        t_len = self.u0.shape[1]
        if t_len < 1:
            raise DimensionMismatch("a data record needs at least one step")
        if self.x0.shape[1] != t_len or self.x1.shape[1] != t_len:
            raise DimensionMismatch("U0, X0, X1 must share the column count T")
        if self.x1.shape[0] != self.x0.shape[0]:
            raise DimensionMismatch("X0 and X1 must share the state dimension")
        if self.w0 is not None:
            w0 = linalg.as_matrix(self.w0)
            if w0.shape != self.x0.shape:
                raise DimensionMismatch("W0 must match X0 in shape")
            object.__setattr__(self, "w0", w0)

    @property
    def t_len(self) -> int:
        return self.u0.shape[1]

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    @property
    def m(self) -> int:
        return self.u0.shape[0]

    def d0(self) -> np.ndarray:
        """Stacked input-state data [U0; X0], shape (n+m) x T."""
        return np.vstack([self.u0, self.x0])


@dataclass(frozen=True)
class CovarianceData:
    """Sample covariances of a record, with the ridge shift gamma baked in."""

    phi: np.ndarray
    psi: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    xbar0: np.ndarray
    ubar0: np.ndarray
    xbar1: np.ndarray
    wbar0: np.ndarray | None
    gamma: float
    t_len: int
    rank_d0: int
    cond_gram: float

    @property
    def n(self) -> int:
        return self.xbar0.shape[0]

    @property
    def m(self) -> int:
        return self.ubar0.shape[0]


def simulate_scripted(sys: LtiSystem, x_init, u0, w0=None) -> DataRecord:
    """Deterministic rollout with explicit inputs (and optional noise)."""
    u0 = linalg.as_matrix(u0)
    if u0.shape[0] != sys.m:
        raise DimensionMismatch(f"U0 has {u0.shape[0]} input rows, expected {sys.m}")
    t_len = u0.shape[1]
    w0 = np.zeros((sys.n, t_len)) if w0 is None else linalg.as_matrix(w0)
    x_init = np.asarray(x_init, dtype=float).reshape(sys.n)
    traj, diverged = rollout(sys.a, sys.b, x_init, u0, w0, DIVERGENCE_LIMIT)
    if diverged:
        raise TrajectoryDiverged(f"state magnitude exceeded {DIVERGENCE_LIMIT:g}")
    return DataRecord(u0=u0, x0=traj[:, :t_len], x1=traj[:, 1:], w0=w0)


def simulate_and_collect(sys: LtiSystem, noise: NoiseSpec, input_std: float,
                         t_len: int) -> DataRecord:
    """Excites the plant with Gaussian input and collects one experiment."""
    if t_len < 1:
        raise DimensionMismatch("T must be >= 1")
    if input_std <= 0:
        raise DimensionMismatch("input_std must be > 0")
    rng = np.random.default_rng(noise.seed)
    x_init = noise.sigma_x * rng.standard_normal(sys.n)
    u0 = input_std * rng.standard_normal((sys.m, t_len))
    w0 = noise.sigma_w * rng.standard_normal((sys.n, t_len))
    return simulate_scripted(sys, x_init, u0, w0)


def covariances(rec: DataRecord, gamma: float = 0.0,
                tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> CovarianceData:
    """Phi = D0 D0^T / T, Psi = (D0 D0^T + gamma I)/T, and the bar matrices."""
    if gamma < 0:
        raise DimensionMismatch("gamma must be >= 0")
    d0 = rec.d0()
    t_len = rec.t_len
    gram = d0 @ d0.T
    phi = gram / t_len
    # Phi stacks the input/state covariance rows, so Ubar0 and Xbar0 are its
    # row blocks; with gamma = 0 the shifted matrix is Phi itself, making the
    # reduction to the unregularized parameterization exact
    psi = phi if gamma == 0.0 else (gram + gamma * np.eye(d0.shape[0])) / t_len
    m = rec.m
    return CovarianceData(
        phi=phi,
        psi=psi,
        psi1=psi[:m, :],
        psi2=psi[m:, :],
        xbar0=phi[m:, :],
        ubar0=phi[:m, :],
        xbar1=rec.x1 @ d0.T / t_len,
        wbar0=None if rec.w0 is None else rec.w0 @ d0.T / t_len,
        gamma=float(gamma),
        t_len=t_len,
        rank_d0=linalg.numerical_rank(d0, tol),
        cond_gram=linalg.condition_number(gram, tol),
    )
