"""Lifted-state synthesis for nonlinear plants with a linear embedding.

The state of a nonlinear plant x+ = f(x, u) is lifted through a dictionary
of observables Theta(x) = (phi_1(x), ..., phi_nz(x)); when the plant admits
a linear embedding, z = Theta(x) evolves as z+ = A z + B u and the ridge
direct method applies verbatim with (U0, Z0, Z1) in place of (U0, X0, X1).
The synthesized gain feeds back the lifted state: u = K Theta(x).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NonFiniteObservable, TrajectoryDiverged
from .lti import DIVERGENCE_LIMIT, CovarianceData, DataRecord, LtiSystem, covariances
from .lqr import GainResult, LqrWeights
from .synthesis import synth_direct_ridge


@dataclass(frozen=True)
class LiftingDictionary:
    """Named scalar observables over the n-dimensional state, n_z > n.

    The first ``n_coords`` observables are the coordinate functions; the
    default lifted weights penalize only those (auxiliary observables get a
    small epsilon weight).
    """

    n: int
    names: tuple[str, ...]
    observables: tuple[Callable[[np.ndarray], float], ...]
    n_coords: int

    def __post_init__(self):
        if len(self.names) != len(self.observables):
            raise DimensionMismatch("one name per observable required")
        if self.n_z <= self.n:
            raise DimensionMismatch(
                f"lifted dimension {self.n_z} must exceed the state dimension {self.n}")

    @property
    def n_z(self) -> int:
        return len(self.observables)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(self.n)
        z = np.array([phi(x) for phi in self.observables], dtype=float)
        if not np.all(np.isfinite(z)):
            bad = self.names[int(np.argmax(~np.isfinite(z)))]
            raise NonFiniteObservable(f"observable {bad!r} is not finite at x={x}")
        return z


@dataclass(frozen=True)
class LiftedDataRecord:
    u0: np.ndarray
    z0: np.ndarray
    z1: np.ndarray

    @property
    def t_len(self) -> int:
        return self.u0.shape[1]

    @property
    def n_z(self) -> int:
        return self.z0.shape[0]

    @property
    def m(self) -> int:
        return self.u0.shape[0]

    def d0(self) -> np.ndarray:
        return np.vstack([self.u0, self.z0])


def coordinate_dictionary(n: int, extra: Sequence[tuple[str, Callable]] = ()) -> LiftingDictionary:
    """Coordinate functions plus caller-supplied extra observables."""
    names = [f"x{i+1}" for i in range(n)]
    obs = [(lambda x, i=i: float(x[i])) for i in range(n)]
    for name, fn in extra:
        names.append(name)
        obs.append(fn)
    return LiftingDictionary(n, tuple(names), tuple(obs), n_coords=n)


def monomial_dictionary(n: int, degree: int) -> LiftingDictionary:
    """Coordinates plus all monomials of total degree 2..degree."""
    if degree < 2:
        raise DimensionMismatch("monomial dictionary needs degree >= 2")
    extra = []
    for deg in range(2, degree + 1):
        for combo in combinations_with_replacement(range(n), deg):
            name = "*".join(f"x{i+1}" for i in combo)
            extra.append((name, lambda x, c=combo: float(np.prod([x[i] for i in c]))))
    return coordinate_dictionary(n, extra)


def rbf_dictionary(n: int, centers: np.ndarray, width: float) -> LiftingDictionary:
    """Coordinates plus Gaussian bumps exp(-|x - c|^2 / (2 w^2))."""
    centers = linalg.as_matrix(centers)
    if centers.shape[1] != n:
        raise DimensionMismatch(f"centers must have {n} columns")
    if width <= 0:
        raise DimensionMismatch("rbf width must be positive")
    extra = []
    for idx, c in enumerate(centers):
        extra.append((f"rbf{idx+1}",
                      lambda x, c=c.copy(): float(np.exp(-np.sum((x - c) ** 2) / (2 * width ** 2)))))
    return coordinate_dictionary(n, extra)


def lift(raw: DataRecord, lift_dict: LiftingDictionary) -> LiftedDataRecord:
    """Applies Theta columnwise to the raw record's states."""
    if raw.n != lift_dict.n:
        raise DimensionMismatch(
            f"dictionary is over R^{lift_dict.n}, data states live in R^{raw.n}")
    z0 = np.column_stack([lift_dict.evaluate(raw.x0[:, k]) for k in range(raw.t_len)])
    z1 = np.column_stack([lift_dict.evaluate(raw.x1[:, k]) for k in range(raw.t_len)])
    lifted = LiftedDataRecord(u0=raw.u0, z0=z0, z1=z1)
    gram_rank = linalg.numerical_rank(lifted.d0())
    if gram_rank < min(lift_dict.n_z + raw.m, raw.t_len):
        warnings.warn(
            f"lifted data has rank {gram_rank} < {lift_dict.n_z + raw.m}; "
            "observables may be linearly dependent on this data", stacklevel=2)
    return lifted


def lifted_weights(lift_dict: LiftingDictionary, q_coords: np.ndarray,
                   r: np.ndarray, eps: float = 1e-6) -> LqrWeights:
    """Block-diagonal lifted weights: Q on coordinates, eps I on the rest."""
    q_coords = linalg.as_matrix(q_coords)
    if q_coords.shape[0] != lift_dict.n_coords:
        raise DimensionMismatch("q_coords must match the coordinate block")
    qz = eps * np.eye(lift_dict.n_z)
    qz[:lift_dict.n_coords, :lift_dict.n_coords] = q_coords
    return LqrWeights(qz, r)


def lifted_covariances(lifted: LiftedDataRecord, gamma: float) -> CovarianceData:
    rec = DataRecord(u0=lifted.u0, x0=lifted.z0, x1=lifted.z1)
    return covariances(rec, gamma)


def synth_koopman(lifted: LiftedDataRecord, weights: LqrWeights, gamma: float,
                  tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> GainResult:
    """Ridge direct synthesis on the lifted data; K acts on the lifted state.

    The returned result carries no stability verdict: closed-loop behavior
    on the original plant is assessed by rollout (see rollout_closed_loop).
    """
    cov = lifted_covariances(lifted, gamma)
    return synth_direct_ridge(cov, weights, true_sys=None, tol=tol)


def identify_lifted(lifted: LiftedDataRecord) -> tuple[LtiSystem, float]:
    """Least-squares lifted model (A_z, B_z) and its relative fit residual."""
    d0 = lifted.d0()
    ba = np.linalg.lstsq(d0.T, lifted.z1.T, rcond=None)[0].T
    residual = np.linalg.norm(lifted.z1 - ba @ d0, "fro") / max(
        np.linalg.norm(lifted.z1, "fro"), 1e-300)
    m = lifted.m
    return LtiSystem(a=ba[:, m:], b=ba[:, :m]), float(residual)


def simulate_nonlinear(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       x_init: np.ndarray, u0: np.ndarray) -> DataRecord:
    """Rolls the nonlinear plant under scripted inputs; collects raw data."""
    u0 = linalg.as_matrix(u0)
    t_len = u0.shape[1]
    x = np.asarray(x_init, dtype=float).reshape(-1)
    xs = [x]
    for k in range(t_len):
        x = np.asarray(f(x, u0[:, k]), dtype=float).reshape(-1)
        if np.abs(x).max(initial=0.0) > DIVERGENCE_LIMIT:
            raise TrajectoryDiverged("nonlinear rollout exceeded the divergence limit")
        xs.append(x)
    traj = np.column_stack(xs)
    return DataRecord(u0=u0, x0=traj[:, :t_len], x1=traj[:, 1:])


def rollout_closed_loop(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                        lift_dict: LiftingDictionary, k_gain: np.ndarray,
                        x_init: np.ndarray, steps: int) -> np.ndarray:
    """Applies u = K Theta(x) to the nonlinear plant; returns n x (steps+1)."""
    k_gain = linalg.as_matrix(k_gain)
    x = np.asarray(x_init, dtype=float).reshape(-1)
    out = [x]
    for _ in range(steps):
        u = k_gain @ lift_dict.evaluate(x)
        x = np.asarray(f(x, u), dtype=float).reshape(-1)
        if np.abs(x).max(initial=0.0) > DIVERGENCE_LIMIT:
            raise TrajectoryDiverged("closed-loop rollout diverged")
        out.append(x)
    return np.column_stack(out)
