"""Least-squares and ridge-regularized identification of (A, B) from data.

Both estimators share the closed form [Bhat Ahat] = X1 D0^T (D0 D0^T + g I)^{-1}
with g = 0 for plain least squares (full row rank required) and g > 0 for the
ridge variant (well posed for any rank). The ridge objective is the Frobenius
norm of the residual plus g times the squared Frobenius norm of [B A].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, RankDeficient
from .lti import DataRecord


@dataclass(frozen=True)
class IdentifiedModel:
    ahat: np.ndarray
    bhat: np.ndarray
    gamma: float
    residual: float
    cond_gram: float         # condition number of D0 D0^T
    cond_shifted: float      # condition number of D0 D0^T + gamma I

    def stacked(self) -> np.ndarray:
        return np.hstack([self.bhat, self.ahat])

    def to_json(self) -> dict:
        return {
            "Ahat": [[float(v) for v in row] for row in self.ahat],
            "Bhat": [[float(v) for v in row] for row in self.bhat],
            "gamma": self.gamma,
            "residual": self.residual,
            "cond_gram": self.cond_gram,
            "cond_shifted": self.cond_shifted,
        }


def _estimate(rec: DataRecord, gamma: float) -> IdentifiedModel:
    d0 = rec.d0()
    gram = d0 @ d0.T
    shifted = gram + gamma * np.eye(gram.shape[0])
    if gamma > 0:
        low = linalg.cholesky(shifted)
        z = np.linalg.solve(low, d0 @ rec.x1.T)
        ba = np.linalg.solve(low.T, z).T
    else:
        ba = linalg.solve_linear(gram, d0 @ rec.x1.T).T
    m = rec.m
    residual = float(np.linalg.norm(rec.x1 - ba @ d0, "fro"))
    return IdentifiedModel(
        ahat=ba[:, m:],
        bhat=ba[:, :m],
        gamma=float(gamma),
        residual=residual,
        cond_gram=linalg.condition_number(gram),
        cond_shifted=linalg.condition_number(shifted),
    )


def least_squares(rec: DataRecord,
                  tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> IdentifiedModel:
    """Plain least squares; requires rank(D0) = n + m."""
    d0 = rec.d0()
    full = d0.shape[0]
    rank = linalg.numerical_rank(d0, tol)
    if rank < full:
        raise RankDeficient(f"rank(D0) = {rank} < n + m = {full}")
    return _estimate(rec, 0.0)


def tikhonov(rec: DataRecord, gamma: float) -> IdentifiedModel:
    """Ridge estimate; well posed for any data rank as long as gamma > 0."""
    if gamma <= 0:
        raise DimensionMismatch("tikhonov requires gamma > 0")
    return _estimate(rec, gamma)
