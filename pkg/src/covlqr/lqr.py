"""Model-based LQR machinery.

Cost convention: for a stabilizing gain K the time-average cost is
J(K) = Tr(Q P + K^T R K P) where P solves the closed-loop Lyapunov equation
P = I + (A + B K) P (A + B K)^T, i.e. P is the steady-state covariance under
unit process noise. Non-stabilizing gains have infinite cost.

The optimal gain comes from the estimation-form discrete Riccati equation
P = Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A, solved by the
structure-preserving doubling iteration (quadratically convergent for
stabilizable pairs with Q > 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NoConvergence, Unstable
from .lti import LtiSystem


@dataclass(frozen=True)
class LqrWeights:
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        q = linalg.require_symmetric(linalg.as_matrix(self.q))
        r = linalg.require_symmetric(linalg.as_matrix(self.r))
        linalg.cholesky(q)   # raises NotPositiveDefinite unless Q > 0
        linalg.cholesky(r)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)


@dataclass
class GainResult:
    """Synthesized gain plus certificate and solver diagnostics."""

    k: np.ndarray
    p: np.ndarray | None
    cost: float
    stabilizing: bool | None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    certificate: Any = None


def dlyap(m: np.ndarray, c: np.ndarray,
          tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> np.ndarray:
    """Solves P = C + M P M^T by Kronecker vectorization; M must be stable."""
    m = linalg.require_square(linalg.as_matrix(m), "M")
    c = linalg.require_symmetric(linalg.as_matrix(c), tol)
    if c.shape != m.shape:
        raise DimensionMismatch("C must match M in shape")
    rho = linalg.spectral_radius(m, tol)
    if rho >= 1.0:
        raise Unstable(f"spectral radius {rho:.6f} >= 1")
    n = m.shape[0]
    lhs = np.eye(n * n) - np.kron(m, m)
    p = linalg.solve_linear(lhs, linalg.vec(c), tol)
    p = linalg.unvec(p, n, n)
    return 0.5 * (p + p.T)


def cost(sys: LtiSystem, w: LqrWeights, k: np.ndarray,
         tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> float:
    """Closed-loop time-average cost; infinity when A + BK is not stable."""
    k = linalg.as_matrix(k, rows=sys.m, cols=sys.n)
    a_cl = sys.a + sys.b @ k
    if linalg.spectral_radius(a_cl, tol) >= 1.0 - tol.stability_margin:
        return float("inf")
    p = dlyap(a_cl, np.eye(sys.n), tol)
    return float(np.trace((w.q + k.T @ w.r @ k) @ p))


def dare_solve(sys: LtiSystem, w: LqrWeights,
               tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL,
               max_iter: int = 120) -> tuple[np.ndarray, np.ndarray]:
    """Returns (P*, K*) with K* = -(R + B^T P B)^{-1} B^T P A."""
    a, b = sys.a, sys.b
    if w.q.shape[0] != sys.n or w.r.shape[0] != sys.m:
        raise DimensionMismatch("weight dimensions do not match the system")
    g = b @ linalg.solve_linear(w.r, b.T)
    h = w.q.copy()
    ak = a.copy()
    eye = np.eye(sys.n)
    for _ in range(max_iter):
        try:
            m_inv_ak = linalg.solve_linear(eye + g @ h, ak)
            ak_m = linalg.solve_linear((eye + g @ h).T, ak.T).T
        except linalg.Singular as exc:
            raise NoConvergence(f"doubling step became singular: {exc}") from exc
        h_next = h + ak.T @ h @ m_inv_ak
        g = g + ak_m @ g @ ak.T
        ak = ak_m @ ak
        if not np.all(np.isfinite(h_next)):
            raise NoConvergence("Riccati doubling iteration diverged")
        delta = np.abs(h_next - h).max() / max(1.0, np.abs(h_next).max())
        h = 0.5 * (h_next + h_next.T)
        if delta <= tol.dare_rel_change:
            break
    else:
        raise NoConvergence(f"Riccati iteration did not settle in {max_iter} doublings")

    p = h
    rbpb = w.r + b.T @ p @ b
    k = -linalg.solve_linear(rbpb, b.T @ p @ a)
    residual = w.q + a.T @ p @ a + a.T @ p @ b @ k - p
    rel = np.abs(residual).max() / max(1.0, np.abs(p).max())
    if rel > 1e-9:
        raise NoConvergence(f"Riccati residual {rel:.2e} above 1e-9")
    if linalg.spectral_radius(a + b @ k, tol) >= 1.0:
        raise NoConvergence("Riccati gain failed closed-loop stability check")
    return p, k


def optimality_gap(sys: LtiSystem, w: LqrWeights, k: np.ndarray,
                   kstar: np.ndarray,
                   tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> float:
    """(J(K) - J(K*)) / J(K*); infinite for non-stabilizing K."""
    j_star = cost(sys, w, kstar, tol)
    if not np.isfinite(j_star):
        raise Unstable("reference gain K* must be stabilizing")
    j_k = cost(sys, w, k, tol)
    if not np.isfinite(j_k):
        return float("inf")
    return (j_k - j_star) / j_star


def gain_result(sys: LtiSystem | None, w: LqrWeights, k: np.ndarray,
                diagnostics: dict | None = None, certificate=None,
                tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> GainResult:
    """Builds a GainResult, evaluating cost/stability when the plant is known."""
    diagnostics = diagnostics or {}
    if sys is None:
        return GainResult(k=k, p=None, cost=float("nan"), stabilizing=None,
                          diagnostics=diagnostics, certificate=certificate)
    a_cl = sys.a + sys.b @ k
    stabilizing = linalg.spectral_radius(a_cl, tol) < 1.0 - tol.stability_margin
    j = cost(sys, w, k, tol)
    p = dlyap(a_cl, np.eye(sys.n), tol) if stabilizing else None
    return GainResult(k=k, p=p, cost=j, stabilizing=stabilizing,
                      diagnostics=diagnostics, certificate=certificate)
