"""Controller synthesis: model-based, indirect, and direct formulations.

All direct methods share one convex program template over the sample
covariances. With S1 (m rows) and S2 (n rows) the input/state row blocks of
the chosen covariance - Psi for the ridge-regularized methods, Phi for the
plain ones - and X1bar the successor covariance, the program is

    minimize  Tr(Q P) + Tr(R L) [+ lam Tr(M)]
    over      P sym, Y (n+m) x n, L sym [, M sym]
    s.t.      S2 Y = P
              [ P - I   X1bar Y ]            [ L      S1 Y ]
              [ (X1bar Y)^T  P  ] >= 0,      [ (S1 Y)^T  P ] >= 0
              [ M        F Y ]
              [ (F Y)^T   P  ] >= 0          (only when lam > 0, F = Phi^{1/2})

and the gain is K = S1 Y P^{-1}. The optional M-block is the epigraph of
the covariance regularizer Tr(Y P^{-1} Y^T Phi).

The indirect routes identify (Ahat, Bhat) first and run the Riccati solver
on the estimate; by the equivalence theory both pipelines must land on the
same gain for matching gamma, which the test suite checks at 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, lqr, sysid
from .errors import (
    NoConvergence,
    NotPositiveDefinite,
    RankDeficient,
    Singular,
    SolverFailed,
)
from .lmi import LmiBuilder, blockmat
from .lti import CovarianceData, DataRecord, LtiSystem, covariances
from .lqr import GainResult, LqrWeights
from .sdp import OPTIMAL, solve

METHODS = (
    "model-based",
    "indirect-ls",
    "indirect-tikhonov",
    "direct-cov",
    "direct-cov-omega",
    "direct-ridge",
    "direct-mixed",
)

SDP_TOL = 1e-8
SDP_MAX_ITER = 200


@dataclass(frozen=True)
class SynthesisSpec:
    """Method selection plus regularization coefficients for one synthesis."""

    method: str
    weights: LqrWeights
    lam: float = 0.0
    gamma: float = 0.0
    omega_uses_psi: bool = False   # mixed method: weight the regularizer by Psi instead of Phi
    tolerances: linalg.ToleranceConfig = field(default_factory=lambda: linalg.DEFAULT_TOL)

    def __post_init__(self):
        if self.method not in METHODS:
            raise SolverFailed(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.lam < 0 or self.gamma < 0:
            raise SolverFailed("regularization coefficients must be >= 0")


@dataclass
class ParamCertificate:
    """Optimal program variables tied together by K = S1 Y P^{-1}."""

    xi: np.ndarray
    y: np.ndarray
    p: np.ndarray
    l: np.ndarray
    k: np.ndarray


def _solve_cov_program(s1, s2, x1bar, weights: LqrWeights, lam: float,
                       phi_half, sdp_tol: float, max_iter: int):
    n = s2.shape[0]
    m = s1.shape[0]
    b = LmiBuilder()
    p_var = b.sym_var("P", n)
    y_var = b.rect_var("Y", n + m, n)
    l_var = b.sym_var("L", m)
    b.add_eq(s2 @ y_var - p_var)
    xy = x1bar @ y_var
    b.add_psd(blockmat([[p_var - np.eye(n), xy], [xy.T, p_var]]))
    uy = s1 @ y_var
    b.add_psd(blockmat([[l_var, uy], [uy.T, p_var]]))
    objective = (weights.q @ p_var).trace() + (weights.r @ l_var).trace()
    if lam > 0:
        m_var = b.sym_var("M", n + m)
        fy = phi_half @ y_var
        b.add_psd(blockmat([[m_var, fy], [fy.T, p_var]]))
        objective = objective + lam * m_var.trace()
    b.minimize(objective)
    prob, varmap = b.build()
    sol = solve(prob, tol=sdp_tol, max_iter=max_iter)
    return sol, varmap


def _direct_gain(sol, varmap, s1, true_sys, weights, tol) -> GainResult:
    if sol.status != OPTIMAL:
        raise SolverFailed(f"conic solver returned {sol.status}: {sol.message}",
                           status=sol.status)
    values = varmap.extract(sol)
    p_opt, y_opt, l_opt = values["P"], values["Y"], values["L"]
    p_opt = 0.5 * (p_opt + p_opt.T)
    xi = linalg.solve_linear(p_opt, y_opt.T).T
    k = s1 @ xi
    cert = ParamCertificate(xi=xi, y=y_opt, p=p_opt, l=l_opt, k=k)
    diagnostics = {
        "solver_status": sol.status,
        "iterations": sol.iterations,
        "kkt": tuple(float(v) for v in sol.kkt),
        "objective": sol.objective,
    }
    result = lqr.gain_result(true_sys, weights, k, diagnostics, cert, tol)
    if result.p is None:
        result.p = p_opt
    return result


def synth_model_based(sys: LtiSystem, weights: LqrWeights,
                      tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL,
                      sdp_tol: float = SDP_TOL) -> GainResult:
    """LMI route to the model-based optimum (cross-checked against Riccati)."""
    n, m = sys.n, sys.m
    b = LmiBuilder()
    p_var = b.sym_var("P", n)
    y_var = b.rect_var("Y", m, n)
    l_var = b.sym_var("L", m)
    closed = sys.a @ p_var + sys.b @ y_var
    b.add_psd(blockmat([[p_var - np.eye(n), closed], [closed.T, p_var]]))
    b.add_psd(blockmat([[l_var, y_var], [y_var.T, p_var]]))
    b.minimize((weights.q @ p_var).trace() + (weights.r @ l_var).trace())
    prob, varmap = b.build()
    sol = solve(prob, tol=sdp_tol, max_iter=SDP_MAX_ITER)
    if sol.status != OPTIMAL:
        raise SolverFailed(f"model-based LMI solve returned {sol.status}", status=sol.status)
    values = varmap.extract(sol)
    p_opt = 0.5 * (values["P"] + values["P"].T)
    k = linalg.solve_linear(p_opt, values["Y"].T).T
    diagnostics = {"solver_status": sol.status, "iterations": sol.iterations,
                   "kkt": tuple(float(v) for v in sol.kkt), "objective": sol.objective}
    return lqr.gain_result(sys, weights, k, diagnostics, None, tol)


def synth_indirect(rec: DataRecord, weights: LqrWeights, gamma: float,
                   true_sys: LtiSystem | None = None,
                   tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL) -> GainResult:
    """Certainty equivalence: identify, then Riccati on the estimate."""
    model = sysid.least_squares(rec, tol) if gamma == 0 else sysid.tikhonov(rec, gamma)
    est_sys = LtiSystem(a=model.ahat, b=model.bhat)
    try:
        _, k = lqr.dare_solve(est_sys, weights, tol)
    except (NoConvergence, Singular) as exc:
        raise SolverFailed(f"Riccati solve on the identified model failed: {exc}") from exc
    diagnostics = {"gamma": gamma, "identification_residual": model.residual,
                   "cond_gram": model.cond_gram, "cond_shifted": model.cond_shifted}
    return lqr.gain_result(true_sys, weights, k, diagnostics, None, tol)


def synth_direct_ridge(cov: CovarianceData, weights: LqrWeights,
                       true_sys: LtiSystem | None = None,
                       tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL,
                       sdp_tol: float = SDP_TOL) -> GainResult:
    """Ridge-parameterized direct synthesis (well posed for any data rank)."""
    sol, varmap = _solve_cov_program(cov.psi1, cov.psi2, cov.xbar1, weights,
                                     0.0, None, sdp_tol, SDP_MAX_ITER)
    return _direct_gain(sol, varmap, cov.psi1, true_sys, weights, tol)


def synth_direct_cov(cov: CovarianceData, weights: LqrWeights, lam: float = 0.0,
                     true_sys: LtiSystem | None = None,
                     tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL,
                     sdp_tol: float = SDP_TOL) -> GainResult:
    """Plain covariance parameterization (lam = 0) or its regularized form.

    Requires the unshifted covariance to be positive definite (rich data);
    use the ridge method when it is not.
    """
    try:
        linalg.cholesky(cov.phi, tol)
    except NotPositiveDefinite as exc:
        raise RankDeficient(f"sample covariance is singular (rank {cov.rank_d0}); "
                            "rich data required") from exc
    phi_half = linalg.psd_sqrt(cov.phi, tol) if lam > 0 else None
    sol, varmap = _solve_cov_program(cov.ubar0, cov.xbar0, cov.xbar1, weights,
                                     lam, phi_half, sdp_tol, SDP_MAX_ITER)
    return _direct_gain(sol, varmap, cov.ubar0, true_sys, weights, tol)


def synth_direct_mixed(cov: CovarianceData, weights: LqrWeights, lam: float,
                       true_sys: LtiSystem | None = None,
                       omega_uses_psi: bool = False,
                       tol: linalg.ToleranceConfig = linalg.DEFAULT_TOL,
                       sdp_tol: float = SDP_TOL) -> GainResult:
    """Ridge parameterization plus the covariance regularizer (both coefficients).

    With lam = 0 this is exactly the ridge program; with gamma = 0 in ``cov``
    it reduces to the regularized plain parameterization. The regularizer is
    weighted by Phi as defined; ``omega_uses_psi`` switches it to Psi.
    """
    phi_half = None
    if lam > 0:
        base = cov.psi if omega_uses_psi else cov.phi
        phi_half = linalg.psd_sqrt(base, tol)
    sol, varmap = _solve_cov_program(cov.psi1, cov.psi2, cov.xbar1, weights,
                                     lam, phi_half, sdp_tol, SDP_MAX_ITER)
    return _direct_gain(sol, varmap, cov.psi1, true_sys, weights, tol)


def synthesize(spec: SynthesisSpec, rec: DataRecord,
               true_sys: LtiSystem | None = None,
               sdp_tol: float = SDP_TOL) -> GainResult:
    """Name-based dispatch used by the CLI and the experiment harness."""
    w, tol = spec.weights, spec.tolerances
    if spec.method == "model-based":
        if true_sys is None:
            raise SolverFailed("model-based synthesis needs the true system")
        return synth_model_based(true_sys, w, tol, sdp_tol)
    if spec.method == "indirect-ls":
        return synth_indirect(rec, w, 0.0, true_sys, tol)
    if spec.method == "indirect-tikhonov":
        return synth_indirect(rec, w, spec.gamma, true_sys, tol)
    if spec.method == "direct-cov":
        return synth_direct_cov(covariances(rec, 0.0, tol), w, 0.0, true_sys, tol, sdp_tol)
    if spec.method == "direct-cov-omega":
        return synth_direct_cov(covariances(rec, 0.0, tol), w, spec.lam, true_sys, tol, sdp_tol)
    if spec.method == "direct-ridge":
        return synth_direct_ridge(covariances(rec, spec.gamma, tol), w, true_sys, tol, sdp_tol)
    return synth_direct_mixed(covariances(rec, spec.gamma, tol), w, spec.lam,
                              true_sys, spec.omega_uses_psi, tol, sdp_tol)
