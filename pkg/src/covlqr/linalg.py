"""Dense real linear-algebra kernel used by every other module.

Matrices are plain 2-D float64 numpy arrays; :func:`as_matrix` is the
validating constructor (finite entries, explicit shape). All tolerances are
relative to matrix scale and overridable through :class:`ToleranceConfig`.
Eigenvalue work is delegated to LAPACK through numpy (Hessenberg + shifted QR
for general matrices, symmetric QR for symmetric ones).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    Singular,
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative tolerances for the numeric kernel and its callers."""

    symmetry: float = 1e-12          # allowed relative asymmetry before erroring
    rank_rel: float = 1e-10          # singular values below rank_rel*smax count as zero
    cond_floor: float = 1e-14        # eigenvalues below cond_floor*lmax mean cond = inf
    solve_pivot: float = 1e-14       # pivot threshold relative to ||A||
    stability_margin: float = 1e-9   # strict-inequality buffer for rho(A+BK) < 1
    dare_rel_change: float = 1e-12   # Riccati iteration stopping rule
    psd_slack: float = 1e-8          # allowed negative eigenvalue in PSD certificates


DEFAULT_TOL = ToleranceConfig()


def as_matrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validating matrix constructor: 2-D, float64, all entries finite."""
    m = np.array(entries, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1) if rows == 1 else m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={m.ndim}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatch(f"expected {cols} cols, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatch("matrix entries must be finite (no NaN/Inf)")
    return m


def require_square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {m.shape}")
    return m


def require_symmetric(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Returns the symmetrized matrix (M+M^T)/2, erroring if the asymmetry
    exceeds ``tol.symmetry`` relative to the matrix scale."""
    require_square(m)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    asym = float(np.abs(m - m.T).max(initial=0.0))
    if asym > tol.symmetry * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {tol.symmetry:.1e} * scale {scale:.3e}")
    return 0.5 * (m + m.T)


def cholesky(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Lower-triangular L with L L^T = M. Raises NotPositiveDefinite when a
    pivot is nonpositive, DimensionMismatch when M is not square symmetric."""
    sym = require_symmetric(as_matrix(m), tol)
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def is_positive_definite(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    try:
        cholesky(m, tol)
        return True
    except NotPositiveDefinite:
        return False


def spectral_radius(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    sq = require_square(as_matrix(m))
    if sq.shape[0] == 0:
        return 0.0
    try:
        eig = np.linalg.eigvals(sq)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue iteration failed: {exc}") from exc
    return float(np.abs(eig).max())


def solve_linear(a: np.ndarray, b: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Solves A X = B with a pivoted factorization; raises Singular when the
    effective pivot magnitude falls below ``tol.solve_pivot * ||A||``."""
    a = require_square(as_matrix(a), "A")
    b = as_matrix(b)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"B has {b.shape[0]} rows, A expects {a.shape[0]}")
    norm_a = float(np.abs(a).max(initial=0.0))
    sv_min = float(np.linalg.svd(a, compute_uv=False)[-1]) if a.size else 0.0
    if sv_min <= tol.solve_pivot * max(norm_a, 1e-300):
        raise Singular(f"minimum singular value {sv_min:.3e} below threshold")
    return np.linalg.solve(a, b)


def condition_number(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Ratio of extreme eigenvalues of a symmetric PSD matrix; inf when the
    smallest eigenvalue is at or below ``tol.cond_floor`` times the largest."""
    sym = require_symmetric(as_matrix(m), tol)
    eig = np.linalg.eigvalsh(sym)
    lmax = float(eig[-1])
    lmin = float(eig[0])
    if lmax <= 0.0:
        return 1.0 if sym.shape[0] == 0 else float("inf")
    if lmin <= tol.cond_floor * lmax:
        return float("inf")
    return lmax / lmin


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization, returned as a column matrix."""
    return as_matrix(m).reshape(-1, 1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != rows * cols:
        raise DimensionMismatch(f"cannot reshape {v.size} entries to {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def numerical_rank(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Rank by singular-value thresholding at ``rank_rel`` times the largest."""
    m = as_matrix(m)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol.rank_rel * sv[0]))


def psd_sqrt(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, roundoff-negative
    eigenvalues clamped at zero."""
    sym = require_symmetric(as_matrix(m), tol)
    w, v = np.linalg.eigh(sym)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def min_eigenvalue(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    sym = require_symmetric(as_matrix(m), tol)
    if sym.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(sym)[0])
