"""Hot-kernel dispatch: compiled extension when built, numpy otherwise.

The two kernels that dominate the Monte Carlo runtime are

* ``symkron`` - the svec-coordinate congruence operator assembled once per
  interior-point iteration per PSD block, and
* ``rollout`` - the sequential state recursion behind every simulated
  trajectory.

`import covlqr.kernels` picks the compiled versions from ``covlqr._native``
when the extension was built, else the numpy fallbacks; ``BACKEND`` records
the choice. ``benchmarks/bench_kernels.py`` compares the two.

This module also owns the svec convention used across the package:
lower-triangular, column-major, off-diagonal entries scaled by sqrt(2), so
that svec(X) . svec(Y) = Tr(X Y).
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from . import _fallback

if os.environ.get("COVLQR_FORCE_PYTHON_KERNELS"):
    _native = None
    BACKEND = "python"
else:
    try:
        from . import _native  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:  # pragma: no cover - depends on build environment
        _native = None
        BACKEND = "python"

_SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=64)
def svec_indices(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(row, col, scale) arrays for the svec layout of a dim x dim block."""
    up_r, up_c = np.triu_indices(dim)
    rows, cols = up_c, up_r            # lower triangle, column-major
    scale = np.where(rows != cols, _SQRT2, 1.0)
    return rows, cols, scale


def tri(dim: int) -> int:
    return dim * (dim + 1) // 2


def _svec_py(m: np.ndarray) -> np.ndarray:
    rows, cols, scale = svec_indices(m.shape[0])
    return m[rows, cols] * scale


def _smat_py(v: np.ndarray, dim: int) -> np.ndarray:
    rows, cols, scale = svec_indices(dim)
    out = np.zeros((dim, dim))
    vals = v / scale
    out[rows, cols] = vals
    out[cols, rows] = vals
    return out


if _native is not None and hasattr(_native, "svec"):
    def svec(m: np.ndarray) -> np.ndarray:
        return _native.svec(np.ascontiguousarray(m, dtype=float))

    def smat(v: np.ndarray, dim: int) -> np.ndarray:
        return _native.smat(np.ascontiguousarray(v, dtype=float), dim)
else:  # pragma: no cover - depends on build environment
    svec = _svec_py
    smat = _smat_py


def symkron(r: np.ndarray) -> np.ndarray:
    """svec-coordinate matrix of X -> R^T X R for a square block R."""
    r = np.ascontiguousarray(r, dtype=float)
    rows, cols, _ = svec_indices(r.shape[0])
    if _native is not None:
        return _native.symkron(r)
    return _fallback.symkron(r, rows, cols)


def rollout(a: np.ndarray, b: np.ndarray, x0: np.ndarray, u: np.ndarray,
            w: np.ndarray, limit: float = 1e12) -> tuple[np.ndarray, bool]:
    """State recursion x(k+1) = A x(k) + B u(k) + w(k); see _fallback."""
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float).reshape(-1)
    u = np.ascontiguousarray(u, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if _native is not None:
        return _native.rollout(a, b, x0, u, w, limit)
    return _fallback.rollout(a, b, x0, u, w, limit)
