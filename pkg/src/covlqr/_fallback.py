"""Pure-numpy implementations of the hot kernels.

`covlqr.kernels` exposes these when the compiled extension is unavailable.
Both implementations must agree bit-for-bit in exact arithmetic; the test
suite cross-checks them whenever the extension is importable.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)


def symkron(r: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Matrix of the congruence map X -> R^T X R in svec coordinates.

    ``ii, jj`` are the svec row/column index arrays (i >= j, column-major
    lower triangle) for the block dimension. Output is (tri, tri) with
    tri = len(ii), and satisfies symkron(R) @ svec(X) = svec(R^T X R).
    """
    m1 = r[np.ix_(ii, ii)].T      # [row, col] = R[p_c, k_r]
    m2 = r[np.ix_(jj, jj)].T      # R[q_c, l_r]
    m3 = r[np.ix_(jj, ii)].T      # R[q_c, k_r]
    m4 = r[np.ix_(ii, jj)].T      # R[p_c, l_r]
    t = m1 * m2 + m3 * m4
    row_s = np.where(ii != jj, _SQRT2, 1.0)
    col_f = np.where(ii == jj, 2.0, _SQRT2)
    return (row_s[:, None] / col_f[None, :]) * t


def rollout(a: np.ndarray, b: np.ndarray, x0: np.ndarray,
            u: np.ndarray, w: np.ndarray, limit: float) -> tuple[np.ndarray, bool]:
    """Rolls x(k+1) = A x(k) + B u(k) + w(k) for T steps.

    Returns (X, diverged) where X is n x (T+1) including the initial state.
    ``diverged`` is set as soon as any entry exceeds ``limit`` in magnitude;
    the rollout stops there and remaining columns stay zero.
    """
    n = a.shape[0]
    t_len = u.shape[1]
    x = np.zeros((n, t_len + 1))
    x[:, 0] = x0
    cur = x0
    for k in range(t_len):
        cur = a @ cur + b @ u[:, k] + w[:, k]
        if np.abs(cur).max(initial=0.0) > limit:
            x[:, k + 1] = cur
            return x, True
        x[:, k + 1] = cur
    return x, False
