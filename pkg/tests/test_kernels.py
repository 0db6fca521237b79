import numpy as np
import pytest

from covlqr import _fallback, kernels


def test_svec_smat_round_trip():
    rng = np.random.default_rng(0)
    for d in (1, 2, 3, 6, 9):
        m = rng.standard_normal((d, d))
        m = m + m.T
        assert np.allclose(kernels.smat(kernels.svec(m), d), m)


def test_svec_preserves_inner_product():
    rng = np.random.default_rng(1)
    for d in (2, 4, 7):
        a = rng.standard_normal((d, d)); a = a + a.T
        b = rng.standard_normal((d, d)); b = b + b.T
        assert kernels.svec(a) @ kernels.svec(b) == pytest.approx(np.trace(a @ b))


def test_symkron_matches_direct_congruence():
    rng = np.random.default_rng(2)
    for d in (1, 2, 3, 5, 8):
        r = rng.standard_normal((d, d))
        sk = kernels.symkron(r)
        for _ in range(3):
            x = rng.standard_normal((d, d))
            x = x + x.T
            assert np.allclose(sk @ kernels.svec(x), kernels.svec(r.T @ x @ r), atol=1e-12)


def test_symkron_composition():
    rng = np.random.default_rng(3)
    r1 = rng.standard_normal((4, 4))
    r2 = rng.standard_normal((4, 4))
    lhs = kernels.symkron(r1) @ kernels.symkron(r2)
    rhs = kernels.symkron(r2 @ r1)  # X -> R2^T (R1^T X R1) ... applied right-to-left
    x = rng.standard_normal((4, 4)); x = x + x.T
    assert np.allclose(lhs @ kernels.svec(x), kernels.svec(r1.T @ (r2.T @ x @ r2) @ r1))
    assert np.allclose(rhs @ kernels.svec(x), kernels.svec((r2 @ r1).T @ x @ (r2 @ r1)))


def test_fallback_agrees_with_dispatch():
    rng = np.random.default_rng(4)
    for d in (1, 3, 6):
        r = rng.standard_normal((d, d))
        rows, cols, _ = kernels.svec_indices(d)
        assert np.allclose(kernels.symkron(r), _fallback.symkron(r, rows, cols), atol=1e-14)
        m = rng.standard_normal((d, d)); m = m + m.T
        assert np.array_equal(kernels.svec(m), kernels._svec_py(m))
        v = rng.standard_normal(d * (d + 1) // 2)
        assert np.allclose(kernels.smat(v, d), kernels._smat_py(v, d), atol=0)


def test_rollout_matches_fallback_and_recursion():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 3)) * 0.4
    b = rng.standard_normal((3, 2))
    x0 = rng.standard_normal(3)
    u = rng.standard_normal((2, 7))
    w = rng.standard_normal((3, 7)) * 0.1
    x, diverged = kernels.rollout(a, b, x0, u, w)
    assert not diverged
    xf, df = _fallback.rollout(a, b, x0, u, w, 1e12)
    # backends may differ in summation order, so bit equality is not required
    assert np.allclose(x, xf, rtol=1e-13, atol=1e-14) and not df
    cur = x0
    for k in range(7):
        cur = a @ cur + b @ u[:, k] + w[:, k]
        assert np.allclose(x[:, k + 1], cur, rtol=1e-13, atol=1e-14)


def test_rollout_divergence_flag():
    a = np.array([[2.0]])
    b = np.zeros((1, 1))
    u = np.zeros((1, 60))
    w = np.zeros((1, 60))
    x, diverged = kernels.rollout(a, b, np.array([1.0]), u, w, limit=1e6)
    assert diverged


def test_backend_reported():
    assert kernels.BACKEND in ("native", "python")
