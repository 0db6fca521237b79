import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covlqr.errors import DimensionMismatch, RankDeficient
from covlqr.lti import DataRecord, LtiSystem, NoiseSpec, simulate_and_collect
from covlqr.sysid import least_squares, tikhonov


def noiseless_record(seed=0, n=3, m=2, t_len=25):
    rng = np.random.default_rng(seed)
    sys = LtiSystem(a=0.5 * rng.standard_normal((n, n)), b=rng.standard_normal((n, m)))
    rec = simulate_and_collect(sys, NoiseSpec(sigma_x=1.0, sigma_w=0.0, seed=seed + 1),
                               1.0, t_len)
    return sys, rec


class TestLeastSquares:
    def test_exact_recovery_noiseless(self):
        sys, rec = noiseless_record()
        model = least_squares(rec)
        assert np.allclose(model.ahat, sys.a, atol=1e-8)
        assert np.allclose(model.bhat, sys.b, atol=1e-8)
        assert model.residual <= 1e-8

    def test_hand_solved_scalar(self):
        rec = DataRecord(u0=[[1.0, 0.0]], x0=[[0.0, 1.0]], x1=[[1.0, 0.5]])
        model = least_squares(rec)
        assert model.bhat[0, 0] == pytest.approx(1.0)
        assert model.ahat[0, 0] == pytest.approx(0.5)

    def test_rank_deficient_rejected(self):
        rec = DataRecord(u0=[[1.0]], x0=np.array([[1.0], [1.0]]), x1=np.array([[1.0], [1.0]]))
        with pytest.raises(RankDeficient):
            least_squares(rec)


class TestTikhonov:
    def test_gamma_to_zero_limit(self):
        _, rec = noiseless_record(seed=4)
        ls = least_squares(rec)
        ridge = tikhonov(rec, 1e-10)
        assert np.abs(ridge.stacked() - ls.stacked()).max() <= 1e-6

    def test_large_gamma_shrinks(self):
        _, rec = noiseless_record(seed=5)
        model = tikhonov(rec, 1e12)
        d0 = rec.d0()
        bound = np.linalg.norm(rec.x1 @ d0.T, "fro") / 1e12
        assert np.linalg.norm(model.stacked(), "fro") <= bound * (1 + 1e-9)

    def test_hand_inverse(self):
        rec = DataRecord(u0=[[1.0]], x0=[[1.0]], x1=[[3.0]])
        model = tikhonov(rec, 1.0)
        assert np.allclose(model.stacked(), [[1.0, 1.0]])

    def test_rank_deficient_allowed(self):
        rec = DataRecord(u0=[[1.0]], x0=np.array([[1.0], [2.0]]), x1=np.array([[0.3], [0.6]]))
        model = tikhonov(rec, 0.5)
        assert np.all(np.isfinite(model.stacked()))

    def test_gamma_nonpositive_rejected(self):
        _, rec = noiseless_record(seed=6)
        with pytest.raises(DimensionMismatch):
            tikhonov(rec, 0.0)

    def test_augmented_lstsq_oracle(self):
        # ridge objective |X1 - BA D0|_F^2 + g |BA|_F^2 equals the ordinary
        # least-squares problem on data augmented with sqrt(g) I; solving that
        # with an independent QR route must give the same estimate
        rng = np.random.default_rng(8)
        sys, rec = noiseless_record(seed=8, n=2, m=1, t_len=6)
        noisy = DataRecord(u0=rec.u0, x0=rec.x0,
                           x1=rec.x1 + 0.3 * rng.standard_normal(rec.x1.shape))
        for gamma in (0.1, 1.0, 10.0):
            model = tikhonov(noisy, gamma)
            d0 = noisy.d0()
            aug_a = np.vstack([d0.T, np.sqrt(gamma) * np.eye(d0.shape[0])])
            aug_b = np.vstack([noisy.x1.T, np.zeros((d0.shape[0], noisy.n))])
            ref = np.linalg.lstsq(aug_a, aug_b, rcond=None)[0].T
            assert np.abs(model.stacked() - ref).max() <= 1e-6

    @given(st.integers(0, 200))
    @settings(max_examples=20, deadline=None)
    def test_monotone_shrinkage(self, seed):
        rng = np.random.default_rng(seed)
        rec = DataRecord(u0=rng.standard_normal((1, 6)),
                         x0=rng.standard_normal((2, 6)),
                         x1=rng.standard_normal((2, 6)))
        gammas = [0.01, 0.1, 1.0, 10.0, 100.0]
        norms = [np.linalg.norm(tikhonov(rec, g).stacked(), "fro") for g in gammas]
        for lo, hi in zip(norms[1:], norms[:-1]):
            assert lo <= hi * (1 + 1e-9)

    def test_cond_report(self):
        _, rec = noiseless_record(seed=9)
        model = tikhonov(rec, 5.0)
        assert model.cond_shifted <= model.cond_gram
        payload = model.to_json()
        assert set(payload) >= {"Ahat", "Bhat", "gamma", "residual"}
