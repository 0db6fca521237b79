import numpy as np
import pytest

from covlqr import linalg
from covlqr.errors import DimensionMismatch, NotPositiveDefinite, TrajectoryDiverged
from covlqr.lti import (
    CovarianceData,
    DataRecord,
    LtiSystem,
    NoiseSpec,
    covariances,
    simulate_and_collect,
    simulate_scripted,
)


@pytest.fixture
def scalar_sys():
    return LtiSystem(a=[[0.5]], b=[[1.0]])


class TestSimulate:
    def test_unforced_zero_state(self, scalar_sys):
        rec = simulate_scripted(scalar_sys, [0.0], np.zeros((1, 4)))
        assert np.all(rec.x0 == 0) and np.all(rec.x1 == 0)

    def test_hand_rolled_recursion(self, scalar_sys):
        rec = simulate_scripted(scalar_sys, [0.0], np.array([[1.0, 0.0]]))
        assert np.allclose(rec.x0, [[0.0, 1.0]])
        assert np.allclose(rec.x1, [[1.0, 0.5]])

    def test_same_seed_identical(self, scalar_sys):
        noise = NoiseSpec(sigma_x=1.0, sigma_w=0.3, seed=42)
        r1 = simulate_and_collect(scalar_sys, noise, 1.0, 12)
        r2 = simulate_and_collect(scalar_sys, noise, 1.0, 12)
        assert np.array_equal(r1.u0, r2.u0)
        assert np.array_equal(r1.x0, r2.x0)
        assert np.array_equal(r1.w0, r2.w0)

    def test_data_identity_holds_exactly(self):
        rng = np.random.default_rng(9)
        sys = LtiSystem(a=rng.standard_normal((3, 3)) * 0.5, b=rng.standard_normal((3, 2)))
        rec = simulate_and_collect(sys, NoiseSpec(1.0, 0.2, seed=7), 1.0, 20)
        ba = np.hstack([sys.b, sys.a])
        assert np.allclose(rec.x1, ba @ rec.d0() + rec.w0, atol=1e-12)

    def test_divergence_raises(self):
        sys = LtiSystem(a=[[3.0]], b=[[0.0]])
        with pytest.raises(TrajectoryDiverged):
            simulate_scripted(sys, [1.0], np.zeros((1, 80)))

    def test_record_validation(self):
        with pytest.raises(DimensionMismatch):
            DataRecord(u0=np.ones((1, 3)), x0=np.ones((2, 3)), x1=np.ones((2, 2)))


class TestCovariances:
    def test_gamma_zero_reduces(self, scalar_sys):
        rec = simulate_and_collect(scalar_sys, NoiseSpec(1.0, 0.1, 1), 1.0, 8)
        cov = covariances(rec, 0.0)
        assert np.array_equal(cov.psi, cov.phi)
        assert np.array_equal(cov.psi1, cov.ubar0)
        assert np.array_equal(cov.psi2, cov.xbar0)

    def test_eigenvalue_shift(self, scalar_sys):
        rec = simulate_and_collect(scalar_sys, NoiseSpec(1.0, 0.1, 2), 1.0, 8)
        gamma = 0.7
        cov = covariances(rec, gamma)
        lhs = np.sort(np.linalg.eigvalsh(rec.t_len * cov.psi))
        rhs = np.sort(np.linalg.eigvalsh(rec.d0() @ rec.d0().T)) + gamma
        assert np.allclose(lhs, rhs, atol=1e-10)

    def test_hand_computed_psi(self):
        rec = DataRecord(u0=[[1.0]], x0=[[1.0]], x1=[[3.0]])
        cov = covariances(rec, 1.0)
        assert np.allclose(cov.psi, [[2.0, 1.0], [1.0, 2.0]])

    def test_psi_pd_even_rank_deficient(self):
        # T = 1 < n + m: D0 rank 1, Psi still PD for gamma > 0
        rec = DataRecord(u0=[[1.0]], x0=np.array([[1.0], [2.0]]), x1=np.array([[0.5], [1.0]]))
        cov = covariances(rec, 0.5)
        linalg.cholesky(cov.psi)  # must not raise
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky(cov.phi)

    def test_xbar1_identity(self):
        rng = np.random.default_rng(3)
        sys = LtiSystem(a=rng.standard_normal((2, 2)) * 0.4, b=rng.standard_normal((2, 1)))
        rec = simulate_and_collect(sys, NoiseSpec(1.0, 0.3, 5), 1.0, 15)
        cov = covariances(rec, 0.0)
        ba = np.hstack([sys.b, sys.a])
        lhs = cov.xbar1
        rhs = ba @ cov.phi + cov.wbar0
        assert np.abs(lhs - rhs).max() <= 1e-10 * (1 + np.abs(lhs).max())

    def test_conditioning_improves_with_gamma(self, scalar_sys):
        rec = simulate_and_collect(scalar_sys, NoiseSpec(1.0, 0.1, 8), 1.0, 6)
        base = covariances(rec, 0.0)
        shifted = covariances(rec, 2.0)
        cond_phi = linalg.condition_number(rec.t_len * base.psi)
        cond_psi = linalg.condition_number(rec.t_len * shifted.psi)
        assert cond_psi <= cond_phi

    def test_psi_minus_phi_invariant(self, scalar_sys):
        rec = simulate_and_collect(scalar_sys, NoiseSpec(1.0, 0.1, 4), 1.0, 9)
        gamma = 0.3
        cov = covariances(rec, gamma)
        diff = cov.psi - cov.phi
        assert np.allclose(diff, gamma / rec.t_len * np.eye(2), atol=1e-12)
