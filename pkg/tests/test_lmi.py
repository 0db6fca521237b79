import numpy as np
import pytest

from covlqr.errors import DimensionMismatch, NotSymmetric, UnknownVariable
from covlqr.kernels import svec
from covlqr.lmi import LmiBuilder, assemble_lmi, blockmat
from covlqr.lqr import LqrWeights, dare_solve
from covlqr.lti import DataRecord, LtiSystem, covariances
from covlqr.sdp import OPTIMAL, solve


def test_p_geq_identity():
    b = LmiBuilder()
    p_var = b.sym_var("P", 3)
    b.add_psd(p_var - np.eye(3))
    b.minimize(p_var.trace())
    prob, vm = assemble_lmi(b)
    sol = solve(prob, tol=1e-9)
    assert sol.status == OPTIMAL
    assert np.allclose(vm.extract(sol)["P"], np.eye(3), atol=1e-6)


def test_noiseless_scalar_program_matches_riccati():
    # scalar plant, exact noiseless data: the covariance program's optimum
    # must match the Riccati gain
    sys = LtiSystem(a=[[0.8]], b=[[1.0]])
    u0 = np.array([[1.0, -0.4, 0.3, 0.9, -1.2]])
    x = [0.5]
    for k in range(u0.shape[1]):
        x.append(0.8 * x[-1] + u0[0, k])
    x = np.array(x)
    rec = DataRecord(u0=u0, x0=x[None, :-1], x1=x[None, 1:])
    cov = covariances(rec, 1e-9)
    w = LqrWeights([[1.0]], [[1.0]])

    b = LmiBuilder()
    p_var = b.sym_var("P", 1)
    y_var = b.rect_var("Y", 2, 1)
    l_var = b.sym_var("L", 1)
    b.add_eq(cov.psi2 @ y_var - p_var)
    xy = cov.xbar1 @ y_var
    b.add_psd(blockmat([[p_var - np.eye(1), xy], [xy.T, p_var]]))
    uy = cov.psi1 @ y_var
    b.add_psd(blockmat([[l_var, uy], [uy.T, p_var]]))
    b.minimize((w.q @ p_var).trace() + (w.r @ l_var).trace())
    prob, vm = b.build()
    sol = solve(prob, tol=1e-10)
    assert sol.status == OPTIMAL
    vals = vm.extract(sol)
    k_gain = float((cov.psi1 @ vals["Y"] / vals["P"])[0, 0])
    _, kstar = dare_solve(sys, w)
    assert k_gain == pytest.approx(kstar[0, 0], abs=1e-5)


def test_shared_variable_across_lmis_structural():
    b = LmiBuilder()
    y = b.rect_var("Y", 2, 2)
    b.add_psd(blockmat([[np.eye(2), y], [y.T, np.eye(2)]]))
    b.add_psd(blockmat([[2.0 * np.eye(2), y], [y.T, 3.0 * np.eye(2)]]))
    b.minimize((np.eye(2) @ y).trace())
    prob, vm = b.build()
    assert prob.n_free == 4            # Y shared, not duplicated
    assert prob.block_dims == [4, 4]
    cols = prob.a_free[:, vm.decls["Y"].offset:]
    assert np.count_nonzero(cols) > 4  # Y entries appear in both blocks


def test_embed_feasible_point_round_trip():
    b = LmiBuilder()
    p_var = b.sym_var("P", 2)
    b.add_psd(p_var - np.eye(2))
    b.add_eq(p_var - p_var.T)  # redundant symmetric equality; rows dedup
    b.minimize(p_var.trace())
    prob, vm = b.build()
    p_feas = np.array([[2.0, 0.3], [0.3, 1.5]])
    blocks, free = b.embed({"P": p_feas})
    assert np.linalg.eigvalsh(blocks[0])[0] >= 0
    u = np.concatenate([svec(blk) for blk in blocks])
    rp = prob.b - prob.a_psd @ u - prob.a_free @ free
    assert np.abs(rp).max() <= 1e-12
    # and back: the free vector reproduces the named value
    assert np.allclose(vm.value_from_free("P", free), p_feas)


def test_asymmetric_lmi_rejected():
    b = LmiBuilder()
    y = b.rect_var("Y", 2, 2)
    with pytest.raises(NotSymmetric):
        b.add_psd(y)


def test_dimension_mismatch_in_blockmat():
    b = LmiBuilder()
    p_var = b.sym_var("P", 2)
    with pytest.raises(DimensionMismatch):
        blockmat([[p_var, np.eye(3)], [np.eye(3), p_var]])


def test_foreign_variable_rejected():
    b1, b2 = LmiBuilder(), LmiBuilder()
    p1 = b1.sym_var("P", 2)
    p2 = b2.sym_var("P", 2)
    with pytest.raises(UnknownVariable):
        b1.add_psd(p1 + p2)


def test_affine_algebra():
    b = LmiBuilder()
    y = b.rect_var("Y", 2, 3)
    c = np.arange(6.0).reshape(2, 3)
    expr = 2.0 * (c + y) - y
    assert expr.shape == (2, 3)
    assert np.allclose(expr.const, 2.0 * c)
    lhs = np.ones((2, 2)) @ y
    assert lhs.shape == (2, 3)
    rhs = y @ np.ones((3, 1))
    assert rhs.shape == (2, 1)
    tr = (np.eye(3)[:2].T @ y).trace()  # 3x3-ish trace path
    assert tr.coeff["Y"].shape == (6,)
