import json

import numpy as np
import pytest

from covlqr.kernels import smat, svec
from covlqr.sdp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    SdpProblem,
    problem_to_json,
    solve,
    verify_solution,
)

SQ2 = np.sqrt(2.0)


def lp_as_sdp():
    """min x s.t. x >= 1, via the 1x1 block X = x - 1."""
    return SdpProblem([1], 0, [np.array([[1.0]])], np.zeros(0),
                      np.zeros((0, 1)), np.zeros((0, 0)), np.zeros(0), obj_offset=1.0)


def t_norm_problem():
    """min t s.t. [[t, 1], [1, t]] >= 0; optimum t = 1."""
    a_psd = np.array([[1.0, 0, 0], [0, 1 / SQ2, 0], [0, 0, 1.0]])
    a_free = np.array([[-1.0], [0.0], [-1.0]])
    b = np.array([0.0, 1.0, 0.0])
    return SdpProblem([2], 1, [np.zeros((2, 2))], np.array([1.0]), a_psd, a_free, b)


def min_eig_problem():
    """max lam s.t. diag(3, 5) - lam I >= 0; optimum lam = 3."""
    a_psd = np.array([[1.0, 0, 0], [0, 1 / SQ2, 0], [0, 0, 1.0]])
    a_free = np.array([[1.0], [0.0], [1.0]])
    b = np.array([3.0, 0.0, 5.0])
    return SdpProblem([2], 1, [np.zeros((2, 2))], np.array([-1.0]), a_psd, a_free, b)


def random_feasible_problem(rng):
    """Strictly feasible primal and dual by construction (bounded, solvable)."""
    dims = list(rng.integers(1, 7, size=rng.integers(1, 4)))
    nf = int(rng.integers(0, 4))
    ntri = sum(d * (d + 1) // 2 for d in dims)
    p = int(rng.integers(1, ntri + nf + 1))
    a_psd = rng.standard_normal((p, ntri))
    a_free = rng.standard_normal((p, nf))
    u0 = []
    for d in dims:
        m = rng.standard_normal((d, d))
        u0.append(svec(m @ m.T + 0.5 * np.eye(d)))
    b = a_psd @ np.concatenate(u0) + a_free @ rng.standard_normal(nf)
    y0 = rng.standard_normal(p)
    cs, off = [], 0
    for d in dims:
        m = rng.standard_normal((d, d))
        tri_d = d * (d + 1) // 2
        cs.append(smat((a_psd.T @ y0)[off:off + tri_d], d) + m @ m.T + 0.5 * np.eye(d))
        off += tri_d
    return SdpProblem(dims, nf, cs, a_free.T @ y0, a_psd, a_free, b)


class TestReferenceProblems:
    def test_lp_as_sdp(self):
        sol = solve(lp_as_sdp(), tol=1e-9)
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(1.0, abs=1e-7)

    def test_t_norm(self):
        sol = solve(t_norm_problem(), tol=1e-9)
        assert sol.status == OPTIMAL
        assert sol.free[0] == pytest.approx(1.0, abs=1e-7)

    def test_min_eig(self):
        sol = solve(min_eig_problem(), tol=1e-9)
        assert sol.status == OPTIMAL
        assert sol.free[0] == pytest.approx(3.0, abs=1e-7)


class TestRandomized:
    def test_twenty_verified_sdps(self):
        rng = np.random.default_rng(42)
        for trial in range(20):
            prob = random_feasible_problem(rng)
            sol = solve(prob, tol=1e-9, max_iter=200)
            assert sol.status == OPTIMAL, (trial, sol.status, sol.message)
            report = verify_solution(prob, sol, tol=1e-8)
            assert report["ok"], (trial, report)
            assert max(sol.kkt) <= 1e-8

    def test_scaling_invariance(self):
        prob = t_norm_problem()
        base = solve(prob, tol=1e-10)
        scaled = SdpProblem(prob.block_dims, prob.n_free,
                            [7.5 * c for c in prob.c_blocks], 7.5 * prob.c_free,
                            prob.a_psd, prob.a_free, prob.b)
        other = solve(scaled, tol=1e-10)
        assert np.abs(base.free - other.free).max() <= 1e-6


class TestStatuses:
    def test_infeasible_detected(self):
        prob = SdpProblem([1], 0, [np.zeros((1, 1))], np.zeros(0),
                          np.array([[1.0]]), np.zeros((1, 0)), np.array([-1.0]))
        sol = solve(prob, tol=1e-9)
        assert sol.status == INFEASIBLE
        assert sol.certificate["kind"] == "primal_infeasible"

    def test_unbounded_detected(self):
        prob = SdpProblem([1], 0, [np.array([[-1.0]])], np.zeros(0),
                          np.zeros((0, 1)), np.zeros((0, 0)), np.zeros(0))
        sol = solve(prob, tol=1e-9)
        assert sol.status == UNBOUNDED

    def test_unbounded_free_direction(self):
        prob = SdpProblem([1], 1, [np.zeros((1, 1))], np.array([-1.0]),
                          np.array([[1.0]]), np.array([[-1.0]]), np.array([0.0]))
        sol = solve(prob, tol=1e-9)
        assert sol.status == UNBOUNDED


def test_debug_dump_round_trips():
    prob = t_norm_problem()
    payload = json.loads(problem_to_json(prob))
    assert payload["block_dims"] == [2]
    assert payload["n_free"] == 1
    rebuilt = SdpProblem(payload["block_dims"], payload["n_free"],
                         [np.array(c) for c in payload["objective"]["blocks"]],
                         np.array(payload["objective"]["free"]),
                         np.array(payload["equalities"]["a_psd_svec"]),
                         np.array(payload["equalities"]["a_free"]),
                         np.array(payload["equalities"]["rhs"]),
                         obj_offset=payload["objective"]["offset"])
    sol = solve(rebuilt, tol=1e-9)
    assert sol.free[0] == pytest.approx(1.0, abs=1e-7)
