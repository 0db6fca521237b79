"""Monte Carlo harness comparing the regularized synthesis methods.

Two studies ship with the package:

* ``run_example1`` - a fixed benchmark plant, sweeps of the two
  regularization coefficients (the covariance-regularizer weight for
  Method I, the ridge shift for Method II), stabilizing percentage S and
  median optimality gap M per coefficient, best-coefficient summaries and
  their log ratios across a (T, sigma_w) grid, plus an optional sweep of
  the mixed two-coefficient method.
* ``run_example2`` - many random plants, a coefficient drawn from (0, 1)
  per trial (or once per plant, see ``coeff_mode``) and shared by both
  methods, per-plant S for each method, the 2x2 zero/nonzero count table
  over noise levels, and the log10(S_II/S_I) histogram values.

Reproducibility: every trial derives its generator from
SeedSequence(master_seed, spawn_key=(study, cell, trial)), so results are
bit-identical for a given config at any worker-pool size; the reduction
orders outcomes by task index, never by completion time.

Medians treat non-stabilizing trials as +inf; a median that is itself
non-finite is reported as NR ("no median reported"), which happens exactly
when S <= 50.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError, EmptyInput, RankDeficient, SolverFailed, TrajectoryDiverged
from .lti import LtiSystem, NoiseSpec, covariances, simulate_and_collect
from .lqr import LqrWeights, dare_solve, optimality_gap
from .synthesis import synth_direct_cov, synth_direct_mixed, synth_direct_ridge
from .systems import random_system, unstable4

COEFF_GRID = tuple(v * 1e-2 for v in
                   (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 40, 50, 100))

METHOD_I = "I"      # covariance regularizer, coefficient = lambda
METHOD_II = "II"    # ridge shift, coefficient = gamma
METHOD_MIXED = "mixed"


@dataclass(frozen=True)
class ExperimentConfig:
    plant: str = "unstable4"                 # "unstable4" | "random" | "custom"
    a: tuple = ()                            # custom plant rows
    b: tuple = ()
    n: int = 3                               # random-plant dimensions
    m: int = 1
    t_list: tuple[int, ...] = (10,)
    sigma_w_list: tuple[float, ...] = (0.1,)
    lambda_grid: tuple[float, ...] = COEFF_GRID
    gamma_grid: tuple[float, ...] = COEFF_GRID
    trials: int = 100
    systems: int = 200
    master_seed: int = 20240
    q_scale: float = 1.0
    r_scale: float = 1e-3
    sigma_x: float = 1.0
    input_std: float = 1.0
    workers: int = 1
    include_mixed: bool = False
    # how the random-plant study draws its regularization coefficient:
    # "per-trial" redraws it every trial, "per-system" fixes one draw per
    # plant; only per-trial sampling reproduces the published count asymmetry
    coeff_mode: str = "per-trial"

    def __post_init__(self):
        if self.trials < 1 or self.systems < 1:
            raise ConfigError("trials and systems must be >= 1")
        if not self.t_list or not self.sigma_w_list:
            raise ConfigError("t_list and sigma_w_list must be nonempty")
        if not self.lambda_grid or not self.gamma_grid:
            raise ConfigError("coefficient grids must be nonempty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def resolve_plant(self) -> LtiSystem:
        if self.plant == "unstable4":
            return unstable4()
        if self.plant == "custom":
            if not self.a or not self.b:
                raise ConfigError("custom plant requires 'a' and 'b' matrices")
            return LtiSystem(a=np.array(self.a, dtype=float),
                             b=np.array(self.b, dtype=float))
        raise ConfigError(f"config key 'plant': unknown value {self.plant!r}")

    def weights_for(self, n: int, m: int) -> LqrWeights:
        return LqrWeights(self.q_scale * np.eye(n), self.r_scale * np.eye(m))


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    method: str
    lam: float
    gamma: float
    stabilizing: bool
    gap: float
    status: str
    wall: float

    def __post_init__(self):
        if not self.stabilizing and math.isfinite(self.gap):
            raise ConfigError("non-stabilizing outcomes must carry an infinite gap")


@dataclass(frozen=True)
class SummaryStats:
    n: int
    s: float                  # stabilizing percentage in [0, 100]
    m: float                  # median gap; inf encodes NR
    q1: float
    q3: float
    status_counts: dict[str, int]

    @property
    def m_reported(self) -> bool:
        return math.isfinite(self.m)


def summarize(outcomes: Iterable[TrialOutcome]) -> SummaryStats:
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInput("cannot summarize zero outcomes")
    gaps = np.array([o.gap for o in outcomes])
    stab = np.array([o.stabilizing for o in outcomes])
    counts: dict[str, int] = {}
    for o in outcomes:
        counts[o.status] = counts.get(o.status, 0) + 1
    med = float(np.median(gaps))
    # nearest-rank quartiles avoid inf-inf interpolation on failed trials
    q1, q3 = np.percentile(gaps, [25, 75], method="nearest")
    return SummaryStats(
        n=len(outcomes),
        s=100.0 * float(np.mean(stab)),
        m=med,
        q1=float(q1),
        q3=float(q3),
        status_counts=counts,
    )


def _trial_seed(master: int, study: int, cell: int, trial: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(study, cell, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def _gap_or_inf(sys, weights, result, kstar) -> tuple[bool, float]:
    stab = bool(result.stabilizing)
    if not stab:
        return False, float("inf")
    return True, optimality_gap(sys, weights, result.k, kstar)


def _ex1_trial(args) -> list[TrialOutcome]:
    (a, b, t_len, sigma_w, sigma_x, input_std, q, r,
     lambda_grid, gamma_grid, mixed_pairs, seed, trial_idx, kstar) = args
    sys = LtiSystem(a=a, b=b)
    weights = LqrWeights(q, r)
    outcomes: list[TrialOutcome] = []

    def record(method, lam, gamma, fn):
        start = time.perf_counter()
        try:
            result = fn()
            stab, gap = _gap_or_inf(sys, weights, result, kstar)
            status = result.diagnostics.get("solver_status", "optimal")
        except (SolverFailed, RankDeficient, TrajectoryDiverged) as exc:
            stab, gap = False, float("inf")
            status = getattr(exc, "status", None) or type(exc).__name__.lower()
        outcomes.append(TrialOutcome(trial_idx, method, lam, gamma, stab, gap,
                                     status, time.perf_counter() - start))

    try:
        rec = simulate_and_collect(sys, NoiseSpec(sigma_x, sigma_w, seed), input_std, t_len)
    except TrajectoryDiverged:
        for lam in lambda_grid:
            outcomes.append(TrialOutcome(trial_idx, METHOD_I, lam, 0.0, False,
                                         float("inf"), "trajectorydiverged", 0.0))
        for gamma in gamma_grid:
            outcomes.append(TrialOutcome(trial_idx, METHOD_II, 0.0, gamma, False,
                                         float("inf"), "trajectorydiverged", 0.0))
        return outcomes

    cov0 = covariances(rec, 0.0)
    for lam in lambda_grid:
        record(METHOD_I, lam, 0.0,
               lambda lam=lam: synth_direct_cov(cov0, weights, lam, true_sys=sys))
    for gamma in gamma_grid:
        cov = covariances(rec, gamma)
        record(METHOD_II, 0.0, gamma,
               lambda cov=cov: synth_direct_ridge(cov, weights, true_sys=sys))
    for lam, gamma in mixed_pairs:
        cov = covariances(rec, gamma)
        record(METHOD_MIXED, lam, gamma,
               lambda cov=cov, lam=lam: synth_direct_mixed(cov, weights, lam, true_sys=sys))
    return outcomes


def _run_tasks(tasks, worker, workers: int):
    if workers == 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=1))


def run_example1(cfg: ExperimentConfig) -> dict[str, list[dict]]:
    """Coefficient sweeps on a fixed plant; returns the result tables."""
    sys = cfg.resolve_plant()
    weights = cfg.weights_for(sys.n, sys.m)
    _, kstar = dare_solve(sys, weights)
    mixed_pairs = tuple((lam, gamma) for lam in cfg.lambda_grid
                        for gamma in cfg.gamma_grid) if cfg.include_mixed else ()

    curves: list[dict] = []
    best: list[dict] = []
    mixed_rows: list[dict] = []
    for cell, (t_len, sigma_w) in enumerate(
            [(t, s) for t in cfg.t_list for s in cfg.sigma_w_list]):
        tasks = [
            (sys.a, sys.b, t_len, sigma_w, cfg.sigma_x, cfg.input_std,
             weights.q, weights.r, cfg.lambda_grid, cfg.gamma_grid, mixed_pairs,
             _trial_seed(cfg.master_seed, 1, cell, k), k, kstar)
            for k in range(cfg.trials)
        ]
        per_trial = _run_tasks(tasks, _ex1_trial, cfg.workers)
        outcomes = [o for trial in per_trial for o in trial]

        def cell_summary(method, lam, gamma):
            sel = [o for o in outcomes if o.method == method
                   and o.lam == lam and o.gamma == gamma]
            return summarize(sel)

        series = {}
        for lam in cfg.lambda_grid:
            series[(METHOD_I, lam)] = cell_summary(METHOD_I, lam, 0.0)
        for gamma in cfg.gamma_grid:
            series[(METHOD_II, gamma)] = cell_summary(METHOD_II, 0.0, gamma)
        for (method, coeff), stats in series.items():
            curves.append({
                "t": t_len, "sigma_w": sigma_w, "method": method,
                "coefficient": coeff, "s": stats.s, "m": stats.m,
                "n_trials": stats.n,
            })
        for (lam, gamma) in mixed_pairs:
            stats = cell_summary(METHOD_MIXED, lam, gamma)
            mixed_rows.append({
                "t": t_len, "sigma_w": sigma_w, "lambda": lam, "gamma": gamma,
                "s": stats.s, "m": stats.m,
            })

        best.append(_best_row(t_len, sigma_w, series, cfg))

    tables = {"curves": curves, "best": best}
    if cfg.include_mixed:
        tables["mixed"] = mixed_rows
    return tables


def _best_row(t_len, sigma_w, series, cfg) -> dict:
    """Best-coefficient summary: max S and min M independently per method."""
    def best_for(method, grid):
        stats = [(coeff, series[(method, coeff)]) for coeff in grid]
        s_best = max(stats, key=lambda cs: (cs[1].s, -cs[0]))
        finite = [(c, st) for c, st in stats if st.m_reported]
        if finite:
            m_best = min(finite, key=lambda cs: (cs[1].m, cs[0]))
        else:
            m_best = (None, None)
        return s_best, m_best

    (s_i_c, s_i), (m_i_c, m_i_stats) = best_for(METHOD_I, cfg.lambda_grid)
    (s_ii_c, s_ii), (m_ii_c, m_ii_stats) = best_for(METHOD_II, cfg.gamma_grid)
    m_i = m_i_stats.m if m_i_stats else float("inf")
    m_ii = m_ii_stats.m if m_ii_stats else float("inf")

    # undefined ratios are stored as None (rendered NR downstream); ratios
    # against a zero or unreported baseline stay None rather than +-inf
    if s_i.s > 0 and s_ii.s > 0:
        log_s = math.log(s_ii.s / s_i.s)
    else:
        log_s = None
    if math.isfinite(m_i) and math.isfinite(m_ii) and m_i > 0 and m_ii > 0:
        log_m = math.log(m_i / m_ii)
    else:
        log_m = None
    return {
        "t": t_len, "sigma_w": sigma_w,
        "s_i": s_i.s, "coeff_s_i": s_i_c,
        "s_ii": s_ii.s, "coeff_s_ii": s_ii_c,
        "m_i": m_i, "coeff_m_i": m_i_c,
        "m_ii": m_ii, "coeff_m_ii": m_ii_c,
        "log_s_ratio": log_s, "log_m_ratio": log_m,
    }


def _ex2_system(args) -> dict:
    (n, m, t_len, sigma_w, sigma_x, input_std, q, r,
     sys_seed, trial_seeds, coeffs, sys_idx) = args
    rng = np.random.default_rng(sys_seed)
    sys = random_system(n, m, rng)
    weights = LqrWeights(q, r)
    stab_i = stab_ii = 0
    n_trials = len(trial_seeds)
    for seed, coeff in zip(trial_seeds, coeffs):
        try:
            rec = simulate_and_collect(sys, NoiseSpec(sigma_x, sigma_w, seed),
                                       input_std, t_len)
        except TrajectoryDiverged:
            continue
        try:
            res = synth_direct_cov(covariances(rec, 0.0), weights, coeff, true_sys=sys)
            if res.stabilizing:
                stab_i += 1
        except (SolverFailed, RankDeficient):
            pass
        try:
            res = synth_direct_ridge(covariances(rec, coeff), weights, true_sys=sys)
            if res.stabilizing:
                stab_ii += 1
        except (SolverFailed, RankDeficient):
            pass
    return {
        "system": sys_idx, "sigma_w": sigma_w, "coefficient": float(np.mean(coeffs)),
        "s_i": 100.0 * stab_i / n_trials, "s_ii": 100.0 * stab_ii / n_trials,
    }


def run_example2(cfg: ExperimentConfig) -> dict[str, list[dict]]:
    """Random-plant study; returns per-system, counts, and histogram tables."""
    if cfg.plant != "random":
        raise ConfigError("config key 'plant': example2 requires 'random'")
    if cfg.coeff_mode not in ("per-trial", "per-system"):
        raise ConfigError("config key 'coeff_mode': use 'per-trial' or 'per-system'")
    weights = cfg.weights_for(cfg.n, cfg.m)
    sys_rows: list[dict] = []
    for sig_idx, sigma_w in enumerate(cfg.sigma_w_list):
        tasks = []
        for s_idx in range(cfg.systems):
            # the plant (and, in per-system mode, its coefficient) is drawn
            # independently of the noise level, so all noise levels see
            # identical systems
            sys_seed = _trial_seed(cfg.master_seed, 2, 0, s_idx)
            trial_seeds = [_trial_seed(cfg.master_seed, 4, sig_idx * cfg.systems + s_idx, k)
                           for k in range(cfg.trials)]
            if cfg.coeff_mode == "per-system":
                coeff_rng = np.random.default_rng(_trial_seed(cfg.master_seed, 3, 0, s_idx))
                coeffs = [float(coeff_rng.uniform(0.0, 1.0))] * cfg.trials
            else:
                coeffs = [float(np.random.default_rng(
                    _trial_seed(cfg.master_seed, 5, sig_idx * cfg.systems + s_idx, k)
                ).uniform(0.0, 1.0)) for k in range(cfg.trials)]
            tasks.append((cfg.n, cfg.m, cfg.t_list[0], sigma_w, cfg.sigma_x,
                          cfg.input_std, weights.q, weights.r, sys_seed,
                          trial_seeds, coeffs, s_idx))
        sys_rows.extend(_run_tasks(tasks, _ex2_system, cfg.workers))

    counts = []
    hist = []
    for sigma_w in cfg.sigma_w_list:
        rows = [r for r in sys_rows if r["sigma_w"] == sigma_w]
        counts.append({
            "sigma_w": sigma_w,
            "both_zero": sum(1 for r in rows if r["s_i"] == 0 and r["s_ii"] == 0),
            "i_zero_ii_pos": sum(1 for r in rows if r["s_i"] == 0 and r["s_ii"] > 0),
            "i_pos_ii_zero": sum(1 for r in rows if r["s_i"] > 0 and r["s_ii"] == 0),
            "both_pos": sum(1 for r in rows if r["s_i"] > 0 and r["s_ii"] > 0),
            "systems": len(rows),
        })
        for r in rows:
            if r["s_i"] > 0 and r["s_ii"] > 0:
                hist.append({"sigma_w": sigma_w, "system": r["system"],
                             "log10_ratio": math.log10(r["s_ii"] / r["s_i"])})
    return {"systems": sys_rows, "counts": counts, "hist": hist}
