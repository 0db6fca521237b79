import math

import numpy as np
import pytest

from covlqr.errors import ConfigError, EmptyInput
from covlqr.experiments import (
    COEFF_GRID,
    ExperimentConfig,
    TrialOutcome,
    run_example1,
    run_example2,
    summarize,
)


def outcome(trial, stab, gap, method="II", lam=0.0, gamma=0.1):
    return TrialOutcome(trial, method, lam, gamma, stab,
                        gap if stab else float("inf"), "optimal", 0.0)


class TestSummarize:
    def test_all_stabilizing(self):
        stats = summarize([outcome(0, True, 0.1), outcome(1, True, 0.2),
                           outcome(2, True, 0.3)])
        assert stats.s == 100.0
        assert stats.m == pytest.approx(0.2)

    def test_half_nonstabilizing_gives_nr(self):
        outs = [outcome(i, True, 0.1) for i in range(2)] + \
               [outcome(i, False, None) for i in range(2, 4)]
        stats = summarize(outs)
        assert stats.s == 50.0
        assert not stats.m_reported

    def test_single_trial(self):
        stats = summarize([outcome(0, True, 0.0)])
        assert stats.s == 100.0 and stats.m == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            summarize([])

    def test_invariant_enforced(self):
        with pytest.raises(ConfigError):
            TrialOutcome(0, "II", 0.0, 0.1, False, 1.0, "optimal", 0.0)


class TestConfig:
    def test_grid_default_matches_coefficients(self):
        assert COEFF_GRID[0] == 0.0
        assert COEFF_GRID[-1] == pytest.approx(1.0)
        assert len(COEFF_GRID) == 16

    def test_validation(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(trials=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(t_list=())
        with pytest.raises(ConfigError):
            ExperimentConfig(plant="nope").resolve_plant()


@pytest.fixture(scope="module")
def quick_cfg():
    return ExperimentConfig(plant="unstable4", t_list=(10,), sigma_w_list=(0.1,),
                            lambda_grid=(0.0, 0.05), gamma_grid=(0.02, 0.05),
                            trials=4, master_seed=77)


@pytest.fixture(scope="module")
def quick_tables(quick_cfg):
    return run_example1(quick_cfg)


class TestExample1:
    def test_has_expected_rows(self, quick_cfg, quick_tables):
        assert len(quick_tables["curves"]) == 4  # 2 lambdas + 2 gammas
        assert len(quick_tables["best"]) == 1
        for row in quick_tables["curves"]:
            assert row["n_trials"] == quick_cfg.trials
            assert 0.0 <= row["s"] <= 100.0

    def test_deterministic_rerun(self, quick_cfg, quick_tables):
        again = run_example1(quick_cfg)
        assert again == quick_tables

    def test_worker_pool_size_invariance(self, quick_cfg, quick_tables):
        cfg2 = ExperimentConfig(**{**quick_cfg.__dict__, "workers": 2})
        assert run_example1(cfg2) == quick_tables

    def test_methods_share_per_trial_data(self):
        # lambda = 0 and gamma = 0 are the same program on the same record,
        # so the per-coefficient summaries must coincide exactly
        cfg = ExperimentConfig(plant="unstable4", t_list=(10,), sigma_w_list=(0.1,),
                               lambda_grid=(0.0,), gamma_grid=(0.0,),
                               trials=5, master_seed=31)
        rows = {r["method"]: r for r in run_example1(cfg)["curves"]}
        assert rows["I"]["s"] == rows["II"]["s"]
        assert rows["I"]["m"] == rows["II"]["m"]

    def test_noiseless_single_trial_perfect(self):
        cfg = ExperimentConfig(plant="unstable4", t_list=(20,), sigma_w_list=(0.0,),
                               lambda_grid=(0.0,), gamma_grid=(0.0,),
                               trials=1, master_seed=5)
        tables = run_example1(cfg)
        for row in tables["curves"]:
            assert row["s"] == 100.0
            assert row["m"] <= 1e-6

    def test_mixed_table_present_when_enabled(self):
        cfg = ExperimentConfig(plant="unstable4", t_list=(10,), sigma_w_list=(0.1,),
                               lambda_grid=(0.05,), gamma_grid=(0.05,),
                               trials=2, master_seed=9, include_mixed=True)
        tables = run_example1(cfg)
        assert "mixed" in tables and len(tables["mixed"]) == 1
        row = tables["mixed"][0]
        assert row["lambda"] == 0.05 and row["gamma"] == 0.05


class TestExample2:
    def test_quick_run_structure(self):
        cfg = ExperimentConfig(plant="random", n=3, m=1, t_list=(10,),
                               sigma_w_list=(0.1,), trials=3, systems=5,
                               master_seed=11)
        tables = run_example2(cfg)
        assert len(tables["systems"]) == 5
        counts = tables["counts"][0]
        assert counts["both_zero"] + counts["i_zero_ii_pos"] \
            + counts["i_pos_ii_zero"] + counts["both_pos"] == 5
        for row in tables["hist"]:
            assert math.isfinite(row["log10_ratio"])

    def test_systems_shared_across_noise_levels(self):
        cfg = ExperimentConfig(plant="random", n=3, m=1, t_list=(10,),
                               sigma_w_list=(0.1, 0.5), trials=2, systems=3,
                               master_seed=13, coeff_mode="per-system")
        tables = run_example2(cfg)
        lo = [r for r in tables["systems"] if r["sigma_w"] == 0.1]
        hi = [r for r in tables["systems"] if r["sigma_w"] == 0.5]
        assert [r["coefficient"] for r in lo] == [r["coefficient"] for r in hi]

    def test_coeff_modes_differ(self):
        base = dict(plant="random", n=3, m=1, t_list=(10,), sigma_w_list=(0.1,),
                    trials=3, systems=2, master_seed=13)
        per_trial = run_example2(ExperimentConfig(**base, coeff_mode="per-trial"))
        per_system = run_example2(ExperimentConfig(**base, coeff_mode="per-system"))
        a = [r["coefficient"] for r in per_trial["systems"]]
        b = [r["coefficient"] for r in per_system["systems"]]
        assert a != b

    def test_requires_random_plant(self):
        with pytest.raises(ConfigError):
            run_example2(ExperimentConfig(plant="unstable4"))
        with pytest.raises(ConfigError):
            run_example2(ExperimentConfig(plant="random", coeff_mode="sometimes"))
