"""Command-line front end.

Commands: simulate, synthesize, experiment, koopman-demo, version. Each run
reads one JSON config document (schema in docs/config_schema.md), with a
small set of flags overriding top-level scalar keys, and writes its outputs
plus a manifest (config echo, version, seed, timestamps, sha256 of every
emitted file) into the output directory. Files are written atomically
(temp + rename) and reruns with identical config and seed produce
byte-identical CSV/JSON payload files.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, dataio
from .errors import ConfigError, CovLqrError, RankDeficient, SolverFailed
from .experiments import ExperimentConfig, run_example1, run_example2
from .koopman import (
    identify_lifted,
    lift,
    lifted_weights,
    monomial_dictionary,
    rbf_dictionary,
    rollout_closed_loop,
    simulate_nonlinear,
    synth_koopman,
)
from .lti import LtiSystem, NoiseSpec, simulate_and_collect
from .lqr import LqrWeights
from .synthesis import METHODS, SynthesisSpec, synthesize
from .systems import quad_coupled_dictionary, quad_coupled_step, unstable4

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4

OUTDIR_ENV = "COVLQR_OUT"


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def atomic_write(path: Path, writer) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


class Run:
    """Collects output files and finalizes the manifest."""

    def __init__(self, outdir: Path, config: dict):
        self.outdir = outdir
        self.config = config
        self.started = _utc_now()
        self.t0 = time.perf_counter()
        self.files: list[Path] = []
        outdir.mkdir(parents=True, exist_ok=True)

    def emit_csv(self, name: str, header: list[str], rows) -> Path:
        path = self.outdir / name
        atomic_write(path, lambda tmp: dataio.write_csv(tmp, header, rows))
        self.files.append(path)
        return path

    def emit_json(self, name: str, payload: dict) -> Path:
        path = self.outdir / name
        atomic_write(path, lambda tmp: dataio.write_json(tmp, payload))
        self.files.append(path)
        return path

    def finalize(self) -> Path:
        manifest = {
            "tool": "covlqr",
            "version": __version__,
            "config": self.config,
            "started_utc": self.started,
            "finished_utc": _utc_now(),
            "wall_seconds": round(time.perf_counter() - self.t0, 3),
            "outputs": {p.name: _sha256(p) for p in self.files},
        }
        path = self.outdir / "manifest.json"
        atomic_write(path, lambda tmp: dataio.write_json(tmp, manifest))
        return path


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise OSError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config key '<root>': not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config key '<root>': expected a JSON object")
    return cfg


def apply_overrides(cfg: dict, args, keys: list[str]) -> dict:
    out = dict(cfg)
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            out[key] = val
    return out


def resolve_outdir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUTDIR_ENV)
    return Path(env) if env else Path("covlqr-out")


def _plant_from_config(cfg: dict) -> LtiSystem:
    plant = cfg.get("plant", "unstable4")
    if plant == "unstable4":
        return unstable4()
    if isinstance(plant, dict) and "a" in plant and "b" in plant:
        return LtiSystem(a=np.array(plant["a"], dtype=float),
                         b=np.array(plant["b"], dtype=float))
    raise ConfigError(f"config key 'plant': unsupported value {plant!r}")


def _weights_from_config(cfg: dict, n: int, m: int) -> LqrWeights:
    w = cfg.get("weights", {})
    if "q" in w:
        q = np.array(w["q"], dtype=float)
    else:
        q = float(w.get("q_scale", 1.0)) * np.eye(n)
    if "r" in w:
        r = np.array(w["r"], dtype=float)
    else:
        r = float(w.get("r_scale", 1e-3)) * np.eye(m)
    return LqrWeights(q, r)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, args, ["seed", "t", "sigma_w", "sigma_x", "input_std"])
    sys_ = _plant_from_config(cfg)
    t_len = int(cfg.get("t", 10))
    noise = NoiseSpec(sigma_x=float(cfg.get("sigma_x", 1.0)),
                      sigma_w=float(cfg.get("sigma_w", 0.1)),
                      seed=int(cfg.get("seed", 0)))
    rec = simulate_and_collect(sys_, noise, float(cfg.get("input_std", 1.0)), t_len)
    outdir = resolve_outdir(args)
    run = Run(outdir, cfg)
    meta = {"seed": noise.seed, "sigma_w": noise.sigma_w, "sigma_x": noise.sigma_x,
            "input_std": float(cfg.get("input_std", 1.0))}
    run.emit_csv("data.csv", dataio.data_columns(rec.m, rec.n), dataio.record_rows(rec))
    run.emit_json("data.json", {"T": rec.t_len, "n": rec.n, "m": rec.m, **meta})
    run.finalize()
    print(f"wrote {outdir / 'data.csv'} ({rec.t_len} steps, n={rec.n}, m={rec.m})")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, args, ["method", "gamma", "data"])
    if getattr(args, "lam", None) is not None:
        cfg["lambda"] = args.lam
    method = cfg.get("method")
    if method not in METHODS:
        raise ConfigError(f"config key 'method': {method!r} not one of {METHODS}")
    data_path = cfg.get("data")
    if not data_path:
        raise ConfigError("config key 'data': path to the data CSV is required")
    rec, _meta = dataio.read_record(data_path, Path(data_path).with_suffix(".json"))
    true_sys = None
    if "plant" in cfg:
        true_sys = _plant_from_config(cfg)
    weights = _weights_from_config(cfg, rec.n, rec.m)
    spec = SynthesisSpec(method=method, weights=weights,
                         lam=float(cfg.get("lambda", 0.0)),
                         gamma=float(cfg.get("gamma", 0.0)))
    result = synthesize(spec, rec, true_sys)
    payload = {
        "method": method,
        "lambda": spec.lam,
        "gamma": spec.gamma,
        "K": dataio.matrix_to_json(result.k),
        "P": None if result.p is None else dataio.matrix_to_json(result.p),
        "cost": None if not np.isfinite(result.cost) else result.cost,
        "stabilizing": result.stabilizing,
        "diagnostics": {k: (list(v) if isinstance(v, tuple) else v)
                        for k, v in result.diagnostics.items()},
    }
    if result.certificate is not None:
        payload["certificate"] = {
            "Xi": dataio.matrix_to_json(result.certificate.xi),
            "Y": dataio.matrix_to_json(result.certificate.y),
            "P": dataio.matrix_to_json(result.certificate.p),
            "L": dataio.matrix_to_json(result.certificate.l),
        }
    outdir = resolve_outdir(args)
    run = Run(outdir, cfg)
    run.emit_json("gain.json", payload)
    run.finalize()
    print(f"method={method} stabilizing={result.stabilizing} "
          f"status={result.diagnostics.get('solver_status', 'riccati')}")
    return EXIT_OK


def _experiment_config(cfg: dict) -> ExperimentConfig:
    plant = cfg.get("plant", "unstable4")
    kwargs = {}
    if isinstance(plant, dict):
        kwargs.update(plant="custom", a=tuple(map(tuple, plant["a"])),
                      b=tuple(map(tuple, plant["b"])))
    else:
        kwargs["plant"] = plant
    for src, dst in (("t_list", "t_list"), ("sigma_w_list", "sigma_w_list"),
                     ("lambda_grid", "lambda_grid"), ("gamma_grid", "gamma_grid")):
        if src in cfg:
            kwargs[dst] = tuple(cfg[src])
    for key in ("trials", "systems", "master_seed", "workers", "n", "m"):
        if key in cfg:
            kwargs[key] = int(cfg[key])
    for key in ("q_scale", "r_scale", "sigma_x", "input_std"):
        if key in cfg:
            kwargs[key] = float(cfg[key])
    if "include_mixed" in cfg:
        kwargs["include_mixed"] = bool(cfg["include_mixed"])
    if "coeff_mode" in cfg:
        kwargs["coeff_mode"] = str(cfg["coeff_mode"])
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"config key mismatch: {exc}") from exc


def _fmt_m(value) -> str:
    if value is None or not np.isfinite(value):
        return "NR"
    return dataio.format_float(float(value))


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, args, ["trials", "systems", "master_seed", "workers"])
    exp_cfg = _experiment_config(cfg)
    outdir = resolve_outdir(args)
    run = Run(outdir, cfg)
    if args.which == "example1":
        tables = run_example1(exp_cfg)
        run.emit_csv("example1_curves.csv",
                     ["t", "sigma_w", "method", "coefficient", "s", "m", "n_trials"],
                     [[r["t"], r["sigma_w"], r["method"], dataio.format_float(r["coefficient"]),
                       dataio.format_float(r["s"]), _fmt_m(r["m"]), r["n_trials"]]
                      for r in tables["curves"]])
        run.emit_csv("example1_best.csv",
                     ["t", "sigma_w", "s_i", "coeff_s_i", "s_ii", "coeff_s_ii",
                      "m_i", "coeff_m_i", "m_ii", "coeff_m_ii", "log_s_ratio", "log_m_ratio"],
                     [[r["t"], r["sigma_w"], dataio.format_float(r["s_i"]),
                       dataio.format_float(r["coeff_s_i"]), dataio.format_float(r["s_ii"]),
                       dataio.format_float(r["coeff_s_ii"]), _fmt_m(r["m_i"]),
                       _fmt_m(r["coeff_m_i"]), _fmt_m(r["m_ii"]),
                       _fmt_m(r["coeff_m_ii"]), _fmt_m(r["log_s_ratio"]),
                       _fmt_m(r["log_m_ratio"])] for r in tables["best"]])
        if "mixed" in tables:
            run.emit_csv("example1_mixed.csv",
                         ["t", "sigma_w", "lambda", "gamma", "s", "m"],
                         [[r["t"], r["sigma_w"], dataio.format_float(r["lambda"]),
                           dataio.format_float(r["gamma"]), dataio.format_float(r["s"]),
                           _fmt_m(r["m"])] for r in tables["mixed"]])
    else:
        tables = run_example2(exp_cfg)
        run.emit_csv("example2_systems.csv",
                     ["system", "sigma_w", "coefficient", "s_i", "s_ii"],
                     [[r["system"], r["sigma_w"], dataio.format_float(r["coefficient"]),
                       dataio.format_float(r["s_i"]), dataio.format_float(r["s_ii"])]
                      for r in tables["systems"]])
        run.emit_csv("example2_counts.csv",
                     ["sigma_w", "both_zero", "i_zero_ii_pos", "i_pos_ii_zero",
                      "both_pos", "systems"],
                     [[r["sigma_w"], r["both_zero"], r["i_zero_ii_pos"],
                       r["i_pos_ii_zero"], r["both_pos"], r["systems"]]
                      for r in tables["counts"]])
        run.emit_csv("example2_hist.csv",
                     ["sigma_w", "system", "log10_ratio"],
                     [[r["sigma_w"], r["system"], dataio.format_float(r["log10_ratio"])]
                      for r in tables["hist"]])
    run.finalize()
    print(f"experiment {args.which} complete; outputs in {outdir}")
    return EXIT_OK


def _dictionary_from_config(cfg: dict):
    d_cfg = cfg.get("dictionary", {"type": "quad-demo"})
    kind = d_cfg.get("type", "quad-demo")
    if kind == "quad-demo":
        return quad_coupled_dictionary()
    if kind == "monomial":
        return monomial_dictionary(2, int(d_cfg.get("degree", 2)))
    if kind == "rbf":
        path = d_cfg.get("centers_csv")
        if not path or not Path(path).exists():
            raise ConfigError("config key 'dictionary.centers_csv': CSV file required")
        with open(path, encoding="utf-8") as fh:
            rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
        return rbf_dictionary(2, np.array(rows), float(d_cfg.get("width", 1.0)))
    raise ConfigError(f"config key 'dictionary.type': unknown value {kind!r}")


def cmd_koopman_demo(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    gamma = float(cfg.get("gamma", 1e-6))
    t_len = int(cfg.get("t", 60))
    steps = int(cfg.get("steps", 50))
    seed = int(cfg.get("seed", 3))
    rng = np.random.default_rng(seed)
    u0 = rng.standard_normal((1, t_len))
    x_init = rng.standard_normal(2)
    raw = simulate_nonlinear(quad_coupled_step, x_init, u0)
    lift_dict = _dictionary_from_config(cfg)
    lifted = lift(raw, lift_dict)
    _, residual = identify_lifted(lifted)
    weights = lifted_weights(lift_dict, np.eye(2), np.eye(1))
    result = synth_koopman(lifted, weights, gamma)
    traj = rollout_closed_loop(quad_coupled_step, lift_dict, result.k,
                               np.array([1.0, 1.0]), steps)
    norms = np.linalg.norm(traj, axis=0)
    outdir = resolve_outdir(args)
    run = Run(outdir, cfg)
    run.emit_csv("koopman_rollout.csv", ["k", "x1", "x2", "norm"],
                 [[k, dataio.format_float(float(traj[0, k])),
                   dataio.format_float(float(traj[1, k])),
                   dataio.format_float(float(norms[k]))]
                  for k in range(traj.shape[1])])
    run.emit_json("koopman_summary.json", {
        "gamma": gamma,
        "lifted_model_residual": residual,
        "K": dataio.matrix_to_json(result.k),
        "final_norm": float(norms[-1]),
        "steps": steps,
    })
    run.finalize()
    print(f"koopman demo: lifted residual {residual:.2e}, |x({steps})| = {norms[-1]:.4e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covlqr",
                                     description="data-driven LQR synthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="collect one experiment to CSV + sidecar")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--t", type=int)
    sim.add_argument("--sigma-w", dest="sigma_w", type=float)
    sim.add_argument("--sigma-x", dest="sigma_x", type=float)
    sim.add_argument("--input-std", dest="input_std", type=float)
    sim.set_defaults(fn=cmd_simulate)

    syn = sub.add_parser("synthesize", help="synthesize a gain from a data file")
    syn.add_argument("--config", required=True)
    syn.add_argument("--out")
    syn.add_argument("--method", choices=METHODS)
    syn.add_argument("--gamma", type=float)
    syn.add_argument("--lambda", dest="lam", type=float)
    syn.add_argument("--data")
    syn.set_defaults(fn=cmd_synthesize)

    exp = sub.add_parser("experiment", help="run a Monte Carlo study")
    exp.add_argument("which", choices=["example1", "example2"])
    exp.add_argument("--config", required=True)
    exp.add_argument("--out")
    exp.add_argument("--trials", type=int)
    exp.add_argument("--systems", type=int)
    exp.add_argument("--master-seed", dest="master_seed", type=int)
    exp.add_argument("--workers", type=int)
    exp.set_defaults(fn=cmd_experiment)

    koop = sub.add_parser("koopman-demo", help="lifted synthesis on the quadratic plant")
    koop.add_argument("--config")
    koop.add_argument("--out")
    koop.set_defaults(fn=cmd_koopman_demo)

    ver = sub.add_parser("version", help="print the tool version")
    ver.set_defaults(fn=lambda args: print(__version__) or EXIT_OK)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args) or EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailed, RankDeficient) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CovLqrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
