"""Benchmark: compiled kernels vs the pure-numpy fallbacks.

Times the three kernel families (svec/smat, symkron, rollout) under both
backends, then an end-to-end synthesis solve. The backend is chosen at
import time, so the script re-executes itself with
COVLQR_FORCE_PYTHON_KERNELS=1 to collect the fallback numbers.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def measure() -> dict:
    from covlqr import kernels
    from covlqr.lqr import LqrWeights
    from covlqr.lti import NoiseSpec, covariances, simulate_and_collect
    from covlqr.synthesis import synth_direct_ridge
    from covlqr.systems import unstable4

    rng = np.random.default_rng(0)
    out = {"backend": kernels.BACKEND}

    def best_of(fn, repeats=5, inner=200):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            for _ in range(inner):
                fn()
            times.append((time.perf_counter() - t0) / inner)
        return min(times) * 1e6  # microseconds

    for d in (5, 8, 15):
        r = rng.standard_normal((d, d))
        m = rng.standard_normal((d, d))
        m = m + m.T
        v = kernels.svec(m)
        out[f"symkron_{d}x{d}_us"] = best_of(lambda: kernels.symkron(r))
        out[f"svec_{d}x{d}_us"] = best_of(lambda: kernels.svec(m))
        out[f"smat_{d}x{d}_us"] = best_of(lambda: kernels.smat(v, d))

    a = 0.95 * rng.standard_normal((4, 4)) / 2
    b = rng.standard_normal((4, 1))
    x0 = rng.standard_normal(4)
    u = rng.standard_normal((1, 200))
    w = rng.standard_normal((4, 200))
    out["rollout_T200_us"] = best_of(lambda: kernels.rollout(a, b, x0, u, w), inner=100)

    sys_ = unstable4()
    weights = LqrWeights(np.eye(4), 1e-3 * np.eye(1))
    rec = simulate_and_collect(sys_, NoiseSpec(1.0, 0.1, 7), 1.0, 10)
    cov = covariances(rec, 0.05)
    t0 = time.perf_counter()
    n_solves = 10
    for _ in range(n_solves):
        synth_direct_ridge(cov, weights, sys_)
    out["ridge_solve_ms"] = (time.perf_counter() - t0) / n_solves * 1e3
    return out


def main():
    if os.environ.get("_COVLQR_BENCH_CHILD"):
        print(json.dumps(measure()))
        return
    here = measure()
    env = dict(os.environ, COVLQR_FORCE_PYTHON_KERNELS="1", _COVLQR_BENCH_CHILD="1")
    child = subprocess.run([sys.executable, os.path.abspath(__file__)],
                           env=env, capture_output=True, text=True, check=True)
    other = json.loads(child.stdout.strip().splitlines()[-1])
    native, python = (here, other) if here["backend"] == "native" else (other, here)
    print(f"{'kernel':24s} {'native':>12s} {'python':>12s} {'speedup':>9s}")
    for key in sorted(k for k in native if k != "backend"):
        n_val, p_val = native[key], python[key]
        print(f"{key:24s} {n_val:12.2f} {p_val:12.2f} {p_val / n_val:8.2f}x")


if __name__ == "__main__":
    main()
