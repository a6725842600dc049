"""Benchmark the numba counting kernels against the pure-numpy fallback.

Runs the three Monte Carlo estimators on the polarization scenario with both
backends, verifies the counts are bit-identical, and reports wall times.

    python benchmarks/bench_backends.py [--trials N] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from ctxval.backend import HAVE_NUMBA, force_backend
from ctxval.montecarlo import (
    RunConfig,
    empirical_average,
    empirical_conditioned_average,
    empirical_moment,
)
from ctxval.operators import SIGMA_Z, pure_state_density, spectral_decompose
from ctxval.scenarios import (
    polarization_conditioned_setup,
    polarization_context,
    psi_state,
)
from ctxval.solver import solve_contextual_values


def build_workloads(trials, seed):
    gamma = math.sqrt(0.75)
    ctx = polarization_context(gamma)
    sol = solve_contextual_values(spectral_decompose(SIGMA_Z), ctx)
    setup = polarization_conditioned_setup(gamma, sol.alpha0)
    rho = pure_state_density(psi_state(1.1))
    cfg = RunConfig(trials=trials, seed=seed)
    return {
        "unconditioned": lambda: empirical_average(sol.alpha0, ctx, rho, cfg),
        "conditioned": lambda: empirical_conditioned_average(setup, rho, cfg),
        "moment n=3": lambda: empirical_moment(sol.alpha0, ctx, rho, 3, cfg),
    }


def time_backend(workloads, use_numba, repeats):
    force_backend(use_numba)
    try:
        results = {}
        for name, fn in workloads.items():
            fn()  # warmup (jit compilation, caches)
            times = []
            last = None
            for _ in range(repeats):
                t0 = time.perf_counter()
                last = fn()
                times.append(time.perf_counter() - t0)
            results[name] = (np.mean(times), np.std(times), last)
        return results
    finally:
        force_backend(None)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    workloads = build_workloads(args.trials, args.seed)
    numpy_res = time_backend(workloads, use_numba=False, repeats=args.repeats)
    if not HAVE_NUMBA:
        print("numba not available; timing the numpy fallback only")
        for name, (mean, std, _) in numpy_res.items():
            print(f"{name:>14}: numpy {mean * 1e3:8.2f} +- {std * 1e3:.2f} ms")
        return
    numba_res = time_backend(workloads, use_numba=True, repeats=args.repeats)

    print(f"trials = {args.trials}, repeats = {args.repeats}")
    print(f"{'workload':>14} {'numpy (ms)':>14} {'numba (ms)':>14} {'speedup':>8}")
    for name in workloads:
        np_mean, np_std, np_last = numpy_res[name]
        nb_mean, nb_std, nb_last = numba_res[name]
        assert np_last.counts.tobytes() == nb_last.counts.tobytes(), (
            f"{name}: backends disagree"
        )
        print(
            f"{name:>14} {np_mean * 1e3:9.2f}+-{np_std * 1e3:4.2f}"
            f" {nb_mean * 1e3:9.2f}+-{nb_std * 1e3:4.2f}"
            f" {np_mean / nb_mean:7.2f}x"
        )
    print("counts identical across backends for every workload")


if __name__ == "__main__":
    main()
