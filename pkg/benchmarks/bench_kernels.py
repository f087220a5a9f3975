"""Timing comparison of the compiled and pure-numpy kernel backends.

The backend is chosen once at import time from CROSSING_KIT_BACKEND, so
each measurement runs in a subprocess with the flag set. Workloads cover
the two places the kernels matter: the cumulative quadrature behind the
series solver, and the right-hand sides driving the adaptive integrators.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("cum_quad6", "neumann_solve", "ode_oracle", "schrodinger_ode")


def _time_workload(name: str, repeats: int) -> float:
    import numpy as np

    from crossing_kit._kernels import cum_quad6
    from crossing_kit.normalform import model_corpus, neumann_solve, ode_oracle
    from crossing_kit.schrodinger import schrodinger_corpus, solve_schrodinger_ode

    if name == "cum_quad6":
        rng = np.random.default_rng(0)
        data = rng.standard_normal(1 << 20) + 1j * rng.standard_normal(1 << 20)

        def job():
            cum_quad6(data, 1e-5)

    elif name == "neumann_solve":
        prob = model_corpus(1e-3)[0]

        def job():
            neumann_solve(prob, (1.0, 0.0), terms=8)

    elif name == "ode_oracle":
        prob = model_corpus(1e-2)[0]

        def job():
            ode_oracle(prob, (1.0, 0.0))

    else:
        prob = schrodinger_corpus(5e-3)[0]

        def job():
            solve_schrodinger_ode(prob, (1.0, 0.0, 0.0, 0.0))

    job()  # warmup: triggers any jit compilation outside the timed region
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        job()
        best = min(best, time.perf_counter() - t0)
    return best


def _worker(repeats: int) -> None:
    from crossing_kit._kernels import BACKEND

    out = {"backend": BACKEND}
    for name in WORKLOADS:
        out[name] = _time_workload(name, repeats)
    print(json.dumps(out))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        _worker(args.repeats)
        return 0

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, CROSSING_KIT_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker",
             "--repeats", str(args.repeats)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        results[backend] = json.loads(proc.stdout.strip().splitlines()[-1])
        assert results[backend]["backend"] == backend

    width = max(len(w) for w in WORKLOADS)
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'numpy/numba':>11}")
    for name in WORKLOADS:
        tn = results["numba"][name]
        tp = results["numpy"][name]
        print(f"{name:<{width}}  {tn:>9.4f}s  {tp:>9.4f}s  {tp / tn:>10.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
