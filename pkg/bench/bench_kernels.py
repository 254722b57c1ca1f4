#!/usr/bin/env python3
"""Benchmark the batch polynomial-evaluation kernels: numba vs pure numpy.

Times both backends on the two benchmark objectives over square lattices
and checks that they agree.  Run as:

    python bench/bench_kernels.py [--nodes 401 1001]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from canondual import benchmarks, kernels, oracle


def time_backend(backend: str, coeffs, exps, pts, repeats: int = 5) -> float:
    kernels.eval_many_with(backend, coeffs, exps, pts)  # warm (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernels.eval_many_with(backend, coeffs, exps, pts)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, nargs="+", default=[401, 1001])
    args = parser.parse_args()

    objectives = [
        ("goldstein-price", benchmarks.gp_objective(), benchmarks.GP_BOX),
        ("three-hump", benchmarks.thc_objective(), benchmarks.THC_BOX),
    ]
    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)} (active: {kernels.active_backend()})")
    header = f"{'objective':>16} {'terms':>6} {'points':>9} " + "".join(
        f"{b + ' [ms]':>12}" for b in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>9}"
    print(header)

    for name, poly, box in objectives:
        coeffs, exps = poly.as_arrays()
        for n in args.nodes:
            pts = oracle.lattice_points(box, n)
            times = {b: time_backend(b, coeffs, exps, pts) for b in backends}
            values = {b: kernels.eval_many_with(b, coeffs, exps, pts) for b in backends}
            if len(backends) == 2:
                if not np.allclose(values["numba"], values["numpy"], rtol=1e-12, atol=1e-9):
                    raise SystemExit(f"backend mismatch on {name} at {n} nodes/axis")
            row = f"{name:>16} {len(coeffs):>6} {len(pts):>9} " + "".join(
                f"{times[b] * 1e3:>12.3f}" for b in backends
            )
            if len(backends) == 2:
                row += f"{times['numpy'] / times['numba']:>8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
