#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Covers the three kernel entry points at workloads representative of the
consumers: scalar order-sweeps (Newton / winding integrands), radial
quadrature batches (norm evaluation), and field-grid phase sums.
"""
import argparse
import time

import numpy as np

from helmdisc._kernels import _cyl_py as py

try:
    from helmdisc._kernels import _cyl_cy as cy
except ImportError:
    cy = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


CASES = []


def case(name):
    def deco(fn):
        CASES.append((name, fn))
        return fn
    return deco


@case("cyl_scaled nmax=30, z=8.3+0.1j (x200 calls)")
def _scaled_small(mod):
    for _ in range(200):
        mod.cyl_scaled(30, 8.3 + 0.1j)


@case("cyl_scaled nmax=150, z=60-20j (x50 calls)")
def _scaled_large(mod):
    for _ in range(50):
        mod.cyl_scaled(150, 60.0 - 20.0j)


@case("cyl_pair_batch nu=12, 20k real nodes")
def _pair(mod):
    z = np.linspace(0.4, 80.0, 20000)
    mod.cyl_pair_batch(12, z)


@case("cyl_phase_sum J, 160k pts, nmax=80")
def _sum_j(mod):
    z = np.linspace(1.0, 60.0, 160000)
    mod.cyl_phase_sum(False, 80, z, np.exp(1j * z),
                      np.ones(81, complex), np.zeros(81, complex))


@case("cyl_phase_sum H, 40k pts, nmax=80")
def _sum_h(mod):
    z = np.linspace(2.0, 60.0, 40000)
    mod.cyl_phase_sum(True, 80, z, np.exp(1j * z),
                      np.ones(81, complex), np.zeros(81, complex))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mods = [("python", py)] + ([("cython", cy)] if cy is not None else [])
    width = max(len(n) for n, _ in CASES)
    print(f"{'case':<{width}}  " + "".join(f"{n:>12}" for n, _ in mods) + "     speedup")
    for name, fn in CASES:
        times = [timeit(lambda m=mod: fn(m), args.repeat) for _, mod in mods]
        cells = "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<{width}}  {cells}  {speed}")
    if cy is None:
        print("\ncompiled backend not built: run `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
