"""Throughput comparison of the SOR sweep kernels: numba @njit vs pure numpy.

Runs the identical red-black sweep on a representative measure-solver grid
through both implementations, checks they agree bitwise, and reports sweep
rates plus an end-to-end solve timing on each backend.

Usage:
    python benchmarks/bench_kernels.py [n]

The numpy-only path of the library is selected at import time by setting
PSECTOR_NO_NUMBA=1; this script loads both implementations directly.
"""

import math
import sys
import time

import numpy as np

from psector import _kernels


def make_problem(n):
    rng = np.random.default_rng(42)
    u = rng.random((n, n))
    u[0, :] = 0.0
    u[-1, :] = 1.0
    u[:, 0] = 0.0
    u[:, -1] = 0.0
    coef = [np.ascontiguousarray(rng.random((n, n)) + 0.1) for _ in range(4)]
    omega = 2.0 / (1.0 + math.sin(math.pi / n))
    return u, coef, omega


def time_sweeps(fn, u, coef, omega, sweeps):
    v = u.copy()
    for c in (0, 1):  # warm up (jit compilation)
        fn(v, *coef, omega, c)
    v = u.copy()
    t0 = time.perf_counter()
    for _ in range(sweeps):
        fn(v, *coef, omega, 0)
        fn(v, *coef, omega, 1)
    dt = time.perf_counter() - t0
    return v, dt


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 256
    sweeps = 200
    u, coef, omega = make_problem(n)

    impls = [("numpy", _kernels._sor_color_py)]
    if _kernels._HAVE_NUMBA:
        impls.append(("numba", _kernels._sor_color_nb))
    else:
        print("numba unavailable (or disabled); benchmarking numpy path only")

    results = {}
    for name, fn in impls:
        v, dt = time_sweeps(fn, u, coef, omega, sweeps)
        rate = sweeps * (n - 2) ** 2 / dt / 1e6
        results[name] = (v, dt)
        print(f"{name:>6}: {sweeps} sweeps on {n}x{n}: {dt:.3f} s "
              f"({rate:.1f} Mnode-updates/s)")

    if len(results) == 2:
        same = np.array_equal(results["numpy"][0], results["numba"][0])
        print(f"bitwise agreement after {sweeps} sweeps: {same}")
        speedup = results["numpy"][1] / results["numba"][1]
        print(f"numba speedup: {speedup:.1f}x")

    # end-to-end: one representative measure solve on the active backend
    from psector.measure import MeasureProblem, solve_measure

    t0 = time.perf_counter()
    sol = solve_measure(MeasureProblem(nu=2.0, p=3.0, n_r=n, n_phi=n))
    dt = time.perf_counter() - t0
    print(f"solve_measure(nu=2, p=3, {n}x{n}) on backend={_kernels.backend()}: "
          f"{dt:.2f} s, {sol.iterations} cycles, converged={sol.converged}")


if __name__ == "__main__":
    main()
