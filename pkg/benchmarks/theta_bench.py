"""Benchmark the Riemann theta lattice summation: numba JIT vs pure numpy.

The kernel is selected by the FGNLS_DISABLE_NUMBA environment variable at
import time, so both paths are exercised here by calling the two
implementations directly.

Run:  python benchmarks/theta_bench.py
"""

import time

import numpy as np

from fgnls._kernels import _theta_sum_numpy, theta_sum, USE_NUMBA
from fgnls.surface import _lattice


def bench(n_genus, radius, n_points, repeats=5):
    rng = np.random.default_rng(0)
    lat = _lattice(n_genus, radius)
    B = 1j * (np.eye(n_genus) + 0.1 * np.ones((n_genus, n_genus)))
    qform = 1j * np.pi * np.einsum("mi,ij,mj->m", lat, B, lat)
    L = rng.normal(size=(n_points, n_genus)) + 0.2j * rng.normal(
        size=(n_points, n_genus))

    theta_sum(L, qform, lat)          # warm the JIT
    t0 = time.perf_counter()
    for _ in range(repeats):
        fast = theta_sum(L, qform, lat)
    t_fast = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    for _ in range(repeats):
        ref = _theta_sum_numpy(L, qform, lat)
    t_ref = (time.perf_counter() - t0) / repeats

    err = np.max(np.abs(fast - ref)) / np.max(np.abs(ref))
    label = "numba" if USE_NUMBA else "numpy(flag)"
    print(f"genus {n_genus}, radius {radius}, {n_points} points, "
          f"{lat.shape[0]} lattice terms:")
    print(f"  {label:12s} {t_fast * 1e3:8.2f} ms")
    print(f"  numpy        {t_ref * 1e3:8.2f} ms   "
          f"speedup {t_ref / t_fast:5.1f}x   agreement {err:.1e}")


if __name__ == "__main__":
    print(f"active kernel: {'numba' if USE_NUMBA else 'pure numpy'} "
          f"(set FGNLS_DISABLE_NUMBA=1 for the fallback)\n")
    bench(1, 8, 20000)
    bench(2, 8, 5000)
    bench(3, 5, 500)
