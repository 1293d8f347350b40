"""Hot numerical kernels: Riemann theta lattice summation.

The numba-jitted path is used by default; set FGNLS_DISABLE_NUMBA=1 to
select the pure-numpy fallback (same results, no compilation).  See
benchmarks/theta_bench.py for a timing comparison.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("FGNLS_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit, prange
    except ImportError:   # pragma: no cover - numba is a hard dependency
        USE_NUMBA = False


def _theta_sum_numpy(L: np.ndarray, qform: np.ndarray, lattice: np.ndarray) -> np.ndarray:
    """sum_m exp(qform_m + 2*pi*i <m, l_p>) for each row l_p of L.

    L: (P, n) complex, qform: (M,) complex, lattice: (M, n) float.
    """
    if L.shape[0] == 0:
        return np.empty(0, dtype=complex)
    chunk = max(1, int(2e7) // max(1, lattice.shape[0]))
    out = np.empty(L.shape[0], dtype=complex)
    for i in range(0, L.shape[0], chunk):
        block = L[i:i + chunk]
        phase = 2j * np.pi * (block @ lattice.T)
        out[i:i + chunk] = np.exp(qform[None, :] + phase).sum(axis=1)
    return out


if USE_NUMBA:

    @njit(cache=True, parallel=True)
    def _theta_sum_jit(L, qform, lattice):   # pragma: no cover - jitted
        P = L.shape[0]
        M = lattice.shape[0]
        n = L.shape[1]
        out = np.empty(P, dtype=np.complex128)
        for p in prange(P):
            acc = 0.0 + 0.0j
            for m in range(M):
                dot = 0.0 + 0.0j
                for k in range(n):
                    dot += lattice[m, k] * L[p, k]
                acc += np.exp(qform[m] + 2j * np.pi * dot)
            out[p] = acc
        return out

    def theta_sum(L, qform, lattice):
        if L.shape[0] == 0:
            return np.empty(0, dtype=complex)
        return _theta_sum_jit(np.ascontiguousarray(L, dtype=np.complex128),
                              np.ascontiguousarray(qform, dtype=np.complex128),
                              np.ascontiguousarray(lattice, dtype=np.float64))
else:
    theta_sum = _theta_sum_numpy
