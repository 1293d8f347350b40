"""Genus-n band configuration and the hyperelliptic square root w.

The Riemann surface is w(z)^2 = prod_j (z - E_j)(z - Ehat_j) with real
edges E_0 < Ehat_0 < ... < E_n < Ehat_n.  The branch of w is fixed by
w(z)/z^(n+1) -> 1 at infinity, analytic off the closed bands
[E_j, Ehat_j]; it is realized as the product of per-band square roots
sqrt(z - E_j)*sqrt(z - Ehat_j) in the principal branch, whose only cut
is the band itself.

Sign bookkeeping used throughout the package (k = 0..n):
  * on band k from above:        w_+ = +i (-1)^(n-k) |w|,  w_- = -w_+
  * on gap k = (Ehat_{k-1}, E_k) (k = 0 means (-inf, E_0)):
                                 w   = (-1)^(n+1-k) |w|
  * right of all bands:          w = +|w|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BranchPointEvaluation, LengthMismatch, OrderingViolation

EDGE_ATOL = 1e-14


@dataclass(frozen=True)
class BandSpectrum:
    """Validated band edges and background phases; immutable."""

    edges_lower: np.ndarray   # E_0..E_n
    edges_upper: np.ndarray   # Ehat_0..Ehat_n
    phases: np.ndarray        # phi_1..phi_n (phi_0 = 0 by convention)
    genus: int

    @property
    def all_edges(self) -> np.ndarray:
        """Interleaved E_0, Ehat_0, ..., E_n, Ehat_n."""
        out = np.empty(2 * (self.genus + 1))
        out[0::2] = self.edges_lower
        out[1::2] = self.edges_upper
        return out

    @property
    def amplitude_sum(self) -> float:
        """sum_j (Ehat_j - E_j) / 2, the modulus bound of the background."""
        return 0.5 * float(np.sum(self.edges_upper - self.edges_lower))

    def band(self, k: int) -> tuple[float, float]:
        return float(self.edges_lower[k]), float(self.edges_upper[k])

    def gap(self, k: int) -> tuple[float, float]:
        """Gap k = (Ehat_{k-1}, E_k), k = 1..n."""
        return float(self.edges_upper[k - 1]), float(self.edges_lower[k])

    def band_sign(self, k: int) -> int:
        """Sign s with w_+ = i*s*|w| on band k (limit from above)."""
        return -1 if (self.genus - k) % 2 else 1

    def gap_sign(self, k: int) -> int:
        """Sign of (real) w on gap k; k = 0 is (-inf, E_0), k = n+1 is (Ehat_n, inf)."""
        return -1 if (self.genus + 1 - k) % 2 else 1

    def band_index(self, x: float) -> int | None:
        """Index of the open band containing real x, else None."""
        lo = np.asarray(self.edges_lower)
        up = np.asarray(self.edges_upper)
        hits = np.nonzero((x > lo) & (x < up))[0]
        return int(hits[0]) if hits.size else None

    def on_edge(self, z) -> bool:
        z = np.asarray(z, dtype=complex)
        return bool(np.any(np.min(np.abs(z[..., None] - self.all_edges), axis=-1)
                           <= EDGE_ATOL * max(1.0, np.max(np.abs(self.all_edges)))))


def validate_spectrum(edges_lower, edges_upper, phases) -> BandSpectrum:
    """Build a BandSpectrum, enforcing interleaving and phase length."""
    lo = np.atleast_1d(np.asarray(edges_lower, dtype=float))
    up = np.atleast_1d(np.asarray(edges_upper, dtype=float))
    ph = np.asarray(phases, dtype=float).reshape(-1)
    if lo.size == 0 or lo.shape != up.shape:
        raise OrderingViolation(
            f"need equal-length nonempty edge sequences, got {lo.size} and {up.size}")
    inter = np.empty(2 * lo.size)
    inter[0::2] = lo
    inter[1::2] = up
    if not np.all(np.diff(inter) > 0):
        raise OrderingViolation(f"edges not strictly interleaving: {inter.tolist()}")
    genus = lo.size - 1
    if ph.size != genus:
        raise LengthMismatch(f"phases has length {ph.size}, expected genus {genus}")
    lo.setflags(write=False)
    up.setflags(write=False)
    ph.setflags(write=False)
    return BandSpectrum(lo, up, ph, genus)


def abs_w(x, spec: BandSpectrum):
    """|w(x)| for real x (vectorized)."""
    x = np.asarray(x, dtype=float)
    prod = np.ones_like(x)
    for e in spec.all_edges:
        prod = prod * np.abs(x - e)
    return np.sqrt(prod)


def reduced_abs_w(x, spec: BandSpectrum, skip: tuple[float, float]):
    """|w(x)| with the two edges in `skip` divided out (for cos-substituted rules)."""
    x = np.asarray(x, dtype=float)
    prod = np.ones_like(x)
    for e in spec.all_edges:
        if any(abs(e - s) <= EDGE_ATOL for s in skip):
            continue
        prod = prod * np.abs(x - e)
    return np.sqrt(prod)


def evaluate_w(z, spec: BandSpectrum, side: str | None = None):
    """The branch of w with w ~ z^(n+1) at infinity, cut along the bands.

    For real z inside an open band a side flag 'plus'/'minus' is required
    and returns the boundary value from above/below.  Band edges raise
    BranchPointEvaluation.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if spec.on_edge(z):
        raise BranchPointEvaluation("w evaluated at a band edge")

    if side is not None:
        if side not in ("plus", "minus"):
            raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
        if np.any(np.imag(z) != 0.0):
            raise BranchPointEvaluation("side flag only applies to real z")
        x = np.real(z)
        out = np.empty(z.shape, dtype=complex)
        for i, xi in np.ndenumerate(x):
            k = spec.band_index(float(xi))
            if k is None:
                out[i] = _w_offcut(np.asarray(xi, dtype=complex), spec)
            else:
                val = 1j * spec.band_sign(k) * abs_w(xi, spec)
                out[i] = val if side == "plus" else -val
        return out[0] if scalar else out

    onband = np.zeros(z.shape, dtype=bool)
    real_mask = np.imag(z) == 0.0
    for i in np.ndindex(z.shape):
        if real_mask[i] and spec.band_index(float(np.real(z[i]))) is not None:
            onband[i] = True
    if np.any(onband):
        raise BranchPointEvaluation(
            "w on an open band requires side='plus' or side='minus'")
    out = _w_offcut(z, spec)
    return complex(out[0]) if scalar else out


def _w_offcut(z, spec: BandSpectrum):
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for k in range(spec.genus + 1):
        a, b = spec.band(k)
        out = out * np.sqrt(z - a) * np.sqrt(z - b)
    return out


def w_band_plus(x, spec: BandSpectrum, k: int):
    """w_+ on band k for real x arrays strictly inside the band."""
    return 1j * spec.band_sign(k) * abs_w(x, spec)


def w_gap(x, spec: BandSpectrum, k: int):
    """Real w on gap k (k = 0..n+1, unbounded pieces included)."""
    return spec.gap_sign(k) * abs_w(x, spec)
