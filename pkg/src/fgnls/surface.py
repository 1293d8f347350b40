"""Riemann-surface machinery.

Normalized holomorphic differentials, b-period matrix, Riemann constants,
the Riemann theta function with certified Gaussian-tail truncation, the
gap divisor, and the Abel map with base point (0, Ehat_0).

Conventions.  The differentials are stored as rows of a real coefficient
matrix C: omega_j = i * p_j(z)/w(z) dz with p_j(z) = sum_k C[j,k] z^k of
degree <= n-1.  The a_i cycle is the counterclockwise loop around band i
(i = 1..n), which in terms of upper boundary values reads

    oint_{a_i} omega_j = -2 int_{E_i}^{Ehat_i} omega_{j,+} = delta_ij.

The b-period matrix is the gap-sum B_ij = 2 sum_{k<=j} int_{gap k} omega_i,
purely imaginary with positive-definite imaginary part for real edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._kernels import theta_sum
from ._quad import gauss_adaptive, sqrt_weight_integral
from .errors import (
    NonPositiveImaginaryPart,
    RootNotBracketed,
    SingularNormalization,
    TruncationInsufficient,
)
from .spectrum import BandSpectrum, reduced_abs_w
from .spectrum import _w_offcut

__all__ = [
    "ThetaParams", "SurfaceData", "theta", "log_theta", "log_theta_batch",
    "build_differentials", "build_period_matrix", "riemann_constants",
    "divisor", "abel_map", "build_surface", "path_integral", "band_moment",
    "gap_moment",
]


@dataclass(frozen=True)
class ThetaParams:
    """Certified truncation policy for the theta series."""

    tol: float = 1e-13       # a-posteriori Gaussian tail bound per evaluation
    max_radius: int = 80     # sup-norm lattice bound ceiling


# ---------------------------------------------------------------------------
# Riemann theta function
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _lattice(n: int, radius: int) -> np.ndarray:
    axes = [np.arange(-radius, radius + 1)] * n
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1).astype(float)


_qform_cache: dict = {}


def _qform(B: np.ndarray, radius: int):
    key = (B.tobytes(), radius)
    hit = _qform_cache.get(key)
    if hit is not None:
        return hit
    lat = _lattice(B.shape[0], radius)
    q = 1j * np.pi * np.einsum("mi,ij,mj->m", lat, B, lat)
    if len(_qform_cache) > 64:
        _qform_cache.clear()
    _qform_cache[key] = (lat, q)
    return lat, q


def _tail_bound(lam_min: float, vnorm: float, n: int, radius: int) -> float:
    """Bound on the lattice sum over |m|_inf > radius.

    Uses |m|_2 >= |m|_inf and shell counts (2r+1)^n - (2r-1)^n.
    """
    total = 0.0
    for r in range(radius + 1, radius + 400):
        count = (2 * r + 1) ** n - (2 * r - 1) ** n
        expo = -np.pi * lam_min * r * r + 2 * np.pi * r * vnorm
        if expo > 700.0:
            return np.inf
        term = count * np.exp(expo)
        total += term
        if term < 1e-300 or (total > 0 and term < 1e-6 * total):
            break
    return total


def log_theta_batch(L: np.ndarray, B: np.ndarray,
                    params: ThetaParams = ThetaParams()) -> np.ndarray:
    """log Theta(l) for each row of L, stable for arbitrarily large Im l.

    Arguments are reduced modulo Z^n + B Z^n with the exact
    quasi-periodicity factor, so only the branch of the final complex log
    is unspecified; exponentiated differences of returned values are exact.
    """
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    n = B.shape[0] if B.size else 0
    if n == 0:
        return np.zeros(L.shape[0], dtype=complex)
    Y = np.imag(B)
    lam_min = float(np.linalg.eigvalsh(Y)[0])
    if lam_min <= 0.0:
        raise NonPositiveImaginaryPart("Im B not positive definite")

    # lattice reduction: l = l'' + B k + m0 with integer k, m0
    v = np.imag(L)
    k = np.rint(np.linalg.solve(Y, v.T).T)
    Lred = L - k @ B
    Lred = Lred - np.rint(np.real(Lred))
    # log Theta(l) = log Theta(l'') - 2 pi i k.l'' - pi i k.B.k
    corr = (-2j * np.pi * np.einsum("pi,pi->p", k, Lred)
            - 1j * np.pi * np.einsum("pi,ij,pj->p", k, B, k))

    vnorm = float(np.max(np.linalg.norm(np.imag(Lred), axis=1)))
    radius = max(1, int(np.ceil(np.sqrt(-np.log(params.tol) / (np.pi * lam_min))
                                + vnorm / lam_min)) + 2)
    while _tail_bound(lam_min, vnorm, n, radius) > params.tol:
        radius += 1
        if radius > params.max_radius:
            raise TruncationInsufficient(
                f"theta tail bound {params.tol} unreachable at radius "
                f"{params.max_radius}")
    lat, q = _qform(B, radius)
    vals = theta_sum(Lred, q, lat)
    return np.log(vals) + corr


def log_theta(l, B, params: ThetaParams = ThetaParams()) -> complex:
    return complex(log_theta_batch(np.atleast_2d(l), B, params)[0])


def theta(l, B, params: ThetaParams = ThetaParams()):
    """Riemann theta value(s); the empty (n = 0) theta is 1."""
    l = np.asarray(l, dtype=complex)
    if B.size == 0:
        if l.ndim > 1:
            return np.ones(l.shape[0], dtype=complex)
        return 1.0 + 0.0j
    if l.ndim == 1:
        return complex(np.exp(log_theta(l, B, params)))
    return np.exp(log_theta_batch(l, B, params))


# ---------------------------------------------------------------------------
# Monomial moments against 1/|w| on bands and interior gaps
# ---------------------------------------------------------------------------

def band_moment(spec: BandSpectrum, i: int, g) -> float:
    """int_{E_i}^{Ehat_i} g(s)/|w(s)| ds for g smooth and vectorized."""
    a, b = spec.band(i)
    red = lambda s: g(s) / reduced_abs_w(s, spec, (a, b))
    return float(np.real(sqrt_weight_integral(red, a, b)))


def gap_moment(spec: BandSpectrum, k: int, g) -> float:
    """int over interior gap k (k = 1..n) of g(s)/|w(s)| ds."""
    a, b = spec.gap(k)
    red = lambda s: g(s) / reduced_abs_w(s, spec, (a, b))
    return float(np.real(sqrt_weight_integral(red, a, b)))


# ---------------------------------------------------------------------------
# Differentials, periods, constants, divisor
# ---------------------------------------------------------------------------

def build_differentials(spec: BandSpectrum) -> np.ndarray:
    """Coefficient rows of the normalized holomorphic differentials.

    Row j-1 holds the monomial coefficients of p_j (degree <= n-1), with
    omega_j = i p_j/w dz and counterclockwise a-periods delta_ij.
    """
    n = spec.genus
    if n == 0:
        return np.zeros((0, 0))
    G = np.empty((n, n))
    for i in range(1, n + 1):      # a_i surrounds band i
        sigma = spec.band_sign(i)
        for k in range(n):
            G[i - 1, k] = -2.0 * sigma * band_moment(spec, i, lambda s: s**k)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularNormalization(f"a-period Gram matrix cond = {cond:.2e}")
    return np.linalg.solve(G, np.eye(n)).T


def build_period_matrix(spec: BandSpectrum, diff_coeffs: np.ndarray) -> np.ndarray:
    """b-period matrix B_ij = 2 sum_{k=1..j} int_{gap k} omega_i."""
    n = spec.genus
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    gap_ints = np.empty((n, n))    # [i, k-1] = int_{gap k} p_i/|w|
    for k in range(1, n + 1):
        for i in range(n):
            p = np.polynomial.Polynomial(diff_coeffs[i])
            gap_ints[i, k - 1] = gap_moment(spec, k, p)
    B = np.zeros((n, n), dtype=complex)
    for j in range(1, n + 1):
        for i in range(n):
            acc = 0.0
            for k in range(1, j + 1):
                acc += spec.gap_sign(k) * gap_ints[i, k - 1]
            B[i, j - 1] = 2j * acc
    B = 0.5 * (B + B.T)   # kill quadrature roundoff; symmetry is a tested invariant
    lam = np.linalg.eigvalsh(np.imag(B))
    if lam[0] <= 0:
        raise NonPositiveImaginaryPart(f"min eig Im B = {lam[0]:.3e}")
    return B


def riemann_constants(B: np.ndarray) -> np.ndarray:
    """K_j = sum_i B_ji + j/2, j = 1..n."""
    n = B.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    return B.sum(axis=1) + 0.5 * np.arange(1, n + 1)


def divisor(spec: BandSpectrum) -> np.ndarray:
    """Abscissae of the degree-n divisor, one per interior gap.

    Roots of prod(z - E_i) - prod(z - Ehat_i).
    """
    n = spec.genus
    if n == 0:
        return np.zeros(0)
    poly = (np.polynomial.polynomial.polyfromroots(spec.edges_lower)
            - np.polynomial.polynomial.polyfromroots(spec.edges_upper))

    def q(x):
        return np.polynomial.polynomial.polyval(x, poly)

    pts = np.empty(n)
    for k in range(1, n + 1):
        a, b = spec.gap(k)
        eps = 1e-12 * max(1.0, abs(a), abs(b))
        if np.sign(q(a + eps)) == np.sign(q(b - eps)):
            raise RootNotBracketed(f"no divisor sign change in gap {k}")
        pts[k - 1] = brentq(q, a + eps, b - eps, xtol=1e-15)
    return pts


# ---------------------------------------------------------------------------
# Path integrals from the base point (0, Ehat_0)
# ---------------------------------------------------------------------------

def _series_sqrt(c: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of sqrt(series) with c[0] = 1."""
    out = np.zeros(order + 1)
    out[0] = 1.0
    for k in range(1, order + 1):
        ck = c[k] if k < len(c) else 0.0
        acc = sum(out[i] * out[k - i] for i in range(1, k))
        out[k] = 0.5 * (ck - acc)
    return out


def _series_inv(c: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of 1/series with c[0] = 1."""
    out = np.zeros(order + 1)
    out[0] = 1.0
    for k in range(1, order + 1):
        out[k] = -sum(c[i] * out[k - i] for i in range(1, k + 1) if i < len(c))
    return out


def inv_w_series(spec: BandSpectrum, order: int) -> np.ndarray:
    """V with 1/w(z) = z^-(n+1) * sum_k V_k z^-k."""
    import numpy.polynomial.polynomial as P
    pu = np.ones(1)
    for e in spec.all_edges:
        pu = P.polymul(pu, np.array([1.0, -e]))
    W = _series_sqrt(pu, order)
    return _series_inv(W, order)


def laurent_tail(coeffs, spec: BandSpectrum, R: float, order: int = 40) -> float:
    """int_R^inf of the O(s^-2) part of poly(s)/w(s) ds, exactly from series.

    With poly(s)/w(s) = sum_t c_t s^-t, returns sum_{t>=2} c_t R^(1-t)/(t-1);
    the caller is responsible for the t <= 1 terms being handled analytically
    (they vanish for normalized phase numerators and Abel differentials).
    """
    n = spec.genus
    V = inv_w_series(spec, order + n + 2)
    total = 0.0
    for t in range(2, order):
        c = 0.0
        for m, am in enumerate(np.asarray(coeffs, dtype=float)):
            idx = m - (n + 1) + t
            if 0 <= idx < len(V):
                c += am * V[idx]
        total += c * R ** (1 - t) / (t - 1)
    return total


def _seg(p, a: float, b: float, spec, sing_a: bool, sing_b: bool, wgt: complex):
    """int_a^b p(s)/|w(s)| ds times the constant piece weight wgt.

    sing_a/sing_b mark inverse-square-root endpoints (band edges).
    """
    if b <= a:
        return 0.0 + 0.0j
    if sing_a and sing_b:
        red = lambda s: p(s) / reduced_abs_w(s, spec, (a, b))
        return wgt * sqrt_weight_integral(red, a, b)
    if sing_a or sing_b:
        e, o = (a, b) if sing_a else (b, a)
        span = o - e

        def sub(u):
            s = e + span * u * u
            red = p(s) / reduced_abs_w(s, spec, (e, e))
            return red * 2.0 * abs(span) / np.sqrt(abs(span))

        return wgt * gauss_adaptive(sub, 0.0, 1.0)
    red = lambda s: p(s) / reduced_abs_w(s, spec, (np.nan, np.nan))
    return wgt * gauss_adaptive(red, a, b)


def path_integral(coeffs, z, spec: BandSpectrum, side: str = "plus",
                  rtol: float = 1e-12) -> complex:
    """int from Ehat_0 to z of poly(s)/w(s) ds on the upper sheet.

    Real z walks the axis taking upper (side='plus') or lower boundary
    values on bands; complex z uses the straight segment (off the cuts);
    z=None integrates to upper-sheet infinity along the axis.
    """
    zc = None if z is None else complex(z)
    if zc is not None and zc.imag != 0.0:
        return _complex_path(coeffs, zc, spec)
    x = np.inf if zc is None else zc.real
    return _axis_path(coeffs, x, spec, side, rtol)


def _line_integral(p, z_from: complex, z_to: complex, spec,
                   sing_from: bool = False, sing_to: bool = False) -> complex:
    """int along the straight segment of p(s)/w(s) ds, with optional
    inverse-square-root endpoints removed by an s = e + span*u^2 change."""
    if sing_from or sing_to:
        e, o = (z_from, z_to) if sing_from else (z_to, z_from)
        span = o - e

        def sub(u):
            s = e + span * u * u
            return p(s) / _w_offcut(s, spec) * 2.0 * span * u

        val = gauss_adaptive(sub, 0.0, 1.0)
        return val if sing_from else -val

    def lin(u):
        s = z_from + (z_to - z_from) * u
        return p(s) / _w_offcut(s, spec) * (z_to - z_from)

    return gauss_adaptive(lin, 0.0, 1.0)


def _complex_path(coeffs, z: complex, spec) -> complex:
    """Base point to complex z: vertical leg off the axis, then straight.

    The vertical detour keeps the second leg clear of the branch points
    even when Im z is tiny.
    """
    e0 = float(spec.edges_upper[0])
    p = np.polynomial.Polynomial(coeffs)
    edges = spec.all_edges
    scale = max(1.0, float(edges[-1] - edges[0]))
    H = np.sign(z.imag) * scale
    mid = e0 + 1j * H
    d_edge = float(np.min(np.abs(z - edges)))
    sing_to = d_edge < 1e-13 * scale
    if abs(z.imag) >= 0.5 * scale:
        return _line_integral(p, e0, z, spec, sing_from=True, sing_to=sing_to)
    return (_line_integral(p, e0, mid, spec, sing_from=True)
            + _line_integral(p, mid, z, spec, sing_to=sing_to))


def _axis_path(coeffs, x: float, spec, side: str, rtol: float) -> complex:
    n = spec.genus
    lo, up = spec.edges_lower, spec.edges_upper
    e0 = float(up[0])
    p = np.polynomial.Polynomial(coeffs)

    def band_piece(k, a, b):
        # 1/w_+ = -i sign_k / |w| on band k; the lower side flips it
        wgt = -1j * spec.band_sign(k)
        if side == "minus":
            wgt = -wgt
        return _seg(p, a, b, spec, a == lo[k], b == up[k], wgt)

    def gap_piece(k, a, b):
        wgt = spec.gap_sign(k)   # 1/w = sign/|w| on the gap
        sing_a = k >= 1 and a == up[k - 1]
        sing_b = k <= n and b == lo[k]
        return _seg(p, a, b, spec, sing_a, sing_b, wgt)

    total = 0.0 + 0.0j
    if x >= e0:
        cur = e0
        for k in range(1, n + 1):
            gb = float(lo[k])
            if x <= gb:
                return total + gap_piece(k, cur, x)
            total += gap_piece(k, cur, gb)
            if x <= up[k]:
                return total + band_piece(k, float(lo[k]), x)
            total += band_piece(k, float(lo[k]), float(up[k]))
            cur = float(up[k])
        if np.isinf(x):
            R = 6.0 * max(1.0, float(np.max(np.abs(spec.all_edges))))
            total += gap_piece(n + 1, cur, R)
            return total + laurent_tail(coeffs, spec, R)
        return total + gap_piece(n + 1, cur, x)
    # leftward through band 0, then gap 0 = (-inf, E_0)
    if x >= lo[0]:
        return total - band_piece(0, x, e0)
    total -= band_piece(0, float(lo[0]), e0)
    return total - gap_piece(0, x, float(lo[0]))


# ---------------------------------------------------------------------------
# Abel map and the assembled surface
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceData:
    """Immutable bundle of surface quantities; safe for concurrent reads."""

    spec: BandSpectrum
    diff_coeffs: np.ndarray        # (n, n) real
    period_matrix: np.ndarray      # (n, n) complex
    riemann_constants: np.ndarray  # (n,)
    divisor_points: np.ndarray     # (n,) real gap abscissae
    abel_infinity: np.ndarray      # (n,) upper-sheet infinity
    abel_divisor: np.ndarray       # (n,) summed over the divisor
    theta_params: ThetaParams

    def theta(self, l):
        return theta(l, self.period_matrix, self.theta_params)

    def log_theta(self, L):
        return log_theta_batch(L, self.period_matrix, self.theta_params)


def abel_map(z, surface: SurfaceData, sheet: str = "upper",
             side: str = "plus") -> np.ndarray:
    """A(P) from the base point (0, Ehat_0); z=None is upper-sheet infinity.

    Well defined modulo Z^n (path class changes shift by a-periods, which
    every theta-function formula is blind to); lower-sheet values are the
    negatives.
    """
    spec = surface.spec
    n = spec.genus
    out = np.empty(n, dtype=complex)
    for j in range(n):
        out[j] = 1j * path_integral(surface.diff_coeffs[j], z, spec, side=side)
    if sheet == "lower":
        out = -out
    elif sheet != "upper":
        raise ValueError(f"sheet must be 'upper' or 'lower', got {sheet!r}")
    return out


def build_surface(spec: BandSpectrum,
                  params: ThetaParams = ThetaParams()) -> SurfaceData:
    """Assemble all surface data for a validated spectrum."""
    coeffs = build_differentials(spec)
    B = build_period_matrix(spec, coeffs)
    K = riemann_constants(B)
    div = divisor(spec)
    stub = SurfaceData(spec, coeffs, B, K, div,
                       np.zeros(spec.genus, dtype=complex),
                       np.zeros(spec.genus, dtype=complex), params)
    a_inf = abel_map(None, stub)
    a_div = np.zeros(spec.genus, dtype=complex)
    for x in div:
        a_div = a_div + abel_map(float(x), stub)
    return SurfaceData(spec, coeffs, B, K, div, a_inf, a_div, params)
