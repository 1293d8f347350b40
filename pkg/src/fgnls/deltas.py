"""Region-dependent auxiliary functions delta(z; xi).

All three families share the structure

    delta(z) = w(z)/(2 pi i) [ sum_j delta_j B_j(z) + sgn * C_log(z) ],

        B_j(z)  = int_band_j i ds / (w_+(s)(s - z)),
        C_log(z) = int_contour log(1 - r1 r2)(s) ds / (w(s)(s - z)),

with sgn = -1 for families I and III and +1 for family II, and the band
constants delta_j killing the first n moments so that delta stays bounded
at infinity.  Family I integrates over (-inf, E_j0) minus enclosed bands,
family II over (Ehat_j0, +inf) minus bands, family III over (-inf, z0)
minus bands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._quad import gauss_adaptive, sqrt_weight_integral, tanh_sinh
from .errors import (
    InsufficientCoverage,
    MomentSystemSingular,
    OnContour,
    RegionMismatch,
)
from .phase import PhaseData, saddle_point
from .spectrum import BandSpectrum, abs_w, evaluate_w, reduced_abs_w

__all__ = ["DeltaData", "build_delta", "delta_eval", "band_cauchy"]

_CONTOUR_TOL = 1e-12


def band_cauchy(spec: BandSpectrum, j: int, z: complex) -> complex:
    """int_band_j i ds / (w_+(s)(s - z)) for z off band j.

    i/w_+ = sign_j/|w| on the band, so the integrand is real there.
    """
    a, b = spec.band(j)
    sig = spec.band_sign(j)
    red = lambda s: sig / (reduced_abs_w(s, spec, (a, b)) * (s - z))
    return complex(sqrt_weight_integral(red, a, b))


def _band_cauchy_pv(spec: BandSpectrum, j: int, x: float) -> complex:
    """Principal value of the band Cauchy integral for x inside band j.

    After the cosine substitution the constant-density principal value
    vanishes (PV int_0^pi dphi/(cos phi - c) = 0 for |c| < 1), leaving a
    regular difference integrand.
    """
    a, b = spec.band(j)
    sig = spec.band_sign(j)

    def red(s):
        R = reduced_abs_w(s, spec, (a, b))
        Rx = reduced_abs_w(np.full_like(s, x), spec, (a, b))
        out = np.empty_like(s)
        close = np.abs(s - x) < 1e-9 * max(1.0, abs(b - a))
        far = ~close
        out[far] = (1.0 / R[far] - 1.0 / Rx[far]) / (s[far] - x)
        if np.any(close):
            # derivative of 1/R at x
            h = 1e-6 * (b - a)
            d = (1.0 / reduced_abs_w(np.array([x + h]), spec, (a, b))[0]
                 - 1.0 / reduced_abs_w(np.array([x - h]), spec, (a, b))[0]) / (2 * h)
            out[close] = d
        return sig * out

    return complex(sqrt_weight_integral(red, a, b))


@dataclass(frozen=True)
class DeltaData:
    """Solved family data; the evaluator is pure and thread-safe."""

    region_family: str            # 'I' | 'II' | 'III'
    spec: BandSpectrum
    j0: int | None
    xi: float | None
    z_cut: float                  # inner endpoint of the log contour
    pieces: tuple                 # finite (a, b, gap_index) log-contour pieces
    log_sign: int                 # -1 for I/III, +1 for II
    delta_j: np.ndarray
    delta_inf: complex
    delta_1: complex
    log1mr: object = field(repr=False, compare=False)   # callable s -> real
    tail_cut: float = np.inf      # |s| beyond which the tail model applies
    tail_coeff: float = 0.0       # log1mr ~ -tail_coeff / s^2 out there
    breakpoints: tuple = ()       # interior non-smooth points of log1mr

    def on_contour(self, z) -> bool:
        zc = complex(z)
        if abs(zc.imag) > _CONTOUR_TOL:
            return False
        x = zc.real
        for a, b, _ in self.pieces:
            if a - _CONTOUR_TOL <= x <= b + _CONTOUR_TOL:
                return True
        if self.region_family == "II":
            return x >= self.z_cut - _CONTOUR_TOL
        return x <= self.z_cut + _CONTOUR_TOL and self.spec.band_index(x) is None \
            and x <= self.pieces[0][0]


def _contour_pieces(spec: BandSpectrum, family: str, j0: int | None,
                    z_cut: float, smax: float):
    """Finite pieces (a, b, gap_index) of the log contour, truncated at smax."""
    lo, up = spec.edges_lower, spec.edges_upper
    n = spec.genus
    pieces = []
    if family in ("I", "III"):
        # (-inf, z_cut) minus the closed bands
        left = -smax
        for k in range(n + 1):
            if z_cut <= lo[k]:
                break
            pieces.append((left, float(lo[k]), k))
            left = float(up[k])
            if z_cut <= up[k]:
                # z_cut inside band k: nothing beyond E_k contributes
                return tuple(p for p in pieces if p[0] < p[1])
        if left < z_cut:
            k_gap = next((k for k in range(n + 2) if _in_gap(spec, k, 0.5 * (left + z_cut))),
                         n + 1)
            pieces.append((left, z_cut, k_gap))
        return tuple(p for p in pieces if p[0] < p[1])
    # family II: (z_cut, +inf) minus bands
    right = smax
    left = z_cut
    for k in range(j0 + 1, n + 1):
        pieces.append((left, float(lo[k]), k))
        left = float(up[k])
    pieces.append((left, right, n + 1))
    return tuple(p for p in pieces if p[0] < p[1])


def _in_gap(spec, k, x):
    if k == 0:
        return x < spec.edges_lower[0]
    if k == spec.genus + 1:
        return x > spec.edges_upper[-1]
    a, b = spec.gap(k)
    return a < x < b


def _is_band_edge(spec, x):
    return bool(np.any(np.abs(spec.all_edges - x) < 1e-13 * max(1.0, np.max(np.abs(spec.all_edges)))))


def _log_piece_integral(spec, log1mr, a, b, gap_k, weight_fn, rtol=1e-11,
                        breakpoints=()):
    """int_a^b log1mr(s) * weight_fn(s) / w(s) ds over one contour piece.

    Band-edge endpoints carry the -log(s-p)/sqrt(s-p) behavior; they are
    removed by an s = p +- u^2 substitution and handed to the
    double-exponential rule.  Interior profile breakpoints split the rule.
    """
    cuts = [c for c in breakpoints if a + 1e-13 < c < b - 1e-13]
    if cuts:
        pts = [a] + sorted(cuts) + [b]
        return sum(_log_piece_integral(spec, log1mr, pts[i], pts[i + 1],
                                       gap_k, weight_fn, rtol)
                   for i in range(len(pts) - 1))
    tau = spec.gap_sign(gap_k)
    sing_a = _is_band_edge(spec, a)
    sing_b = _is_band_edge(spec, b)

    def plain(s):
        return log1mr(s) * weight_fn(s) * tau / abs_w(s, spec)

    if not (sing_a or sing_b):
        return tanh_sinh(plain, a, b, rtol=rtol)
    total = 0.0 + 0.0j
    mid = 0.5 * (a + b)
    segs = []
    if sing_a and sing_b:
        segs = [(a, mid, a), (mid, b, b)]
    elif sing_a:
        segs = [(a, b, a)]
    else:
        segs = [(a, b, b)]
    for lo_, hi_, p in segs:
        o = hi_ if p == lo_ else lo_
        span = o - p

        def sub(u, p=p, span=span):
            s = p + span * u * u
            red = reduced_abs_w(s, spec, (p, p))
            val = log1mr(s) * weight_fn(s) * tau / red
            return val * 2.0 * abs(span) / np.sqrt(abs(span))

        total += tanh_sinh(sub, 0.0, 1.0, rtol=rtol)
    return total


def _tail_moment(spec, tail_coeff, smax, weight_fn, family):
    """Tail of the log integral beyond |s| = smax with the -c/s^2 model.

    Families I/III integrate over (-inf, -smax] (substituted s = -v),
    family II over [smax, inf); both reduce to a decaying right tail.
    """
    if tail_coeff == 0.0 or not np.isfinite(smax):
        return 0.0
    sgn = 1.0 if family == "II" else -1.0

    def h(v):
        s = sgn * v
        w = np.real(_w_offcut_arr(s, spec))
        return (-tail_coeff / s**2) * weight_fn(s) / w

    from ._quad import tail_integral
    return complex(tail_integral(h, smax))


def _w_offcut_arr(s, spec):
    from .spectrum import _w_offcut
    return _w_offcut(np.asarray(s, dtype=complex), spec)


def build_delta(region_family: str, spec: BandSpectrum, sd,
                pd: PhaseData | None = None, j0: int | None = None,
                xi: float | None = None) -> DeltaData:
    """Solve the band-constant moment system and assemble a DeltaData.

    sd provides log1mr (callable), smax (coverage), and optionally
    tail_coeff for the -c/s^2 model beyond the coverage.
    """
    n = spec.genus
    if region_family in ("I", "II"):
        if j0 is None:
            raise ValueError("families I and II need the edge index j0")
        z_cut = float(spec.edges_lower[j0] if region_family == "I"
                      else spec.edges_upper[j0])
    elif region_family == "III":
        if xi is None or pd is None:
            raise ValueError("family III needs xi and the phase data")
        res = saddle_point(xi, pd)
        z_cut = res.z0
        if res.case_tag == "in_band":
            # fast-decaying region: the contour stops at the band start
            pass
    else:
        raise ValueError(f"unknown family {region_family!r}")

    smax = getattr(sd, "smax", np.inf)
    if not np.isfinite(smax):
        smax = 8.0 * max(1.0, float(np.max(np.abs(spec.all_edges))),
                         abs(z_cut))
    cov = getattr(sd, "coverage", (-np.inf, np.inf))
    if region_family in ("I", "III") and cov[0] > -smax + 1e-9:
        raise InsufficientCoverage(
            f"scattering data covers from {cov[0]}, need {-smax}")
    if region_family == "II" and cov[1] < smax - 1e-9:
        raise InsufficientCoverage(
            f"scattering data covers to {cov[1]}, need {smax}")
    tail_coeff = float(getattr(sd, "tail_coeff", 0.0))
    breakpoints = tuple(getattr(sd, "breakpoints", ()))

    log_sign = 1 if region_family == "II" else -1
    pieces = _contour_pieces(spec, region_family, j0, z_cut, smax)
    log1mr = sd.log1mr

    # band moment matrix A[k, j] = int_band_j i s^k/w_+ ds (real)
    A = np.zeros((n + 2, n))
    for j in range(1, n + 1):
        sig = spec.band_sign(j)
        a, b = spec.band(j)
        for k in range(n + 2):
            red = lambda s: sig * s**k / reduced_abs_w(s, spec, (a, b))
            A[k, j - 1] = float(np.real(sqrt_weight_integral(red, a, b)))

    # contour moments b_k = int log1mr s^k / w ds
    bvec = np.zeros(n + 2)
    for k in range(n + 2):
        acc = 0.0
        for (a, b, gk) in pieces:
            acc += np.real(_log_piece_integral(
                spec, log1mr, a, b, gk, lambda s, k=k: s**k,
                breakpoints=breakpoints))
        acc += np.real(_tail_moment(spec, tail_coeff, smax,
                                    lambda s, k=k: s**k, region_family))
        bvec[k] = acc

    if n > 0:
        M = A[:n, :]
        rhs = -log_sign * bvec[:n]
        try:
            delta_j = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise MomentSystemSingular(str(exc)) from exc
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e12:
            raise MomentSystemSingular(f"moment matrix cond = {cond:.2e}")
    else:
        delta_j = np.zeros(0)

    def moment(k):
        return (A[k] @ delta_j + log_sign * bvec[k]) / (2j * np.pi)

    delta_inf = -moment(n)
    esum = float(np.sum(spec.all_edges))
    delta_1 = -moment(n + 1) - delta_inf * esum / 2.0

    return DeltaData(region_family, spec, j0, xi, z_cut, pieces, log_sign,
                     delta_j, complex(delta_inf), complex(delta_1),
                     log1mr, smax, tail_coeff, breakpoints)


def delta_eval(z, dd: DeltaData) -> complex:
    """delta(z) off the contour and off the bands."""
    zc = complex(z)
    if dd.on_contour(zc):
        raise OnContour(f"z = {zc} lies on the integration contour")
    if abs(zc.imag) <= _CONTOUR_TOL and dd.spec.band_index(zc.real) is not None:
        raise OnContour("z on an open band; use eval_band_side")
    w = evaluate_w(zc, dd.spec)
    acc = 0.0 + 0.0j
    for j in range(1, dd.spec.genus + 1):
        acc += dd.delta_j[j - 1] * band_cauchy(dd.spec, j, zc)
    acc += dd.log_sign * _log_cauchy(dd, zc)
    return w * acc / (2j * np.pi)


def _log_cauchy(dd: DeltaData, z: complex, pv_piece: int | None = None) -> complex:
    spec = dd.spec
    total = 0.0 + 0.0j
    for idx, (a, b, gk) in enumerate(dd.pieces):
        if idx == pv_piece:
            total += _log_piece_pv(dd, a, b, gk, z.real)
        else:
            total += _log_piece_integral(spec, dd.log1mr, a, b, gk,
                                         lambda s: 1.0 / (s - z),
                                         breakpoints=dd.breakpoints)
    total += _tail_moment(spec, dd.tail_coeff, dd.tail_cut,
                          lambda s: 1.0 / (s - z), dd.region_family)
    return total


def _log_piece_pv(dd: DeltaData, a, b, gk, x: float) -> complex:
    """Principal value over the piece containing x, by subtraction."""
    spec = dd.spec
    tau = spec.gap_sign(gk)
    gx = dd.log1mr(x) * tau / abs_w(np.asarray(x), spec)

    def diff(s):
        s = np.asarray(s, dtype=float)
        g = dd.log1mr(s) * tau / abs_w(s, spec)
        out = np.zeros_like(g)
        m = np.abs(s - x) > 1e-12
        out[m] = (g[m] - gx) / (s[m] - x)
        return out

    sing_a = _is_band_edge(spec, a)
    sing_b = _is_band_edge(spec, b)
    val = 0.0 + 0.0j
    if sing_a or sing_b:
        # split off the singular end(s) by the u^2 substitution
        if sing_a and sing_b:
            segs = [(a, 0.5 * (a + b), a), (0.5 * (a + b), b, b)]
        elif sing_a:
            segs = [(a, b, a)]
        else:
            segs = [(a, b, b)]
        for (lo_, hi_, p) in segs:
            o = hi_ if p == lo_ else lo_
            span = o - p

            def sub(u, p=p, span=span):
                s = p + span * u * u
                return diff(s) * 2.0 * span * u

            val += tanh_sinh(sub, 0.0, 1.0, rtol=1e-11)
    else:
        val += tanh_sinh(diff, a, b, rtol=1e-11)
    val += gx * np.log(abs((b - x) / (x - a)))
    return val


def eval_cut_side(z: float, dd: DeltaData, side: str) -> complex:
    """Boundary value of delta on the log contour (z in a contour piece)."""
    x = float(z)
    piece = None
    for idx, (a, b, _) in enumerate(dd.pieces):
        if a + 1e-12 < x < b - 1e-12:
            piece = idx
            break
    if piece is None:
        raise OnContour(f"z = {x} is not inside a finite contour piece")
    w = evaluate_w(x, dd.spec)
    acc = 0.0 + 0.0j
    for j in range(1, dd.spec.genus + 1):
        acc += dd.delta_j[j - 1] * band_cauchy(dd.spec, j, x)
    pv = _log_cauchy(dd, complex(x), pv_piece=piece)
    gk = dd.pieces[piece][2]
    dens = np.pi * 1j * dd.log1mr(x) / (dd.spec.gap_sign(gk) * abs_w(np.asarray(x), dd.spec))
    sgn = 1.0 if side == "plus" else -1.0
    acc += dd.log_sign * (pv + sgn * dens)
    return w * acc / (2j * np.pi)


def eval_band_side(z: float, dd: DeltaData, side: str) -> complex:
    """Boundary value of delta on an open band."""
    x = float(z)
    j = dd.spec.band_index(x)
    if j is None:
        raise OnContour(f"z = {x} is not inside an open band")
    from .spectrum import w_band_plus
    w = w_band_plus(x, dd.spec, j)
    if side == "minus":
        w = -w
    acc = 0.0 + 0.0j
    for i in range(1, dd.spec.genus + 1):
        if i == j:
            acc += dd.delta_j[i - 1] * _band_cauchy_pv(dd.spec, i, x)
        else:
            acc += dd.delta_j[i - 1] * band_cauchy(dd.spec, i, x)
    acc += dd.log_sign * _log_cauchy(dd, complex(x))
    val = w * acc / (2j * np.pi)
    if 1 <= j <= dd.spec.genus:
        # Plemelj half-residue of the own-band kernel: w_+- * (+- i delta_j / (2 w_+-))
        val += 0.5j * dd.delta_j[j - 1]
    return val
