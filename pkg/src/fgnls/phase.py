"""Phase integrals f and g, the phase function theta(z; xi), saddle points,
region classification, and local expansion coefficients.

f and g are the hyperelliptic integrals from Ehat_0 with numerators
p_f (monic, degree n+1) and p_g (leading coefficient 4, degree n+2),
determined by vanishing band periods together with the large-z
normalizations f = z + O(1), g = 2z^2 + O(1).  Saddle points are the
real zeros of F(z; xi) = xi p_f(z) + p_g(z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NoAdmissibleRoot, SingularConditionSystem, WrongRegime
from .spectrum import BandSpectrum, evaluate_w
from .surface import band_moment, gap_moment, inv_w_series, laurent_tail, path_integral

__all__ = [
    "PhaseData", "SaddleResult", "solve_phase_polynomials", "theta_phase",
    "saddle_point", "classify_region", "local_coefficients",
    "F_coeffs", "F_value",
]


@dataclass(frozen=True)
class PhaseData:
    """Solved phase-integral data; immutable."""

    spec: BandSpectrum
    f_num: np.ndarray      # ascending coefficients, monic degree n+1
    g_num: np.ndarray      # ascending coefficients, degree n+2, leading 4
    f0: float
    g0: float
    bf: np.ndarray         # B_j^f, j = 1..n
    bg: np.ndarray         # B_j^g
    xi_lower: np.ndarray   # xi_j at E_j, j = 0..n
    xi_upper: np.ndarray   # xihat_j at Ehat_j
    zf: np.ndarray         # roots of p_f (one per band)
    zg: np.ndarray         # roots of p_g


@dataclass(frozen=True)
class SaddleResult:
    z0: float
    case_tag: str          # 'off_band' | 'in_band'
    region: str            # 'I' | 'II' | 'III' | 'IV'
    index: int             # edge/band/interval index for the region
    other_root: float | None = None   # second in-band root (diagnostics)


# ---------------------------------------------------------------------------
# the linear solve for the numerators
# ---------------------------------------------------------------------------

def _band_moment_table(spec: BandSpectrum, max_deg: int) -> np.ndarray:
    """BM[j-1, m] = int_band_j s^m / |w(s)| ds for j = 1..n."""
    n = spec.genus
    out = np.empty((n, max_deg + 1))
    for j in range(1, n + 1):
        for m in range(max_deg + 1):
            out[j - 1, m] = band_moment(spec, j, lambda s: s**m)
    return out


def _polish_real_roots(coeffs: np.ndarray) -> np.ndarray:
    """Companion-matrix roots with a few Newton steps; roots here are real."""
    r = P.polyroots(coeffs)
    der = P.polyder(coeffs)
    for _ in range(4):
        fr = P.polyval(r, coeffs)
        dr = P.polyval(r, der)
        step = np.where(dr != 0, fr / dr, 0.0)
        r = r - step
    if np.max(np.abs(np.imag(r))) > 1e-8 * max(1.0, np.max(np.abs(r))):
        raise SingularConditionSystem(f"unexpected complex numerator roots: {r}")
    return np.sort(np.real(r))


def solve_phase_polynomials(spec: BandSpectrum) -> PhaseData:
    """Solve for p_f, p_g and assemble all phase constants."""
    n = spec.genus
    V = inv_w_series(spec, n + 4)
    BM = _band_moment_table(spec, n + 2)

    # f: coefficients a_0..a_n of the monic degree-(n+1) numerator
    A = np.zeros((n + 1, n + 1))
    rhs = np.zeros(n + 1)
    A[0, n] = 1.0
    rhs[0] = -V[1]                       # kills the z^-1 term of p_f/w
    for j in range(1, n + 1):
        A[j, : n + 1] = BM[j - 1, : n + 1]
        rhs[j] = -BM[j - 1, n + 1]       # band period of the monic part
    try:
        a = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularConditionSystem(f"f-numerator system: {exc}") from exc
    f_num = np.append(a, 1.0)

    # g: coefficients b_0..b_{n+1}, leading 4
    Ag = np.zeros((n + 2, n + 2))
    rg = np.zeros(n + 2)
    Ag[0, n + 1] = 1.0
    rg[0] = -4.0 * V[1]                  # kills the constant term
    Ag[1, n] = 1.0
    Ag[1, n + 1] = V[1]
    rg[1] = -4.0 * V[2]                  # kills the z^-1 term
    for j in range(1, n + 1):
        Ag[j + 1, : n + 2] = BM[j - 1, : n + 2]
        rg[j + 1] = -4.0 * BM[j - 1, n + 2]
    try:
        b = np.linalg.solve(Ag, rg)
    except np.linalg.LinAlgError as exc:
        raise SingularConditionSystem(f"g-numerator system: {exc}") from exc
    g_num = np.append(b, 4.0)

    # constants: f0 = lim f - z, g0 = lim g - 2 z^2; the O(s^-2) remainders of
    # the integrands are summed exactly from the Laurent series at infinity
    R = 6.0 * max(1.0, float(np.max(np.abs(spec.all_edges))))
    fR = path_integral(f_num, R, spec)
    f0 = float(np.real(fR)) - R + laurent_tail(f_num, spec, R)
    gR = path_integral(g_num, R, spec)
    g0 = float(np.real(gR)) - 2.0 * R * R + laurent_tail(g_num, spec, R)

    # b-periods of df and dg (gap sums, real)
    bf = np.zeros(n)
    bg = np.zeros(n)
    accf = accg = 0.0
    for k in range(1, n + 1):
        tau = spec.gap_sign(k)
        accf += 2.0 * tau * gap_moment(spec, k, lambda s: P.polyval(s, f_num))
        accg += 2.0 * tau * gap_moment(spec, k, lambda s: P.polyval(s, g_num))
        bf[k - 1] = accf
        bg[k - 1] = accg

    zf = _polish_real_roots(f_num)
    zg = _polish_real_roots(g_num)

    # critical velocities from the coefficients (stable near coincident roots)
    xi_lower = -P.polyval(spec.edges_lower, g_num) / P.polyval(spec.edges_lower, f_num)
    xi_upper = -P.polyval(spec.edges_upper, g_num) / P.polyval(spec.edges_upper, f_num)

    return PhaseData(spec, f_num, g_num, f0, g0, bf, bg,
                     xi_lower, xi_upper, zf, zg)


# ---------------------------------------------------------------------------
# theta(z; xi) and its ingredients
# ---------------------------------------------------------------------------

def F_coeffs(xi: float, pd: PhaseData) -> np.ndarray:
    """Ascending coefficients of F(z; xi) = xi p_f(z) + p_g(z)."""
    out = np.array(pd.g_num, dtype=float)
    out[: len(pd.f_num)] += xi * pd.f_num
    return out


def F_value(z, xi: float, pd: PhaseData):
    return P.polyval(z, F_coeffs(xi, pd))


def theta_phase(z, xi: float, pd: PhaseData, side: str = "plus") -> complex:
    """theta(z; xi) = -(f - f0) xi - (g - g0), boundary values on request."""
    comb = F_coeffs(xi, pd)
    val = path_integral(comb, z, pd.spec, side=side)
    return pd.f0 * xi + pd.g0 - val


def theta_at_upper_edge(j0: int, xi: float, pd: PhaseData) -> float:
    """theta(Ehat_j0; xi) = f0 xi + g0 - (B^f_j0 xi + B^g_j0)/2 (B_0 = 0)."""
    bf = pd.bf[j0 - 1] if j0 >= 1 else 0.0
    bg = pd.bg[j0 - 1] if j0 >= 1 else 0.0
    return pd.f0 * xi + pd.g0 - 0.5 * (bf * xi + bg)


theta_at_lower_edge = theta_at_upper_edge   # theta(E_j) = theta(Ehat_j)


# ---------------------------------------------------------------------------
# saddle point and regions
# ---------------------------------------------------------------------------

def _xi_interval_of(xi: float, pd: PhaseData):
    """Locate xi in the edge decomposition.

    Returns ('offband', j, lo, hi) when z0 lies in gap j (j = 0 means
    left of E_0 ... wait: j = 0 is (xi_0, inf) -> z0 in (-inf, E_0];
    j = n+1 is (-inf, xihat_n) -> z0 in [Ehat_n, inf)), or
    ('inband', j) when xihat_j < xi < xi_j (z0 inside band j).
    """
    xl, xu = pd.xi_lower, pd.xi_upper
    n = pd.spec.genus
    if xi >= xl[0]:
        return ("offband", 0)
    if xi <= xu[n]:
        return ("offband", n + 1)
    for j in range(n + 1):
        if xu[j] < xi < xl[j]:
            return ("inband", j)
    for j in range(1, n + 1):
        if xl[j] <= xi <= xu[j - 1]:
            return ("offband", j)
    raise NoAdmissibleRoot(f"xi = {xi} not locatable in the edge decomposition")


def saddle_point(xi: float, pd: PhaseData) -> SaddleResult:
    """Saddle on the monotone decreasing branch z0(xi).

    Off-band: the unique real F-root in the interval dictated by xi.
    In-band: two F-roots share the band; the branch continuous with
    z0(xi_j) = E_j (the smaller root) is returned, the other is kept as a
    diagnostic.
    """
    spec = pd.spec
    n = spec.genus
    roots = np.sort(np.real(_roots_real(F_coeffs(xi, pd))))
    kind, j = _xi_interval_of(xi, pd)
    if kind == "offband":
        if j == 0:
            lo_b, hi_b = -np.inf, float(spec.edges_lower[0])
        elif j == n + 1:
            lo_b, hi_b = float(spec.edges_upper[n]), np.inf
        else:
            lo_b, hi_b = spec.gap(j)
        cand = roots[(roots >= lo_b - 1e-12) & (roots <= hi_b + 1e-12)]
        if cand.size == 0:
            raise NoAdmissibleRoot(
                f"no F-root in [{lo_b}, {hi_b}] for xi = {xi}")
        z0 = float(cand[0] if j == 0 else cand[-1] if j == n + 1 else cand[0])
        region = _region_of_offband(xi, pd, j)
        return SaddleResult(z0, "off_band", region, j)
    a, b = spec.band(j)
    cand = np.sort(roots[(roots > a) & (roots < b)])
    if cand.size < 2:
        raise NoAdmissibleRoot(
            f"expected two in-band F-roots in band {j} for xi = {xi}, got {cand}")
    return SaddleResult(float(cand[0]), "in_band", "IV", j,
                        other_root=float(cand[1]))


def _roots_real(coeffs):
    r = P.polyroots(coeffs)
    return r[np.abs(np.imag(r)) < 1e-9 * max(1.0, np.max(np.abs(r)))]


def _region_of_offband(xi, pd, j):
    # off-band intervals are Zakharov-Manakov pieces of region III
    return "III"


def classify_region(xi: float, t: float, C: float, pd: PhaseData):
    """Region tag per the transition-window definition; ties favor I, then II.

    Returns (tag, index): index is the transition edge j0 for I/II, the
    band index for IV, and the interval index for III.
    """
    scale = t ** (2.0 / 3.0)
    d_up = np.abs(xi - pd.xi_upper) * scale
    d_lo = np.abs(xi - pd.xi_lower) * scale
    if np.min(d_up) <= C:
        return "I", int(np.argmin(d_up))
    if np.min(d_lo) <= C:
        return "II", int(np.argmin(d_lo))
    kind, j = _xi_interval_of(xi, pd)
    if kind == "inband":
        return "IV", j
    return "III", j


# ---------------------------------------------------------------------------
# local expansion coefficients
# ---------------------------------------------------------------------------

def _aux_sqrt_upper(spec: BandSpectrum, j0: int):
    """what^(j0)(Ehat_j0) and its derivative: the square root with
    w(z) = what^(j0)(z) sqrt(z - Ehat_j0) near the upper edge."""
    e = float(spec.edges_upper[j0])
    prod = np.prod(e - spec.edges_lower) * np.prod(
        np.delete(e - spec.edges_upper, j0))
    val = np.sqrt(prod)
    dlog = 0.5 * (np.sum(1.0 / (e - spec.edges_lower))
                  + np.sum(1.0 / np.delete(e - spec.edges_upper, j0)))
    return val, val * dlog


def _aux_sqrt_lower(spec: BandSpectrum, j0: int):
    """w^(j0)(E_j0) and derivative: w(z) = w^(j0)(z) sqrt(E_j0 - z)-type
    factorization at the lower edge."""
    e = float(spec.edges_lower[j0])
    prod = -np.prod(e - spec.edges_upper) * np.prod(
        np.delete(e - spec.edges_lower, j0))
    val = np.sqrt(prod)
    dlog = 0.5 * (np.sum(1.0 / (e - spec.edges_upper))
                  + np.sum(1.0 / np.delete(e - spec.edges_lower, j0)))
    return val, val * dlog


def local_coefficients(kind: str, xi: float, pd: PhaseData,
                       j0: int | None = None) -> dict:
    """Expansion coefficients of theta at a band edge or an off-band saddle.

    kind='upper_edge': {theta1, theta3} at Ehat_j0 (theta3 < 0 near xihat_j0);
    kind='lower_edge': {theta1, theta3} at E_j0 (theta3 > 0 near xi_j0);
    kind='saddle':     {theta2, z0} with theta2 = dF/dz(z0)/(2 w(z0)) > 0,
    so that theta(z) = theta(z0) - theta2 (z - z0)^2 + O((z-z0)^3) holds
    exactly (theta'' = -dF/dz / w at a saddle).
    """
    spec = pd.spec
    Fc = F_coeffs(xi, pd)
    dFc = P.polyder(Fc)
    if kind == "saddle":
        res = saddle_point(xi, pd)
        if res.case_tag != "off_band":
            raise WrongRegime("saddle coefficients need an off-band saddle")
        z0 = res.z0
        w0 = float(np.real(evaluate_w(z0, spec)))
        theta2 = float(P.polyval(z0, dFc)) / (2.0 * w0)
        if theta2 <= 0:
            raise WrongRegime(f"theta2 = {theta2} not positive at xi = {xi}")
        return {"theta2": theta2, "z0": z0}
    if j0 is None:
        raise ValueError("edge variants need j0")
    if kind == "upper_edge":
        e = float(spec.edges_upper[j0])
        aux, daux = _aux_sqrt_upper(spec, j0)
        theta1 = -2.0 * float(P.polyval(e, pd.f_num)) / aux
        theta3 = -(P.polyval(e, dFc) * aux - P.polyval(e, Fc) * daux) / aux**2
        if theta3 >= 0:
            raise WrongRegime(
                f"theta3 = {theta3} not negative at Ehat_{j0}, xi = {xi}")
        return {"theta1": float(theta1), "theta3": float(theta3)}
    if kind == "lower_edge":
        e = float(spec.edges_lower[j0])
        aux, daux = _aux_sqrt_lower(spec, j0)
        theta1 = -2.0 * float(P.polyval(e, pd.f_num)) / aux
        theta3 = -(P.polyval(e, dFc) * aux - P.polyval(e, Fc) * daux) / aux**2
        if theta3 <= 0:
            raise WrongRegime(
                f"theta3 = {theta3} not positive at E_{j0}, xi = {xi}")
        return {"theta1": float(theta1), "theta3": float(theta3)}
    raise ValueError(f"unknown kind {kind!r}")
