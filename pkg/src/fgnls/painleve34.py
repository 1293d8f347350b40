"""The pole-free Painleve XXXIV transcendent u(s) at alpha = -1/4, omega = 0,
and its integral a(s) = int_-inf^s (u + z/2) dz.

The target solution interpolates between u = -s/2 (s -> -inf), which is an
exact solution of the equation, and the algebraic branch

    u(s) = -1/(4 s^(1/2)) - 1/16 s^-2 - 5/64 s^(-7/2) - 9/64 s^-5
           - 803/2048 s^(-13/2) + O(s^-8),      s -> +inf,

whose coefficients follow recursively by substituting a power series into
the equation.  Both leading asymptotics are shared by a one-parameter
family (oscillatory Ablowitz-Segur-like members around -s/2), so boundary
data alone do not select the solution: it is the separatrix between
trajectories that fall into the oscillatory regime and those that blow up.

Construction:
  1. shooting: u = -s/2 + A Ai(2^(1/3)|s|) parametrizes departures from
     -s/2 along the recessive mode; bisection on A isolates the separatrix
     that rides the -1/(4 sqrt(s)) branch (an exponentially unstable
     direction, so the trajectory can be tracked to s ~ 7 in doubles);
  2. a global Chebyshev collocation Newton solve of the division-free form

         2 u u'' = 8 u^3 + 4 s u^2 + u'^2 - 1/4

     polishes the composite guess.  A global polynomial basis is essential:
     the division-free form is degenerate where u vanishes (u'' drops out
     of a collocation row at a zero crossing), and local stencils admit
     spurious kinked solutions there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as Cheb
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import airy

from .errors import NewtonDiverged, OutOfTable, SingularJacobian

__all__ = ["P34Table", "solve_p34", "a_of_s", "right_asymptote", "left_asymptote"]

_CBRT2 = 2.0 ** (1.0 / 3.0)
_S_ANCHOR = -5.0         # shooting start: Airy-mode size vs roundoff optimum


def right_asymptote(s):
    s = np.asarray(s, dtype=float)
    return (-0.25 * s**-0.5 - s**-2.0 / 16.0 - 5.0 / 64.0 * s**-3.5
            - 9.0 / 64.0 * s**-5.0 - 803.0 / 2048.0 * s**-6.5)


def _right_asymptote_d(s):
    s = np.asarray(s, dtype=float)
    return (0.125 * s**-1.5 + s**-3.0 / 8.0 + 35.0 / 128.0 * s**-4.5
            + 45.0 / 64.0 * s**-6.0 + 13.0 * 803.0 / 4096.0 * s**-7.5)


def left_asymptote(s):
    return -0.5 * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class P34Table:
    """Solved transcendent on [-L, L]; immutable and shareable."""

    s_grid: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    a: np.ndarray
    L: float
    certified_residual: float

    def spline(self) -> CubicSpline:
        return CubicSpline(self.s_grid, self.u)


# ---------------------------------------------------------------------------
# separatrix shooting
# ---------------------------------------------------------------------------

def _rhs(s, y):
    # regular third-order form: d/ds of the division-free equation,
    # u''' = 12 u u' + 4 s u' + 2 u; the division-free expression is its
    # conserved first integral (equal to 0 on P34 solutions)
    u, p, q = y
    return (p, q, 12.0 * u * p + 4.0 * s * p + 2.0 * u)


def _shoot(A, s_end, rtol=1e-13):
    s0 = _S_ANCHOR
    x = _CBRT2 * abs(s0)
    ai, aip, _, _ = airy(x)
    y0 = [-0.5 * s0 + A * ai, -0.5 - A * _CBRT2 * aip,
          A * _CBRT2 * _CBRT2 * x * ai]

    def esc_up(s, y):
        return y[0] - 40.0

    def esc_dn(s, y):
        return y[0] + 40.0

    esc_up.terminal = esc_dn.terminal = True
    return solve_ivp(_rhs, (s0, s_end), y0, rtol=rtol, atol=1e-15,
                     method="DOP853", dense_output=True,
                     events=[esc_up, esc_dn])


def _separatrix(s_end: float):
    """Bisect the Airy-mode amplitude isolating the -1/(4 sqrt s) branch.

    Returns (A, dense_lo, dense_hi, s_track): the bracketing trajectories
    agree up to s_track, certifying the separatrix there.
    """
    # bracket: small |A| stays in the oscillatory regime ('through'),
    # large |A| escapes upward after riding the branch
    lo, hi = -1.0, -4.0
    if _shoot(lo, s_end).t[-1] < s_end - 1e-9:
        raise NewtonDiverged("shooting bracket: A=-1 escaped unexpectedly")
    while _shoot(hi, s_end).t[-1] >= s_end - 1e-9:
        hi *= 2.0
        if hi < -1e3:
            raise NewtonDiverged("shooting bracket: no escape up to A=-1000")
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        through = _shoot(mid, s_end).t[-1] >= s_end - 1e-9
        if through:
            lo = mid
        else:
            hi = mid
    sol_lo = _shoot(lo, s_end)
    sol_hi = _shoot(hi, s_end)
    s_track = min(sol_lo.t[-1], sol_hi.t[-1])
    ss = np.linspace(_S_ANCHOR, s_track, 400)
    gap = np.abs(sol_lo.sol(ss)[0] - sol_hi.sol(ss)[0])
    ok = gap < 1e-8 * (1.0 + np.abs(sol_lo.sol(ss)[0]))
    s_track = ss[np.nonzero(ok)[0][-1]] if np.any(ok) else _S_ANCHOR
    return lo, sol_lo, s_track


def _airy_tail(s, A):
    """-s/2 + A Ai(2^(1/3)|s|) and derivative for s <= the anchor."""
    x = _CBRT2 * np.abs(s)
    ai, aip, _, _ = airy(x)
    return -0.5 * s + A * ai, -0.5 - A * _CBRT2 * aip


# ---------------------------------------------------------------------------
# spectral polish
# ---------------------------------------------------------------------------

def _cheb_nodes_diff(N: int, L: float):
    """Chebyshev extreme points on [-L, L] (increasing) and the first
    differentiation matrix (Trefethen's formula, flipped to increasing s)."""
    k = np.arange(N + 1)
    x = np.cos(np.pi * k / N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** k
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T + np.eye(N + 1)
    D = np.outer(c, 1.0 / c) / dX
    D -= np.diag(D.sum(axis=1))
    s = (L * x)[::-1]
    D = D[::-1, ::-1] / L
    return s, D


def _newton(s, D1, u0, max_iter=80, step_tol=1e-12):
    D2 = D1 @ D1
    bc_l, bc_r = u0[0], u0[-1]

    def residual(u):
        du = D1 @ u
        ddu = D2 @ u
        r = 2 * u * ddu - 8 * u**3 - 4 * s * u**2 - du**2 + 0.25
        r[0] = u[0] - bc_l
        r[-1] = u[-1] - bc_r
        return r

    u = u0.copy()
    r = residual(u)
    prev_step = np.inf
    for _ in range(max_iter):
        du = D1 @ u
        ddu = D2 @ u
        J = (np.diag(2 * ddu - 24 * u**2 - 8 * s * u)
             + (2 * u)[:, None] * D2 - (2 * du)[:, None] * D1)
        J[0, :] = 0.0
        J[0, 0] = 1.0
        J[-1, :] = 0.0
        J[-1, -1] = 1.0
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        smax = np.max(np.abs(step))
        if smax < 1e-6:
            # quadratic basin: full steps, progress measured by the step
            # (the residual norm sits at its roundoff floor)
            u = u + step
            r = residual(u)
            if smax < step_tol or smax > 0.5 * prev_step:
                return u
            prev_step = smax
            continue
        lam = 1.0
        rn = np.linalg.norm(r)
        while lam > 1e-4:
            r_try = residual(u + lam * step)
            if np.linalg.norm(r_try) < (1 - 0.25 * lam) * rn:
                break
            lam *= 0.5
        u = u + lam * step
        r = residual(u)
    raise NewtonDiverged(
        f"no convergence in {max_iter} iterations; |r| = {np.linalg.norm(r):.2e}")


def _composite_guess(s, A, dense, s_track):
    u = np.empty_like(s)
    left = s <= _S_ANCHOR
    mid = (~left) & (s <= s_track)
    right = s > s_track
    u[left] = _airy_tail(s[left], A)[0]
    if np.any(mid):
        u[mid] = dense.sol(s[mid])[0]
    u[right] = right_asymptote(s[right])
    return u


def _solve_spectral(L: float, order: int):
    A, dense, s_track = _separatrix(min(L, 12.0))
    s, D1 = _cheb_nodes_diff(order, L)
    guess = _composite_guess(s, A, dense, min(s_track, 7.0))
    guess[0] = float(left_asymptote(-L))
    guess[-1] = float(right_asymptote(L))
    u = _newton(s, D1, guess)
    # branch guard: the polished solution must stay on the shot branch
    i0 = int(np.argmin(np.abs(s)))
    ref = dense.sol(s[i0])[0]
    if abs(u[i0] - ref) > 0.02:
        raise NewtonDiverged(
            f"Newton left the separatrix branch: u({s[i0]:.3f}) = {u[i0]:.6f} "
            f"vs shooting {ref:.6f}")
    coef = Cheb.chebfit(s / L, u, order)
    if order >= 200:
        tail = np.max(np.abs(coef[-max(4, order // 12):]))
        if tail > 1e-7 * np.max(np.abs(coef)):
            raise NewtonDiverged(
                f"non-smooth branch: Chebyshev tail {tail:.2e}; "
                "increase the spectral order")
    return coef


def solve_p34(L: float = 12.0, nodes: int = 48001,
              spectral_order: int | None = None) -> P34Table:
    """Solve on [-L, L] (L >= 8) and tabulate on a uniform grid of `nodes`
    points (nodes >= 400); `spectral_order` overrides the Chebyshev degree."""
    if L < 8:
        raise ValueError("domain half-width must be at least 8")
    if nodes < 400:
        raise ValueError("need at least 400 nodes")
    order = spectral_order if spectral_order is not None else int(24 * L)
    coef = _solve_spectral(L, order)
    s = np.linspace(-L, L, nodes)
    x = s / L
    u = Cheb.chebval(x, coef)
    cder = Cheb.chebder(coef) / L
    du = Cheb.chebval(x, cder)
    ddu = Cheb.chebval(x, Cheb.chebder(cder) / L)
    res = 2 * u * ddu - 8 * u**3 - 4 * s * u**2 - du**2 + 0.25
    cert = float(np.max(np.abs(res) / (1.0 + np.abs(s) ** 3)))
    # a(s) = int_{-L}^{s} u + (s^2 - L^2)/4; the (-inf, -L] piece of the
    # integrand is beyond all algebraic orders
    cint = Cheb.chebint(coef, lbnd=-1.0) * L
    a = Cheb.chebval(x, cint) + 0.25 * (s**2 - L**2)
    return P34Table(s, u, du, a, float(L), cert)


def a_of_s(s, table: P34Table):
    """a(s) between nodes by cubic interpolation."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if (np.any(s_arr < table.s_grid[0] - 1e-12)
            or np.any(s_arr > table.s_grid[-1] + 1e-12)):
        raise OutOfTable(f"s outside [-{table.L}, {table.L}]")
    val = CubicSpline(table.s_grid, table.a)(np.clip(
        s_arr, table.s_grid[0], table.s_grid[-1]))
    return float(val[0]) if np.ndim(s) == 0 else val


def _initial_guess(s: np.ndarray) -> np.ndarray:
    """C^1 splice of the two asymptotics (fallback diagnostics only)."""
    u = np.empty_like(s)
    left = s <= -2.0
    right = s >= 2.0
    mid = ~(left | right)
    u[left] = left_asymptote(s[left])
    u[right] = right_asymptote(s[right])
    ya, yb = float(left_asymptote(-2.0)), float(right_asymptote(2.0))
    da, db = -0.5, float(_right_asymptote_d(2.0))
    x = (s[mid] + 2.0) / 4.0
    h00 = 2 * x**3 - 3 * x**2 + 1
    h10 = x**3 - 2 * x**2 + x
    h01 = -2 * x**3 + 3 * x**2
    h11 = x**3 - x**2
    u[mid] = h00 * ya + 4.0 * h10 * da + h01 * yb + 4.0 * h11 * db
    return u
