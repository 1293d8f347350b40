"""Quadrature engine shared by the surface/phase/delta modules.

Abelian integrands carry inverse square-root singularities at band and gap
endpoints; they are removed analytically by the cosine substitution
s = mid + halfwidth*cos(phi) before any rule is applied.  Remaining smooth
(or log-endpoint) integrals go through Gauss-Legendre with order doubling,
or tanh-sinh when an endpoint is genuinely singular.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import tanhsinh as _scipy_tanhsinh


@lru_cache(maxsize=64)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gauss_fixed(f, a: float, b: float, order: int = 64) -> complex:
    """Fixed-order Gauss-Legendre on [a, b] of a vectorized callable."""
    x, w = _leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * np.sum(w * f(mid + half * x))


def gauss_adaptive(f, a: float, b: float, rtol: float = 1e-13,
                   atol: float = 1e-15, order0: int = 16,
                   max_order: int = 4096):
    """Gauss-Legendre with order doubling until successive values agree.

    f must accept a numpy array of nodes.  Returns the last value; raises
    no error on non-convergence (callers compare against their own
    tolerance via gauss_adaptive_err when certification matters).
    """
    val, _ = gauss_adaptive_err(f, a, b, rtol, atol, order0, max_order)
    return val


def gauss_adaptive_err(f, a: float, b: float, rtol: float = 1e-13,
                       atol: float = 1e-15, order0: int = 16,
                       max_order: int = 4096):
    """As gauss_adaptive but also returns the last doubling difference."""
    order = order0
    prev = gauss_fixed(f, a, b, order)
    while order < max_order:
        order *= 2
        cur = gauss_fixed(f, a, b, order)
        err = abs(cur - prev)
        if err <= rtol * abs(cur) + atol:
            return cur, err
        prev = cur
    return prev, abs(prev) * rtol


def tanh_sinh(f, a: float, b: float, rtol: float = 1e-12) -> complex:
    """Double-exponential rule; tolerates endpoint log/algebraic blow-up.

    Complex integrands are split into real and imaginary parts because
    scipy's tanhsinh error control is real-valued.
    """
    re = _scipy_tanhsinh(lambda x: np.real(f(x)) + 0.0, a, b, rtol=rtol)
    im = _scipy_tanhsinh(lambda x: np.imag(f(x)) + 0.0, a, b, rtol=rtol)
    return complex(re.integral, im.integral)


def cos_nodes(a: float, b: float, order: int):
    """Gauss-Legendre nodes in phi for s = mid + half*cos(phi), phi in (0, pi).

    Returns (s_nodes, weights) such that
        integral_a^b  g(s) / sqrt((s-a)(b-s)) ds  =  sum  w_i g(s_i).
    The sqrt endpoint weight is absorbed exactly: ds = -half sin(phi) dphi
    and sqrt((s-a)(b-s)) = half*sin(phi).
    """
    x, w = _leggauss(order)
    phi = 0.5 * np.pi * (x + 1.0)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * np.cos(phi), 0.5 * np.pi * w


def sqrt_weight_integral(g, a: float, b: float, rtol: float = 1e-13,
                         order0: int = 16, max_order: int = 4096) -> complex:
    """integral_a^b g(s)/sqrt((s-a)(b-s)) ds with g smooth, order doubling."""
    order = order0
    s, w = cos_nodes(a, b, order)
    prev = np.sum(w * g(s))
    while order < max_order:
        order *= 2
        s, w = cos_nodes(a, b, order)
        cur = np.sum(w * g(s))
        if abs(cur - prev) <= rtol * abs(cur) + 1e-15:
            return cur
        prev = cur
    return prev


def tail_integral(h, r: float, rtol: float = 1e-13) -> complex:
    """integral_r^inf h(s) ds for h(s) = O(s^-2), via u = 1/s.

    The substituted integrand u -> h(1/u)/u^2 is smooth on (0, 1/r] and
    has a finite limit at u = 0.
    """
    def sub(u):
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape, dtype=complex)
        nz = u > 0.0
        out[nz] = h(1.0 / u[nz]) / u[nz] ** 2
        if np.any(~nz):
            eps = 1e-9 / max(r, 1.0)
            out[~nz] = h(1.0 / eps) / eps**2
        return out

    return gauss_adaptive(sub, 0.0, 1.0 / r, rtol=rtol)
