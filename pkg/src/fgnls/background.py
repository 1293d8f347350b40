"""Algebro-geometric background q^(AG), its Jost matrix, and the band-jump
global parametrix.

All theta-quotient formulas are evaluated in log form so that the lattice
reduction prefactors cancel exactly; x and t enter only through the real
winding vector C(x,t) = -(B^f x + B^g t + phi)/(2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ThetaDenominatorZero
from .phase import PhaseData, solve_phase_polynomials
from .spectrum import BandSpectrum, abs_w
from .surface import SurfaceData, ThetaParams, build_surface, path_integral

__all__ = [
    "BackgroundEvaluator", "build_background", "kappa", "q_ag", "mu_ag",
    "psi_ag", "global_parametrix",
]

_SIGMA3 = np.diag([1.0, -1.0])


def kappa(z, spec: BandSpectrum, side: str | None = None):
    """varkappa(z) = prod_j ((z-E_j)/(z-Ehat_j))^(1/4), cut on the bands,
    normalized to 1 at infinity.  Boundary values on a band are
    e^(-i pi/4)|varkappa| from above and the conjugate from below."""
    if side is not None:
        x = float(np.real(z))
        k = spec.band_index(x)
        if k is None:
            raise ValueError("side flag requires z inside an open band")
        mod = 1.0
        for j in range(spec.genus + 1):
            a, b = spec.band(j)
            mod *= np.abs((x - a) / (x - b)) ** 0.25
        phase = np.exp(-0.25j * np.pi) if side == "plus" else np.exp(0.25j * np.pi)
        return mod * phase
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for j in range(spec.genus + 1):
        a, b = spec.band(j)
        out = out * ((z - a) / (z - b)) ** 0.25
    return out if out.shape else complex(out)


@dataclass(frozen=True)
class BackgroundEvaluator:
    """Immutable bundle: spectrum, surface and phase data plus cached
    constant theta arguments."""

    spec: BandSpectrum
    surface: SurfaceData
    pd: PhaseData
    dk: np.ndarray               # A(D) + K
    a_inf: np.ndarray            # A(infinity), upper sheet
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def theta_params(self) -> ThetaParams:
        return self.surface.theta_params

    def winding(self, x, t, phases=None) -> np.ndarray:
        """C(x,t) rows: -(B^f x + B^g t + phi) / (2 pi); shape (P, n)."""
        ph = self.spec.phases if phases is None else np.asarray(phases, dtype=float)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return -(np.outer(x, self.pd.bf) + np.outer(t, self.pd.bg)
                 + ph[None, :]) / (2.0 * np.pi)

    def abel(self, z, side: str = "plus") -> np.ndarray:
        key = ("A", None if z is None else complex(z), side)
        hit = self._cache.get(key)
        if hit is None:
            from .surface import abel_map
            hit = (self.a_inf if z is None
                   else abel_map(z, self.surface, side=side))
            self._cache[key] = hit
        return hit

    def fg(self, z, side: str = "plus") -> tuple[complex, complex]:
        """(f(z), g(z)) by quadrature along the standard path."""
        key = ("fg", complex(z), side)
        hit = self._cache.get(key)
        if hit is None:
            f = path_integral(self.pd.f_num, z, self.spec, side=side)
            g = path_integral(self.pd.g_num, z, self.spec, side=side)
            hit = (f, g)
            self._cache[key] = hit
        return hit


def build_background(spec: BandSpectrum,
                     params: ThetaParams = ThetaParams()) -> BackgroundEvaluator:
    surface = build_surface(spec, params)
    pd = solve_phase_polynomials(spec)
    # The divisor constant enters with the sign that makes Theta(A(z) + dk)
    # vanish exactly at the divisor abscissae, so the zeros cancel against
    # the kappa -+ 1/kappa factors and the Baker-Akhiezer matrix stays
    # analytic off the bands (the band jump is blind to this constant).
    dk = -(surface.abel_divisor + surface.riemann_constants)
    return BackgroundEvaluator(spec, surface, pd, dk, surface.abel_infinity)


def _log_theta_ratio(ev: BackgroundEvaluator, num_args: np.ndarray,
                     den_args: np.ndarray) -> np.ndarray:
    """sum log Theta(num rows) - sum log Theta(den rows), batched."""
    if ev.spec.genus == 0:
        return np.zeros(num_args.shape[0] if num_args.ndim == 3 else 1,
                        dtype=complex)
    P_, m, n = num_args.shape
    ln = ev.surface.log_theta(num_args.reshape(P_ * m, n)).reshape(P_, m)
    ld = ev.surface.log_theta(den_args.reshape(P_ * m, n)).reshape(P_, m)
    if not (np.all(np.isfinite(ln)) and np.all(np.isfinite(ld))):
        raise ThetaDenominatorZero("theta vanished in a quotient")
    return np.sum(ln, axis=1) - np.sum(ld, axis=1)


def q_ag(x, t, ev: BackgroundEvaluator, phases=None):
    """The finite-genus background; vectorized over matching x, t arrays."""
    scalar = np.ndim(x) == 0 and np.ndim(t) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if xs.shape != ts.shape:
        xs, ts = np.broadcast_arrays(xs, ts)
    shape = xs.shape
    xs, ts = np.ravel(xs), np.ravel(ts)
    amp = 1j * ev.spec.amplitude_sum
    osc = np.exp(2j * (ev.pd.f0 * xs + ev.pd.g0 * ts))
    if ev.spec.genus == 0:
        vals = amp * osc
    else:
        C = ev.winding(xs, ts, phases)
        P_ = C.shape[0]
        ai, dk = ev.a_inf, ev.dk
        num = np.stack([np.broadcast_to(ai + dk, C.shape), -ai[None, :] + C + dk],
                       axis=1)
        den = np.stack([np.broadcast_to(-ai + dk, C.shape), ai[None, :] + C + dk],
                       axis=1)
        vals = amp * osc * np.exp(_log_theta_ratio(ev, num, den))
    return complex(vals[0]) if scalar else vals.reshape(shape)


def _f_entries(ev: BackgroundEvaluator, az: np.ndarray, C: np.ndarray):
    """log of F_11, F_12, F_21, F_22 at fixed Abel vector az, batched over C."""
    dk = ev.dk
    P_ = C.shape[0]
    num = np.stack([az[None, :] + C + dk,
                    -az[None, :] + C + dk,
                    az[None, :] + C - dk,
                    az[None, :] - C + dk], axis=1)
    den = np.stack([np.broadcast_to(az + dk, C.shape),
                    np.broadcast_to(-az + dk, C.shape),
                    np.broadcast_to(az - dk, C.shape),
                    np.broadcast_to(az + dk, C.shape)], axis=1)
    n = ev.spec.genus
    ln = ev.surface.log_theta(num.reshape(4 * P_, n)).reshape(P_, 4)
    ld = ev.surface.log_theta(den.reshape(4 * P_, n)).reshape(P_, 4)
    if not (np.all(np.isfinite(ln)) and np.all(np.isfinite(ld))):
        raise ThetaDenominatorZero("theta vanished in a Baker-Akhiezer entry")
    return ln - ld


def mu_ag(z, x, t, ev: BackgroundEvaluator, side: str | None = None,
          phases=None) -> np.ndarray:
    """The 2x2 Baker-Akhiezer matrix normalized to I at infinity."""
    kp = kappa(z, ev.spec, side=side)
    kplus = 0.5 * (kp + 1.0 / kp)
    kminus = 0.5 * (kp - 1.0 / kp)
    if ev.spec.genus == 0:
        return np.array([[kplus, kminus], [kminus, kplus]], dtype=complex)
    abel_side = side if side is not None else "plus"
    az = ev.abel(z, side=abel_side)
    C = ev.winding(x, t, phases)
    lf = _f_entries(ev, az, C)[0]
    linf = _f_entries(ev, ev.a_inf, C)[0]
    f11 = np.exp(lf[0] - linf[0])
    f12 = np.exp(lf[1] - linf[0])
    f21 = np.exp(lf[2] - linf[3])
    f22 = np.exp(lf[3] - linf[3])
    return np.array([[kplus * f11, kminus * f12],
                     [kminus * f21, kplus * f22]], dtype=complex)


def psi_ag(z, x, t, ev: BackgroundEvaluator, side: str | None = None,
           phases=None) -> np.ndarray:
    """Jost solution of the Lax pair built on the background."""
    mu = mu_ag(z, x, t, ev, side=side, phases=phases)
    f, g = ev.fg(z, side=side if side is not None else "plus")
    left = np.exp(1j * (ev.pd.f0 * x + ev.pd.g0 * t))
    right = np.exp(-1j * (f * x + g * t))
    pre = np.diag([left, 1.0 / left])
    post = np.diag([right, 1.0 / right])
    return pre @ mu @ post


def global_parametrix(z, x, t, delta_vec, ev: BackgroundEvaluator,
                      side: str | None = None) -> np.ndarray:
    """Band-jump model RH solution M^(glo), phases shifted by delta_vec.

    Equals e^(+i(f0 x + g0 t) ad sigma3) N(inf)^(-1) N(z) with the N-matrix
    built like mu_ag but with phi - delta; this conjugation direction is the
    one whose jump matches the shifted band jump and whose first moment
    reproduces -(i/2) q^(AG)(x, t; phi - delta).
    """
    phases = ev.spec.phases - np.asarray(delta_vec, dtype=float) \
        if ev.spec.genus else ev.spec.phases
    mu = mu_ag(z, x, t, ev, side=side, phases=phases)
    osc = np.exp(2j * (ev.pd.f0 * x + ev.pd.g0 * t))
    out = mu.copy()
    out[0, 1] *= osc
    out[1, 0] /= osc
    return out
