"""Long-time asymptotics of the perturbed solution in the four velocity
regions: leading background term with shifted phases plus the
region-specific subleading correction.

Regions I/II carry the t^(-1/3) correction H * a(s) built from the
Painleve XXXIV integral; region III carries the t^(-1/2)
parabolic-cylinder correction; region IV is leading-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .background import BackgroundEvaluator, global_parametrix, q_ag
from .deltas import DeltaData, build_delta
from .errors import MissingScatteringCoverage, RegionMismatch
from .painleve34 import P34Table, a_of_s
from .phase import classify_region, local_coefficients, theta_at_upper_edge
from .scattering import ScatteringData, r0_and_betas

__all__ = ["AsymptoticBundle", "AsymptoticResult", "asymptote", "h_coefficients"]


@dataclass(frozen=True)
class AsymptoticBundle:
    """Everything the main-theorem formulas need, with a delta cache."""

    ev: BackgroundEvaluator
    sd: ScatteringData
    p34: P34Table
    transition_constant: float = 1.0
    t_min: float = 10.0
    _delta_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def delta(self, family: str, j0: int | None = None,
              xi: float | None = None) -> DeltaData:
        key = (family, j0) if family in ("I", "II") else (family, round(float(xi), 12))
        hit = self._delta_cache.get(key)
        if hit is None:
            hit = build_delta(family, self.ev.spec, self.sd,
                              pd=self.ev.pd, j0=j0, xi=xi)
            if len(self._delta_cache) > 256:
                self._delta_cache.clear()
            self._delta_cache[key] = hit
        return hit


@dataclass(frozen=True)
class AsymptoticResult:
    region: str
    index: int
    leading: complex
    correction: complex
    s_value: float | None
    error_order: str

    @property
    def value(self) -> complex:
        return self.leading + self.correction


def _leading(x, t, dd: DeltaData, ev: BackgroundEvaluator) -> complex:
    phases = ev.spec.phases - dd.delta_j if ev.spec.genus else ev.spec.phases
    return np.exp(-2.0 * dd.delta_inf) * q_ag(x, t, ev, phases=phases)


def h_coefficients(region: str, j0: int, x: float, t: float,
                   bundle: AsymptoticBundle, dd: DeltaData | None = None) -> complex:
    """The transition-region coefficients H (region I) and H-tilde (II).

    Built from the edge-gap products, the |theta^(3)|^(-1/3) factor, the
    oscillatory phase at the edge, and the squared theta quotient of the
    shifted background.
    """
    ev = bundle.ev
    spec, pd = ev.spec, ev.pd
    if region not in ("I", "II"):
        raise RegionMismatch(f"H coefficients exist for regions I/II, not {region}")
    if dd is None:
        dd = bundle.delta(region, j0=j0)
    xi = x / t
    phi_j0 = spec.phases[j0 - 1] if j0 >= 1 else 0.0
    delta_j0 = dd.delta_j[j0 - 1] if j0 >= 1 else 0.0
    theta_edge = theta_at_upper_edge(j0, xi, pd)   # theta(E_j0) = theta(Ehat_j0)

    if region == "I":
        e = float(spec.edges_upper[j0])
        xi_star = pd.xi_upper[j0]
        coeffs = local_coefficients("upper_edge", xi_star, pd, j0=j0)
        ratio = (np.prod(e - spec.edges_lower)
                 / np.prod(np.delete(e - spec.edges_upper, j0)))
        pre = 1.0 + 0.0j
    else:
        e = float(spec.edges_lower[j0])
        xi_star = pd.xi_lower[j0]
        coeffs = local_coefficients("lower_edge", xi_star, pd, j0=j0)
        ratio = (np.prod(e - spec.edges_upper)
                 / np.prod(np.delete(e - spec.edges_lower, j0)))
        pre = np.exp(0.5j * np.pi)
    theta3_star = coeffs["theta3"]

    if spec.genus == 0:
        quot = 1.0 + 0.0j
    else:
        from .background import _f_entries
        az = ev.abel(e)
        phases = spec.phases - dd.delta_j
        C = ev.winding(x, t, phases)
        lf = _f_entries(ev, az, C)[0]
        linf = _f_entries(ev, ev.a_inf, C)[0]
        quot = np.exp(lf[0] - linf[0])

    return (pre
            * np.exp(1j * (t * theta_edge - phi_j0 + delta_j0)
                     - 2.0 * dd.delta_inf)
            / np.abs(theta3_star) ** (1.0 / 3.0)
            * np.sqrt(complex(ratio)) * quot**2)


def asymptote(x: float, t: float, bundle: AsymptoticBundle) -> AsymptoticResult:
    """Evaluate the main-theorem approximation at (x, t)."""
    if t < bundle.t_min:
        raise RegionMismatch(f"t = {t} below t_min = {bundle.t_min}")
    ev, sd, pd = bundle.ev, bundle.sd, bundle.ev.pd
    xi = x / t
    region, idx = classify_region(xi, t, bundle.transition_constant, pd)

    if sd.is_zero:
        # trivial perturbation: the inverse problem is the background itself
        return AsymptoticResult(region, idx, q_ag(x, t, ev), 0.0 + 0.0j,
                                None, "exact")

    if region in ("I", "II"):
        dd = bundle.delta(region, j0=idx)
        lead = _leading(x, t, dd, ev)
        kind = "upper_edge" if region == "I" else "lower_edge"
        coeffs = local_coefficients(kind, xi, pd, j0=idx)
        xi_star = pd.xi_upper[idx] if region == "I" else pd.xi_lower[idx]
        s = (-coeffs["theta1"] / np.abs(coeffs["theta3"]) ** (1.0 / 3.0)
             * (xi - xi_star) * t ** (2.0 / 3.0))
        H = h_coefficients(region, idx, x, t, bundle, dd=dd)
        sign = 1.0 if region == "I" else -1.0
        corr = sign * H * a_of_s(float(s), bundle.p34) * t ** (-1.0 / 3.0)
        return AsymptoticResult(region, idx, lead, complex(corr), float(s),
                                "t^-epsilon")

    dd = bundle.delta("III", xi=xi)
    lead = _leading(x, t, dd, ev)
    if region == "IV":
        return AsymptoticResult(region, idx, lead, 0.0 + 0.0j, None, "t^-1")

    rb = r0_and_betas(xi, t, sd, pd, delta_data=dd)
    z0, theta2 = rb["z0"], rb["theta2"]
    M = global_parametrix(z0, x, t, dd.delta_j, ev)
    corr = (2j * np.exp(-2.0 * dd.delta_inf)
            / (2.0 * np.sqrt(theta2))
            * (rb["beta21"] * M[0, 0] ** 2 - rb["beta12"] * M[0, 1] ** 2)
            / np.sqrt(t))
    return AsymptoticResult(region, idx, lead, complex(corr), None, "t^-1")
