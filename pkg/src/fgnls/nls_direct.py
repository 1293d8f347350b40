"""Direct split-step evolution of the defocusing NLS equation and the
finite-difference residual checker used as the independent oracle.

The genus-0 background is factored out analytically ('plane-wave-modulated
gauge'): q = e^(2i(f0 x + g0 t)) psi turns the background into a constant,
so periodic continuation of compactly supported perturbations is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import BackgroundEvaluator, q_ag
from .errors import AliasingDetected, GridMismatch, StabilityViolation

__all__ = ["SimulationConfig", "FieldSnapshot", "nls_residual", "evolve",
           "evolve_raw", "make_initial", "mass_excess"]

STABILITY_MARGIN = 0.5      # dt <= margin * dx^2 for the Strang splitting


@dataclass(frozen=True)
class SimulationConfig:
    domain_half_width: float
    grid_points: int
    dt: float
    t_final: float
    gauge: str = "plane_wave_modulated"
    snapshot_times: tuple = ()
    aliasing_tol: float = 1e-8

    def __post_init__(self):
        n = self.grid_points
        if n & (n - 1) or n <= 0:
            raise StabilityViolation(f"grid_points = {n} is not a power of two")
        dx = 2.0 * self.domain_half_width / n
        if self.dt > STABILITY_MARGIN * dx * dx:
            raise StabilityViolation(
                f"dt = {self.dt} exceeds {STABILITY_MARGIN} dx^2 = "
                f"{STABILITY_MARGIN * dx * dx:.3e}")
        if self.gauge not in ("plane_wave_modulated", "none"):
            raise StabilityViolation(f"unknown gauge {self.gauge!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.domain_half_width / self.grid_points

    @property
    def x_grid(self) -> np.ndarray:
        n = self.grid_points
        return -self.domain_half_width + self.dx * np.arange(n)


@dataclass(frozen=True)
class FieldSnapshot:
    t: float
    x_grid: np.ndarray
    q: np.ndarray


def make_initial(ev: BackgroundEvaluator, cfg: SimulationConfig,
                 sampler=None) -> FieldSnapshot:
    x = cfg.x_grid
    if sampler is None:
        q = q_ag(x, np.zeros_like(x), ev)
    else:
        q = np.asarray(sampler(x), dtype=complex)
    return FieldSnapshot(0.0, x, q)


def mass_excess(snap: FieldSnapshot, ev: BackgroundEvaluator) -> float:
    """int (|q|^2 - |q_bg|^2) dx over the periodic box."""
    qbg = q_ag(snap.x_grid, np.full_like(snap.x_grid, snap.t), ev)
    dx = snap.x_grid[1] - snap.x_grid[0]
    return float(np.sum(np.abs(snap.q) ** 2 - np.abs(qbg) ** 2) * dx)


def nls_residual(snap_minus: FieldSnapshot, snap_mid: FieldSnapshot,
                 snap_plus: FieldSnapshot) -> float:
    """Sup-norm of the central-difference residual of
    i q_t + q_xx - 2 |q|^2 q at the middle time level."""
    for s in (snap_mid, snap_plus):
        if (s.x_grid.shape != snap_minus.x_grid.shape
                or not np.allclose(s.x_grid, snap_minus.x_grid)):
            raise GridMismatch("snapshots on different x grids")
    dtm = snap_mid.t - snap_minus.t
    dtp = snap_plus.t - snap_mid.t
    if abs(dtm - dtp) > 1e-12 * max(abs(dtm), 1.0):
        raise GridMismatch("snapshots not equispaced in t")
    dx = snap_minus.x_grid[1] - snap_minus.x_grid[0]
    q = snap_mid.q
    qt = (snap_plus.q - snap_minus.q) / (2.0 * dtm)
    qxx = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / (dx * dx)
    res = 1j * qt[1:-1] + qxx - 2.0 * np.abs(q[1:-1]) ** 2 * q[1:-1]
    return float(np.max(np.abs(res)))


def _gauge_constants(ev: BackgroundEvaluator):
    f0, g0 = ev.pd.f0, ev.pd.g0
    c_lin = -(2.0 * g0 + 4.0 * f0 * f0)
    return f0, g0, c_lin


def evolve(q0: FieldSnapshot, cfg: SimulationConfig,
           ev: BackgroundEvaluator) -> list[FieldSnapshot]:
    """Strang split-step evolution in the gauged frame; genus 0 only.

    Returns snapshots at cfg.snapshot_times (rounded to steps) plus the
    final time.
    """
    if ev.spec.genus != 0:
        raise StabilityViolation(
            "time evolution is restricted to genus-0 backgrounds")
    from scipy import fft as sfft

    x = cfg.x_grid
    n = cfg.grid_points
    f0, g0, c_lin = _gauge_constants(ev)
    psi = (q0.q * np.exp(-2j * f0 * x)).astype(complex)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=cfg.dx)
    dt = cfg.dt
    half = np.exp(0.5j * dt * (-k * k - 4.0 * f0 * k + c_lin))
    full = half * half
    tail_mask = np.abs(k) > 0.8 * np.max(np.abs(k))
    steps = int(round(cfg.t_final / dt))
    want = sorted(set(min(steps, max(0, int(round(tt / dt))))
                      for tt in cfg.snapshot_times) | {steps})
    out = []
    check_every = max(1, steps // 50)

    def emit(step, psi_now):
        tt = step * dt
        q = psi_now * np.exp(2j * (f0 * x + g0 * tt))
        out.append(FieldSnapshot(tt, x, q.copy()))

    wi = 0
    if want and want[0] == 0:
        emit(0, psi)
        wi += 1
    # fused Strang sweep: H (N F)^(steps-1) N H with one transform pair per
    # step; emissions close the step with an extra H
    psi = sfft.ifft(sfft.fft(psi) * half)
    for step in range(1, steps + 1):
        psi = psi * np.exp(-2j * dt * np.abs(psi) ** 2)
        spec = sfft.fft(psi)
        if step % check_every == 0 or step == steps:
            amp = np.abs(spec)
            tail = np.max(amp[tail_mask])
            if tail > cfg.aliasing_tol * np.max(amp):
                raise AliasingDetected(
                    f"spectral tail {tail:.2e} at t = {step * dt:.3f}")
        if wi < len(want) and step == want[wi]:
            closed = sfft.ifft(spec * half)
            emit(step, closed)
            wi += 1
            if step < steps:
                psi = sfft.ifft(sfft.fft(closed) * half)
        elif step < steps:
            psi = sfft.ifft(spec * full)
    return out


def evolve_raw(q0: FieldSnapshot, cfg: SimulationConfig,
               ev: BackgroundEvaluator, sponge_width: float = 5.0,
               sponge_rate: float = 4.0) -> FieldSnapshot:
    """Ungauged fallback stepper with a damped boundary layer relaxing the
    field to the background; used to validate the gauged scheme."""
    x = cfg.x_grid
    n = cfg.grid_points
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=cfg.dx)
    dt = cfg.dt
    half = np.exp(-0.5j * dt * k * k)
    L = cfg.domain_half_width
    edge = np.minimum(x - x[0], x[-1] + cfg.dx - x)
    mask = np.exp(-sponge_rate * dt * np.exp(-(edge / sponge_width) ** 2)
                  * (edge < 2 * sponge_width))
    q = q0.q.copy()
    steps = int(round(cfg.t_final / dt))
    for step in range(1, steps + 1):
        qh = np.fft.ifft(np.fft.fft(q) * half)
        qh = qh * np.exp(-2j * dt * np.abs(qh) ** 2)
        q = np.fft.ifft(np.fft.fft(qh) * half)
        t = step * dt
        qbg = q_ag(x, np.full_like(x, t), ev)
        q = qbg + (q - qbg) * mask
    return FieldSnapshot(steps * dt, x, q)
