import numpy as np
import pytest

from fgnls.background import build_background, q_ag
from fgnls.errors import EdgeTooClose, ProfileViolation, SpectralSingularity
from fgnls.scattering import (
    PerturbedInitialData,
    build_scattering_data,
    perturbation_profile,
    r0_and_betas,
    reflections,
    scatter,
    synthetic_reflection,
    spectral_grid,
)
from fgnls.phase import solve_phase_polynomials
from fgnls.spectrum import validate_spectrum

G0 = validate_spectrum([-1], [1], [])


@pytest.fixture(scope="module")
def ev0():
    return build_background(G0)


@pytest.fixture(scope="module")
def sech_data(ev0):
    sampler = perturbation_profile("sech", ev0, amplitude=0.1, support=9.0)
    return PerturbedInitialData(10.0, sampler, ev0)


@pytest.fixture(scope="module")
def ev1():
    return build_background(validate_spectrum([-2, 1], [-1, 2], [0.3]))


def test_zero_perturbation_identity(ev0):
    data = PerturbedInitialData(6.0, perturbation_profile("none", ev0), ev0)
    for z in (2.0, -3.0, 5.5):
        S = scatter(z, data)
        assert np.max(np.abs(S - np.eye(2))) < 1e-10


def test_unimodular_and_symmetries(sech_data):
    zs = (-4.0, -2.1, 1.5, 2.0, 3.7, 6.0, -7.3, 8.0)
    for z in zs:
        S = scatter(z, sech_data)
        assert np.linalg.det(S) == pytest.approx(1.0, abs=1e-8)
        assert S[0, 0] == pytest.approx(np.conj(S[1, 1]), abs=1e-8)
        assert abs(S[0, 0]) >= 1.0 - 1e-9
        r1, r2, r3, r4 = reflections(S)
        assert r1 == pytest.approx(np.conj(r2), abs=1e-8)
        assert r3 == pytest.approx(np.conj(r4), abs=1e-8)
        assert np.real(r1 * r2) < 1.0


def test_matching_radius_independence(ev0):
    sampler = perturbation_profile("sech", ev0, amplitude=0.1, support=9.0)
    d1 = PerturbedInitialData(10.0, sampler, ev0)
    d2 = PerturbedInitialData(12.0, sampler, ev0)
    for z in (1.8, -3.0):
        S1 = scatter(z, d1)
        S2 = scatter(z, d2)
        assert np.max(np.abs(S1 - S2)) < 1e-7


def test_large_z_decay(ev0):
    sampler = perturbation_profile("sech", ev0, amplitude=0.1, width=0.6,
                                   support=4.5)
    data = PerturbedInitialData(5.0, sampler, ev0)
    S = scatter(1e3, data, rtol=1e-11)
    r1, r2, r3, r4 = reflections(S)
    for r in (r1, r2, r3, r4):
        assert abs(r) < 1e-2
    assert abs(S[0, 1]) < 1e-2 and abs(S[1, 0]) < 1e-2
    assert abs(S[0, 0] - 1.0) < 1e-2


def test_gauge_time_invariance(ev0):
    # evolving the data and re-scattering at t = 0.5 returns the same S
    from fgnls.nls_direct import SimulationConfig, evolve, make_initial

    sampler = perturbation_profile("sech", ev0, amplitude=0.1, support=9.0)
    data0 = PerturbedInitialData(10.0, sampler, ev0)
    cfg = SimulationConfig(60.0, 4096, 0.0004, 0.5, snapshot_times=(0.5,))
    snap = evolve(make_initial(ev0, cfg, sampler), cfg, ev0)[-1]
    from scipy.interpolate import CubicSpline
    re = CubicSpline(snap.x_grid, np.real(snap.q))
    im = CubicSpline(snap.x_grid, np.imag(snap.q))

    def window(x, x0=15.0, x1=15.9):
        r = np.abs(np.asarray(x, dtype=float))
        out = np.ones_like(r)
        ramp = (r > x0) & (r < x1)
        out[ramp] = np.cos(0.5 * np.pi * (r[ramp] - x0) / (x1 - x0)) ** 2
        out[r >= x1] = 0.0
        return out

    def q5(x):
        bg = q_ag(np.asarray(x, dtype=float),
                  np.full_like(np.asarray(x, dtype=float), 0.5), ev0)
        raw = re(x) + 1j * im(x)
        return bg + (raw - bg) * window(x)

    data5 = PerturbedInitialData(16.0, q5, ev0, t=0.5)
    for z in (1.8, -2.6):
        S0 = scatter(z, data0)
        S5 = scatter(z, data5)
        assert np.max(np.abs(S0 - S5)) < 1e-4


def test_edge_too_close(ev0, sech_data):
    with pytest.raises(EdgeTooClose):
        scatter(1.0005, sech_data)
    with pytest.raises(EdgeTooClose):
        scatter(0.3, sech_data)


def test_scattering_grid_and_data(ev0, sech_data):
    sd = build_scattering_data(sech_data, smax=8.0, per_interval=10,
                               edge_levels=5, rtol=1e-9)
    assert sd.provenance == "computed"
    assert np.all(np.diff(sd.grid) > 0)
    # interpolants reproduce samples
    i = len(sd.grid) // 3
    z = float(sd.grid[i])
    prod = np.real(sd.r1[i] * sd.r2_samples[i])
    assert sd.log1mr(z) == pytest.approx(np.log1p(-prod), abs=1e-10)
    assert complex(sd.r2(z)) == pytest.approx(complex(sd.r2_samples[i]), abs=1e-9)


def test_synthetic_profiles(ev0):
    sd = synthetic_reflection(G0, "zero")
    assert sd.is_zero
    assert sd.log1mr(np.array([0.5, -3.0])) == pytest.approx([0.0, 0.0])

    sd = synthetic_reflection(G0, "gaussian", peak=0.5, center=-3.0, width=0.7)
    v = sd.log1mr(np.array([-3.0]))
    assert v[0] == pytest.approx(np.log(0.5))
    assert v[0] < 0.0

    sd = synthetic_reflection(G0, "edge_matched", ell=0.3, floor=0.3)
    for d in (1e-2, 1e-4):
        # |r| -> 1 at the band edge at a sqrt(one_minus ~ |s-p|) rate
        one_minus = np.exp(sd.log1mr(np.array([-1.0 - d])))[0]
        assert one_minus == pytest.approx(0.3 + 0.7 * np.tanh(d / 0.3)
                                          * np.tanh((2 + d) / 0.3), rel=1e-6)

    with pytest.raises(ProfileViolation):
        synthetic_reflection(G0, "gaussian", peak=1.2)
    with pytest.raises(ProfileViolation):
        synthetic_reflection(G0, "box", a=0.0, b=2.0)


def test_r0_betas_zero_case(ev0):
    pd = ev0.pd
    sd = synthetic_reflection(G0, "zero")
    out = r0_and_betas(6.0, 20.0, sd, pd)
    assert out["r0"] == 0.0
    assert out["beta12"] == 0.0 and out["beta21"] == 0.0


def test_r0_modulus_and_beta_identity(ev0):
    pd = ev0.pd
    sd = synthetic_reflection(G0, "gaussian", peak=0.5, center=-3.0, width=0.7)
    out = r0_and_betas(6.0, 20.0, sd, pd)
    z0 = out["z0"]
    r2z0 = complex(np.atleast_1d(sd.r2(z0))[0])
    assert abs(out["r0"]) == pytest.approx(abs(r2z0), abs=1e-6)
    assert abs(out["r0"]) < 1.0
    lg = np.log1p(-abs(out["r0"]) ** 2)
    assert out["beta12"] * out["beta21"] == pytest.approx(lg / (2 * np.pi),
                                                          abs=1e-12)
    # |beta12|^2 |beta21|^2 consistency with the PC-parametrix modulus
    assert abs(out["beta12"]) > 0


def test_scatter_genus1_smoke(ev1):
    sampler = perturbation_profile("sech", ev1, amplitude=0.05, width=0.8,
                                   support=5.5)
    data = PerturbedInitialData(6.0, sampler, ev1)
    for z in (3.0, 0.2):
        S = scatter(z, data, rtol=1e-9)
        assert np.linalg.det(S) == pytest.approx(1.0, abs=1e-7)
        assert abs(S[0, 0]) >= 1.0 - 1e-7
