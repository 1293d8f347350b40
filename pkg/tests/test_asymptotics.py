import numpy as np
import pytest

from fgnls.asymptotics import AsymptoticBundle, asymptote, h_coefficients
from fgnls.background import build_background, q_ag
from fgnls.errors import RegionMismatch
from fgnls.painleve34 import a_of_s, solve_p34
from fgnls.scattering import synthetic_reflection
from fgnls.spectrum import validate_spectrum

G0 = validate_spectrum([-1], [1], [])


@pytest.fixture(scope="module")
def ev0():
    return build_background(G0)


@pytest.fixture(scope="module")
def p34():
    return solve_p34(12.0)


@pytest.fixture(scope="module")
def zero_bundle(ev0, p34):
    return AsymptoticBundle(ev0, synthetic_reflection(G0, "zero"), p34)


@pytest.fixture(scope="module")
def gauss_bundle(ev0, p34):
    sd = synthetic_reflection(G0, "gaussian", peak=0.5, center=-3.0, width=0.7)
    return AsymptoticBundle(ev0, sd, p34)


def test_trivial_perturbation_equals_background(zero_bundle, ev0):
    rng = np.random.default_rng(11)
    for _ in range(40):
        t = rng.uniform(10, 200)
        x = rng.uniform(-8, 8) * t
        res = asymptote(x, t, zero_bundle)
        assert res.correction == 0.0
        assert res.value == pytest.approx(q_ag(x, t, ev0), abs=1e-12)


def test_region4_trivial_value(zero_bundle):
    res = asymptote(0.0, 100.0, zero_bundle)
    assert res.region == "IV"
    # g0 is a quadrature constant, so the phase error grows ~ t * 1e-13
    assert res.value == pytest.approx(1j * np.exp(-200j), abs=1e-10)


def test_s_pinned_at_transition_edge(gauss_bundle, ev0):
    t = 50.0
    x = ev0.pd.xi_upper[0] * t
    res = asymptote(x, t, gauss_bundle)
    assert res.region == "I"
    assert res.s_value == pytest.approx(0.0, abs=1e-12)
    H = h_coefficients("I", 0, x, t, gauss_bundle)
    a0 = a_of_s(0.0, gauss_bundle.p34)
    assert res.correction == pytest.approx(H * a0 * t ** (-1 / 3), rel=1e-12)


def test_h_modulus_genus0(zero_bundle):
    # |H| = |theta3(xihat_0)|^(-1/3) sqrt(Ehat_0 - E_0) at genus 0
    H = h_coefficients("I", 0, -2.0 * 30.0, 30.0, zero_bundle)
    assert abs(H) == pytest.approx((6 / np.sqrt(2)) ** (-1 / 3) * np.sqrt(2),
                                   rel=1e-10)
    # modulus is x,t independent at genus 0
    H2 = h_coefficients("I", 0, -2.0 * 77.0, 77.0, zero_bundle)
    assert abs(H2) == pytest.approx(abs(H), rel=1e-12)


def test_decay_wiring_region1(gauss_bundle, ev0):
    # fix s by co-varying xi with t: |correction| * t^(1/3) is constant
    pd = ev0.pd
    from fgnls.phase import local_coefficients
    vals = []
    s_star = 0.7
    for t in (40.0, 80.0, 160.0):
        xi_hat = pd.xi_upper[0]
        dxi = 0.0
        for _ in range(40):   # pin s exactly: theta3 depends weakly on xi
            coeffs = local_coefficients("upper_edge", xi_hat + dxi, pd, j0=0)
            dxi = -s_star * np.abs(coeffs["theta3"]) ** (1 / 3) \
                / coeffs["theta1"] * t ** (-2 / 3)
        res = asymptote((xi_hat + dxi) * t, t, gauss_bundle)
        assert res.region == "I"
        assert res.s_value == pytest.approx(s_star, abs=1e-10)
        vals.append(abs(res.correction) * t ** (1 / 3))
    assert np.max(vals) - np.min(vals) <= 1e-4 * np.max(vals)


def test_region3_decay_bounded(gauss_bundle):
    vals = []
    for t in (20.0, 40.0, 80.0):
        res = asymptote(6.0 * t, t, gauss_bundle)
        assert res.region == "III"
        vals.append(abs(res.correction) * np.sqrt(t))
    assert np.max(vals) <= 1.5 * np.min(vals)


def test_continuity_handoff(gauss_bundle, ev0):
    # at the region I/IV boundary the two expressions differ by the
    # correction term plus the delta-family mismatch
    t = 60.0
    C = gauss_bundle.transition_constant
    xi = ev0.pd.xi_upper[0] + 1.0001 * C * t ** (-2 / 3)
    res_iv = asymptote(xi * t, t, gauss_bundle)
    assert res_iv.region == "IV"
    xi2 = ev0.pd.xi_upper[0] + 0.9999 * C * t ** (-2 / 3)
    res_i = asymptote(xi2 * t, t, gauss_bundle)
    assert res_i.region == "I"
    gap = abs(res_i.value - res_iv.value)
    bound = abs(res_i.correction) + 0.05 * abs(res_iv.leading)
    assert gap <= bound


def test_tmin_raises(zero_bundle):
    with pytest.raises(RegionMismatch):
        asymptote(0.0, 5.0, zero_bundle)


def test_region2_correction_finite(gauss_bundle, ev0):
    # region II needs data on (Ehat_0, inf): use a two-sided profile
    sd = synthetic_reflection(G0, "gaussian", peak=0.4, center=3.0, width=0.8)
    bundle = AsymptoticBundle(ev0, sd, gauss_bundle.p34)
    t = 50.0
    x = ev0.pd.xi_lower[0] * t
    res = asymptote(x, t, bundle)
    assert res.region == "II"
    assert np.isfinite(res.correction)
    assert res.s_value == pytest.approx(0.0, abs=1e-12)
