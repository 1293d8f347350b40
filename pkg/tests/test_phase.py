import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from fgnls.phase import (
    F_coeffs,
    F_value,
    classify_region,
    local_coefficients,
    saddle_point,
    solve_phase_polynomials,
    theta_at_upper_edge,
    theta_phase,
)
from fgnls.errors import WrongRegime
from fgnls.spectrum import evaluate_w, validate_spectrum

G0 = validate_spectrum([-1], [1], [])
SYM1 = validate_spectrum([-2, 1], [-1, 2], [0.0])
GEN2 = validate_spectrum([-3, -1, 2], [-2, 1, 4], [0.0, 0.0])


@pytest.fixture(scope="module")
def pd0():
    return solve_phase_polynomials(G0)


@pytest.fixture(scope="module")
def pd1():
    return solve_phase_polynomials(SYM1)


@pytest.fixture(scope="module")
def pd2():
    return solve_phase_polynomials(GEN2)


def test_genus0_closed_forms(pd0):
    assert pd0.zf == pytest.approx([0.0], abs=1e-12)
    assert pd0.g_num == pytest.approx([-2.0, 0.0, 4.0], abs=1e-12)
    assert pd0.zg == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)], abs=1e-12)
    assert pd0.f0 == pytest.approx(0.0, abs=1e-11)
    assert pd0.g0 == pytest.approx(-1.0, abs=1e-11)
    assert pd0.xi_lower[0] == pytest.approx(2.0, abs=1e-11)
    assert pd0.xi_upper[0] == pytest.approx(-2.0, abs=1e-11)


def test_genus0_f_g_match_closed_forms(pd0):
    # f(z) = sqrt(z^2-1), g(z) = 2 z sqrt(z^2-1) for bands [-1, 1]
    from fgnls.surface import path_integral
    for z in (3.0, -2.5, 1.7):
        w = np.real(evaluate_w(z, G0))
        assert path_integral(pd0.f_num, z, G0) == pytest.approx(w, abs=1e-11)
        assert path_integral(pd0.g_num, z, G0) == pytest.approx(2 * z * w, abs=1e-10)


def test_genus1_symmetric_even_numerator(pd1):
    # configuration symmetry kills the linear coefficient
    assert abs(pd1.f_num[1]) < 1e-10
    assert pd1.f_num[2] == pytest.approx(1.0)


def test_band_periods_vanish(pd2):
    from fgnls.surface import band_moment
    for j in (1, 2):
        for num in (pd2.f_num, pd2.g_num):
            val = band_moment(GEN2, j, lambda s: P.polyval(s, num))
            assert abs(val) < 1e-9


def test_one_f_root_per_band(pd2):
    for k in range(3):
        a, b = GEN2.band(k)
        assert np.sum((pd2.zf > a) & (pd2.zf < b)) == 1


def test_theta_real_at_base_point(pd1):
    for xi in (-3.0, 0.4, 2.0):
        val = theta_phase(float(SYM1.edges_upper[0]), xi, pd1)
        assert abs(np.imag(val)) < 1e-10
        assert np.real(val) == pytest.approx(pd1.f0 * xi + pd1.g0, abs=1e-10)


def test_theta_equal_at_band_ends(pd2):
    for j in (1, 2):
        for xi in (-1.0, 3.0):
            ta = theta_phase(float(GEN2.edges_lower[j]), xi, pd2)
            tb = theta_phase(float(GEN2.edges_upper[j]), xi, pd2)
            assert np.real(ta) == pytest.approx(np.real(tb), abs=1e-9)
            assert abs(np.imag(ta)) < 1e-9 and abs(np.imag(tb)) < 1e-9


def test_theta_plus_minus_band_identity(pd1):
    # theta_+ + theta_- = 2 f0 xi + 2 g0 - B_j^f xi - B_j^g on band j
    xi = 0.7
    for j, x in ((1, 1.4),):
        tp = theta_phase(x, xi, pd1, side="plus")
        tm = theta_phase(x, xi, pd1, side="minus")
        rhs = 2 * pd1.f0 * xi + 2 * pd1.g0 - pd1.bf[j - 1] * xi - pd1.bg[j - 1]
        assert tp + tm == pytest.approx(rhs, abs=1e-9)


def test_edge_velocity_roots(pd2):
    scale = np.max(np.abs(pd2.g_num))
    for j in range(3):
        assert abs(F_value(GEN2.edges_lower[j], pd2.xi_lower[j], pd2)) < 1e-11 * scale
        assert abs(F_value(GEN2.edges_upper[j], pd2.xi_upper[j], pd2)) < 1e-11 * scale


def test_saddle_at_edge_velocity(pd0):
    res = saddle_point(pd0.xi_upper[0], pd0)
    assert res.z0 == pytest.approx(1.0, abs=1e-10)


def test_saddle_offband_example(pd0):
    res = saddle_point(6.0, pd0)
    assert res.case_tag == "off_band"
    assert res.z0 == pytest.approx((-6 - np.sqrt(68)) / 8, abs=1e-12)
    assert res.region == "III"


def test_saddle_inband_example(pd0):
    res = saddle_point(0.0, pd0)
    assert res.case_tag == "in_band"
    assert res.z0 == pytest.approx(-1 / np.sqrt(2), abs=1e-12)
    assert res.other_root == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert res.region == "IV"


def test_saddle_monotone_decreasing(pd1):
    # strictly decreasing on each maximal interval of the decomposition
    intervals = [
        np.linspace(pd1.xi_lower[0] + 1e-6, pd1.xi_lower[0] + 4.0, 30),     # j=0
        np.linspace(pd1.xi_lower[1] + 1e-6, pd1.xi_upper[0] - 1e-6, 30),    # gap
        np.linspace(pd1.xi_upper[1] - 4.0, pd1.xi_upper[1] - 1e-6, 30),     # right
        np.linspace(pd1.xi_upper[0] + 1e-6, pd1.xi_lower[0] - 1e-6, 30),    # band 0
    ]
    for xs in intervals:
        z = np.array([saddle_point(float(x), pd1).z0 for x in xs])
        assert np.all(np.diff(z) < 0)


def test_classify_region(pd0):
    assert classify_region(-2.0, 50.0, 1.0, pd0) == ("I", 0)
    assert classify_region(0.0, 100.0, 1.0, pd0) == ("IV", 0)
    assert classify_region(6.0, 100.0, 1.0, pd0) == ("III", 0)
    assert classify_region(-6.0, 100.0, 1.0, pd0) == ("III", 1)
    assert classify_region(2.0 + 1e-3, 10.0, 1.0, pd0) == ("II", 0)


def test_local_coefficients_examples(pd0):
    # theta2 carries the quadratic-model normalization dF/dz / (2 w): the
    # bare dF/dz / w ratio at this velocity is about 5.60
    sad = local_coefficients("saddle", 6.0, pd0)
    z0 = (-6 - np.sqrt(68)) / 8
    w0 = -np.sqrt(z0**2 - 1)
    assert (6 + 8 * z0) / w0 == pytest.approx(5.599, abs=1e-2)
    assert sad["theta2"] == pytest.approx((6 + 8 * z0) / (2 * w0), rel=1e-12)

    up = local_coefficients("upper_edge", -2.0, pd0, j0=0)
    assert up["theta3"] == pytest.approx(-6 / np.sqrt(2), rel=1e-12)
    assert up["theta1"] == pytest.approx(-np.sqrt(2), rel=1e-12)


def test_cubic_edge_model(pd0):
    # theta(Ehat0 + h) = theta0 + (xi - xihat0) theta1 h^(1/2)
    #                    + (2/3) theta3 h^(3/2) + O(h^(5/2))
    for xi in (-2.0, -1.9):
        up = local_coefficients("upper_edge", xi, pd0, j0=0)
        t0 = theta_at_upper_edge(0, xi, pd0)
        errs = []
        for h in (1e-3, 1e-4):
            val = np.real(theta_phase(1.0 + h, xi, pd0))
            model = (t0 + (xi - pd0.xi_upper[0]) * up["theta1"] * np.sqrt(h)
                     + 2.0 / 3.0 * up["theta3"] * h**1.5)
            errs.append(abs(val - model))
        order = np.log10(errs[0] / errs[1])
        assert order >= 2.3   # h^(5/2) remainder


def test_local_coefficients_wrong_regime(pd0):
    with pytest.raises(WrongRegime):
        local_coefficients("saddle", 0.0, pd0)   # in-band saddle
    with pytest.raises(WrongRegime):
        local_coefficients("upper_edge", -12.0, pd0, j0=0)  # theta3 changes sign


def theta_increment(z0, h, xi, pd):
    """theta(z0+h) - theta(z0) by tight quadrature over the short segment."""
    from fgnls._quad import gauss_adaptive
    from fgnls.phase import F_coeffs
    from fgnls.spectrum import evaluate_w
    from numpy.polynomial import polynomial as P

    Fc = F_coeffs(xi, pd)

    def integrand(s):
        return P.polyval(s, Fc) / np.real(evaluate_w(s + 0j, pd.spec))

    return -gauss_adaptive(integrand, z0, z0 + h, rtol=1e-15)


def test_quadratic_local_model(pd0):
    # |theta(z0+h) - theta(z0) + theta2 h^2| = O(h^3), observed order >= 2.9
    xi = 6.0
    sad = local_coefficients("saddle", xi, pd0)
    z0, th2 = sad["z0"], sad["theta2"]
    errs = []
    for h in (1e-3, 1e-4):
        inc = theta_increment(z0, h, xi, pd0)
        errs.append(abs(inc + th2 * h * h))
    order = np.log10(errs[0] / errs[1])
    assert order >= 2.9


def test_second_difference_matches_theta2(pd0):
    xi = 6.0
    sad = local_coefficients("saddle", xi, pd0)
    z0, th2 = sad["z0"], sad["theta2"]
    h = 1e-4
    d2 = (theta_increment(z0, h, xi, pd0) + theta_increment(z0, -h, xi, pd0)) / h**2
    assert np.real(d2) == pytest.approx(-2 * th2, rel=1e-6)


def test_signature_rays_region3(pd0):
    # Im theta < 0 on z0 + e^{i phi0} R+, > 0 on the mirrored ray (phi0 = pi/4)
    xi = 6.0
    z0 = saddle_point(xi, pd0).z0
    for r in (1e-3, 1e-2, 5e-2):
        below = theta_phase(z0 + r * np.exp(1j * np.pi / 4), xi, pd0)
        above = theta_phase(z0 + r * np.exp(3j * np.pi / 4), xi, pd0)
        assert np.imag(below) < 0
        assert np.imag(above) > 0


def test_theta_upper_edge_closed_form(pd1):
    xi = pd1.xi_upper[1]
    ref = theta_phase(float(SYM1.edges_upper[1]), xi, pd1)
    assert theta_at_upper_edge(1, xi, pd1) == pytest.approx(np.real(ref), abs=1e-9)
