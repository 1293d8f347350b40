import numpy as np
import pytest

from fgnls.spectrum import abs_w, validate_spectrum
from fgnls.surface import (
    ThetaParams,
    abel_map,
    build_differentials,
    build_period_matrix,
    build_surface,
    divisor,
    log_theta_batch,
    riemann_constants,
    theta,
)

SYM1 = validate_spectrum([-2, 1], [-1, 2], [0.0])
WIDE1 = validate_spectrum([-10, 9], [-9, 10], [0.0])
GEN2 = validate_spectrum([-3, -1, 2], [-2, 1, 4], [0.0, 0.0])


def chebyshev_band_oracle(spec, k, g, order=4000):
    """Independent Gauss-Chebyshev rule for int_band g(s)/|w(s)| ds."""
    j = np.arange(1, order + 1)
    x = np.cos((2 * j - 1) * np.pi / (2 * order))
    a, b = spec.band(k)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    s = mid + half * x
    rest = abs_w(s, spec) / np.sqrt((s - a) * (b - s))
    return np.pi / order * np.sum(g(s) / rest)


def test_genus1_differential_vs_chebyshev_oracle():
    c = build_differentials(SYM1)
    assert c.shape == (1, 1)
    assert np.isreal(c[0, 0]) and c[0, 0] != 0.0
    # counterclockwise a-period of omega_1 must be 1; band sign on band 1 is +1
    aper = -2.0 * chebyshev_band_oracle(SYM1, 1, lambda s: c[0, 0] * np.ones_like(s))
    assert aper == pytest.approx(1.0, abs=1e-10)


def test_genus1_aperiod_restated():
    c = build_differentials(SYM1)
    from fgnls.surface import band_moment
    aper = -2.0 * SYM1.band_sign(1) * band_moment(SYM1, 1, lambda s: c[0, 0] * np.ones_like(s))
    assert aper == pytest.approx(1.0, abs=1e-10)


def test_genus0_empty():
    spec = validate_spectrum([-1], [1], [])
    assert build_differentials(spec).shape == (0, 0)
    assert build_period_matrix(spec, np.zeros((0, 0))).shape == (0, 0)
    assert riemann_constants(np.zeros((0, 0))).size == 0
    assert divisor(spec).size == 0


def test_period_matrix_symmetric_positive():
    surf = build_surface(GEN2)
    B = surf.period_matrix
    assert np.max(np.abs(B - B.T)) < 1e-10
    assert np.max(np.abs(np.real(B))) < 1e-10
    assert np.linalg.eigvalsh(np.imag(B))[0] > 0


def test_genus1_symmetric_period_pure_imaginary():
    B = build_period_matrix(SYM1, build_differentials(SYM1))
    assert B[0, 0].real == pytest.approx(0.0, abs=1e-12)
    assert B[0, 0].imag > 0


def test_period_monotone_with_gap_width():
    B_narrow = build_period_matrix(SYM1, build_differentials(SYM1))
    B_wide = build_period_matrix(WIDE1, build_differentials(WIDE1))
    assert B_wide[0, 0].imag > B_narrow[0, 0].imag


def test_riemann_constants_examples():
    K1 = riemann_constants(np.array([[1j]]))
    assert K1[0] == pytest.approx(1j + 0.5)
    K2 = riemann_constants(1j * np.eye(2))
    assert K2[0] == pytest.approx(1j + 0.5)
    assert K2[1] == pytest.approx(1j + 1.0)


def test_theta_genus1_lattice_oracle():
    B = np.array([[1j]])
    # direct summation oracle sum exp(-pi m^2)
    m = np.arange(-12, 13)
    ref = np.sum(np.exp(-np.pi * m**2))
    assert theta(np.zeros(1), B) == pytest.approx(ref, rel=1e-13)
    assert theta(np.zeros(1), B) == pytest.approx(1.08643481, abs=1e-8)


@pytest.mark.parametrize("B", [np.array([[1j]]),
                               np.array([[2j, 0.5 + 0.1j], [0.5 + 0.1j, 1.5j]])])
def test_theta_periodicity_evenness(B):
    rng = np.random.default_rng(7)
    n = B.shape[0]
    for _ in range(100):
        l = rng.normal(size=n) + 1j * rng.normal(scale=0.5, size=n)
        t0 = theta(l, B)
        j = rng.integers(n)
        e = np.zeros(n)
        e[j] = 1.0
        assert abs(theta(l + e, B) - t0) <= 1e-10 * abs(t0)
        assert abs(theta(-l, B) - t0) <= 1e-10 * abs(t0)


@pytest.mark.parametrize("B", [np.array([[1j]]),
                               np.array([[2j, 0.5 + 0.1j], [0.5 + 0.1j, 1.5j]])])
def test_theta_quasi_periodicity(B):
    rng = np.random.default_rng(8)
    n = B.shape[0]
    for _ in range(100):
        l = rng.normal(size=n) + 1j * rng.normal(scale=0.5, size=n)
        t0 = theta(l, B)
        j = rng.integers(n)
        e = np.zeros(n)
        e[j] = 1.0
        for sgn in (+1, -1):
            fac = np.exp(-sgn * 2j * np.pi * l[j] - 1j * np.pi * B[j, j])
            val = theta(l + sgn * (B @ e), B)
            assert abs(val - fac * t0) <= 1e-10 * abs(fac * t0)


def test_theta_truncation_radius_stability():
    B = np.array([[2j, 0.5 + 0.1j], [0.5 + 0.1j, 1.5j]])
    l = np.array([0.3 + 0.2j, -0.1 + 0.4j])
    loose = ThetaParams(tol=1e-13, max_radius=80)
    tight = ThetaParams(tol=1e-20, max_radius=160)
    assert theta(l, B, loose) == pytest.approx(theta(l, B, tight), abs=1e-12)


def test_theta_large_imaginary_argument_stable():
    B = np.array([[1j]])
    # huge shift along B Z^n: value must follow the quasi-periodicity factor
    l0 = np.array([0.3 + 0.11j])
    k = 500.0
    lg = log_theta_batch(np.array([l0 + k * B[:, 0]]), B)[0]
    ref = (np.log(theta(l0, B)) - 2j * np.pi * k * l0[0]
           - 1j * np.pi * k**2 * B[0, 0])
    assert np.exp(lg - ref) == pytest.approx(1.0, rel=1e-9)


def test_divisor_examples():
    assert divisor(SYM1) == pytest.approx(np.array([0.0]), abs=1e-13)
    spec = validate_spectrum([-3, 1], [-1, 2], [0.0])
    assert divisor(spec) == pytest.approx(np.array([1.0 / 3.0]), abs=1e-12)
    pts = divisor(GEN2)
    for k in range(1, 3):
        a, b = GEN2.gap(k)
        assert a < pts[k - 1] < b
    # defining identity
    for x in pts:
        lhs = np.prod(x - GEN2.edges_lower)
        rhs = np.prod(x - GEN2.edges_upper)
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_abel_base_point_zero():
    surf = build_surface(SYM1)
    assert np.max(np.abs(abel_map(float(SYM1.edges_upper[0]), surf))) < 1e-12


def test_abel_halfperiod_at_E1():
    # 2 * int_{Ehat_0}^{E_1} omega_1 = B_11 (gap-sum form of the b-period)
    surf = build_surface(SYM1)
    val = abel_map(float(SYM1.edges_lower[1]), surf)
    assert 2.0 * val[0] == pytest.approx(surf.period_matrix[0, 0], abs=1e-11)


def test_abel_infinity_vs_split_oracle():
    surf = build_surface(SYM1)
    # oracle: integrate along the axis to 1e3 by brute quadrature, add tail
    from fgnls.surface import path_integral
    from fgnls._quad import tail_integral
    from fgnls.spectrum import evaluate_w
    c = surf.diff_coeffs[0]
    main = path_integral(c, 1e3, surf.spec)
    p = np.polynomial.Polynomial(c)
    tail = tail_integral(lambda s: p(s) / np.real(evaluate_w(s + 0j, surf.spec)), 1e3)
    ref = 1j * (main + tail)
    got = surf.abel_infinity[0]
    assert got == pytest.approx(ref, abs=1e-9)


def test_abel_lower_sheet_negates():
    surf = build_surface(GEN2)
    up = abel_map(0.5 + 0.8j, surf, sheet="upper")
    lowv = abel_map(0.5 + 0.8j, surf, sheet="lower")
    assert np.allclose(up, -lowv, atol=1e-13)
