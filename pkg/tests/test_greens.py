import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.special import eval_legendre

from sphere_sumrules.errors import DomainError, SingularPoint
from sphere_sumrules.greens import (ZETA2, dilog, green_closed, green_series, green_series_cesaro,
                                    trilog)


def legendre_moment(q, l):
    # substitution 1 - x = 2 s^2 tames the log endpoint at x = 1
    def integrand(s):
        x = 1.0 - 2.0 * s * s
        if x >= 1.0:
            return 0.0
        return green_closed(q, x) * eval_legendre(l, x) * 4.0 * s
    val, _ = integrate.quad(integrand, 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-13)
    return 2 * math.pi * val


@pytest.mark.parametrize("q", [0, 1, 2])
def test_legendre_moments_and_zero_mean(q):
    assert legendre_moment(q, 0) == pytest.approx(0.0, abs=1e-8)
    for l in range(1, 11):
        assert legendre_moment(q, l) == pytest.approx(1 / (l * (l + 1)) ** (q + 1), abs=1e-8)


@pytest.mark.parametrize("q", [1, 2])
@pytest.mark.parametrize("x", [-0.9, 0.0, 0.9])
def test_series_converges_to_closed_form(q, x):
    assert green_series(q, x, 10_000) == pytest.approx(green_closed(q, x), abs=1e-8)


@pytest.mark.parametrize("x", [-0.9, 0.0, 0.9])
def test_log_kernel_series(x):
    exact = green_closed(0, x)
    assert green_series(0, x, 10_000) == pytest.approx(exact, abs=1e-3)
    assert green_series_cesaro(0, x, 10_000) == pytest.approx(exact, abs=1e-6)


def test_special_points():
    assert green_closed(0, -1.0) == pytest.approx(-1 / (4 * math.pi), abs=1e-15)
    assert green_closed(1, 1.0) == pytest.approx(1 / (4 * math.pi), abs=1e-15)
    # G2 at coincidence equals sum (2l+1)/(l(l+1))^3 / 4pi
    assert green_closed(2, 1.0) == pytest.approx(green_series(2, 1.0, 20_000), abs=1e-10)
    with pytest.raises(SingularPoint):
        green_closed(0, 1.0)
    with pytest.raises(SingularPoint):
        green_closed(1, -1.0)
    with pytest.raises(DomainError):
        green_closed(3, 0.0)
    with pytest.raises(DomainError):
        green_closed(1, 1.5)


def test_array_input_matches_scalar():
    x = np.linspace(-0.99, 0.99, 7)
    out = green_closed(1, x)
    assert out.shape == x.shape
    assert np.allclose(out, [green_closed(1, v) for v in x], rtol=0, atol=0)


@given(st.floats(min_value=-30.0, max_value=1.0, allow_nan=False))
def test_dilog_matches_mpmath(z):
    assert dilog(z) == pytest.approx(float(mpmath.polylog(2, z)), abs=1e-13, rel=1e-13)


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
def test_trilog_matches_mpmath(z):
    assert trilog(z) == pytest.approx(float(mpmath.polylog(3, z)), abs=1e-14, rel=1e-13)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_dilog_reflection(z):
    lhs = dilog(z) + dilog(1 - z)
    assert lhs == pytest.approx(ZETA2 - math.log(z) * math.log1p(-z), abs=1e-12)


def test_polylog_domains():
    with pytest.raises(DomainError):
        dilog(1.5)
    with pytest.raises(DomainError):
        trilog(-1.5)


def test_geodesic_cosine_and_addition_theorem():
    from sphere_sumrules.greens import geodesic_cosine
    from sphere_sumrules.harmonics import ylm
    t1, p1, t2, p2 = 0.4, 1.1, 2.0, -0.3
    x = geodesic_cosine(t1, p1, t2, p2)
    # G^(1)(x) from the addition theorem, summed over harmonics
    total = sum(ylm(l, m, t1, p1) * np.conj(ylm(l, m, t2, p2)) / (l * (l + 1)) ** 2
                for l in range(1, 200) for m in range(-l, l + 1))
    assert total.real == pytest.approx(green_closed(1, x), abs=1e-5)
    assert geodesic_cosine(0.3, 0.2, 0.3, 0.2) == pytest.approx(1.0)
