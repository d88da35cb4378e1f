"""Piecewise-Legendre quadrature building blocks."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncperiods.quadrature import NODES, NPTS, PwPoly, QuadratureError, WEIGHTS, adaptive_pw


def test_gauss_rule():
    assert NPTS == 16
    assert WEIGHTS.sum() == pytest.approx(2.0)
    # exact for polynomials of degree <= 31
    for deg in (0, 7, 16, 31):
        quad = np.sum(WEIGHTS * NODES**deg)
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert quad == pytest.approx(exact, abs=1e-14)


def test_adaptive_oscillatory():
    omega = 37.0
    pw = adaptive_pw(lambda s: np.exp(1j * omega * s), 0.0, 2.0, tol=1e-13)
    exact = (np.exp(2j * omega) - 1.0) / (1j * omega)
    assert abs(pw.integral() - exact) < 1e-12
    # evaluation agrees with the integrand away from panel edges
    s = np.linspace(0.05, 1.95, 11)
    assert np.max(np.abs(pw(s) - np.exp(1j * omega * s))) < 1e-11


def test_antiderivative():
    pw = adaptive_pw(lambda s: np.cos(3 * s), 0.0, 4.0, tol=1e-13)
    F = pw.antiderivative()
    s = np.linspace(0.0, 4.0, 23)
    assert np.max(np.abs(F(s) - np.sin(3 * s) / 3)) < 1e-12
    # vanishes at the left endpoint, continuous across internal breaks
    assert abs(F(0.0)) < 1e-14
    eps = 1e-9
    for br in F.breaks[1:-1]:
        assert abs(F(br - eps) - F(br + eps)) < 1e-8


def test_vector_valued():
    t = np.array([1.0, 2.0, 3.0])

    def fun(s):
        return np.exp(np.outer(-s, t))

    pw = adaptive_pw(fun, 0.0, 5.0, tol=1e-13)
    exact = (1 - np.exp(-5.0 * t)) / t
    assert np.max(np.abs(pw.integral() - exact)) < 1e-12
    assert pw.extra_shape == (3,)


def test_panel_budget():
    # needle far too sharp for 8 panels
    with pytest.raises(QuadratureError):
        adaptive_pw(lambda s: 1.0 / (1e-12 + (s - 0.3) ** 2), 0.0, 1.0,
                    tol=1e-13, max_panels=8)


def test_resolution_tail_small_when_converged():
    pw = adaptive_pw(lambda s: np.sin(s) ** 2, 0.0, 3.0, tol=1e-13)
    assert pw.resolution_tail() < 1e-13 * max(1.0, np.max(np.abs(pw.coeffs)))


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8))
def test_polynomial_exactness(cs):
    """Degree <= 7 polynomials are captured exactly by a single panel fit."""
    p = np.polynomial.Polynomial(cs)
    pw = adaptive_pw(lambda s: p(s), -1.0, 2.0, tol=1e-12, init_panels=1)
    exact = p.integ()(2.0) - p.integ()(-1.0)
    scale = max(1.0, np.max(np.abs(pw.coeffs)))
    assert abs(pw.integral() - exact) < 1e-11 * scale
    s = np.linspace(-1.0, 2.0, 9)
    assert np.max(np.abs(pw(s) - p(s))) < 1e-10 * scale


def test_pwpoly_shape_validation():
    with pytest.raises(ValueError):
        PwPoly(np.array([0.0, 1.0, 2.0]), np.zeros((1, NPTS)))
    with pytest.raises(ValueError):
        adaptive_pw(np.cos, 1.0, 1.0)
