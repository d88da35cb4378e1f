"""Moments, completed L-values, period polynomials, double moments, shuffle."""

import math
from fractions import Fraction

import numpy as np
import pytest

from ncperiods.iterint import QuadConfig, r_direct
from ncperiods.mlv import (
    PeriodPolynomial,
    clear_caches,
    double_moments,
    double_period_polynomial,
    lambda_probe,
    lambda_value,
    moment,
    moments_table,
    period_polynomial,
    verify_shuffle,
)
from ncperiods.modforms import CuspForm, QSeries, eta_form, form_linear_combination, level_one_basis

PANEL = np.array([-0.7j, -0.4 - 0.6j])


def test_moment_series_oracle(delta):
    """M_k = i^(k+1) k! sum_n tau(n) / (2 pi n)^(k+1), a closed form needing
    no quadrature at all.  At k = 10 the 200-term truncation error is ~1e-22
    relative; at k = 8 the dropped tail itself is the bottleneck (~1e-9)."""
    tight = QuadConfig(quad_tol=1e-14, atol=1e-13)
    for k, rel in ((10, 1e-12), (8, 3e-8)):
        series = sum(
            a.real / (2 * math.pi * (j + 1)) ** (k + 1)
            for j, a in enumerate(delta.expansion.coeffs)
        )
        want = 1j ** (k + 1) * math.factorial(k) * series
        got = moment(delta, k, cfg=tight)
        assert abs(got - want) < rel * abs(want), k


def test_moments_are_completed_l_values(delta):
    """Lambda(f, s) = M_{s-1} / i^s is real for a real-coefficient form."""
    M = moments_table(delta)
    assert M.shape == (11,)
    for s in range(1, 12):
        lam = lambda_value(delta, s)
        assert lam == pytest.approx(complex(M[s - 1] / 1j**s))
        assert abs(lam.imag) < 1e-12 * max(abs(lam), 1.0)
        assert lam.real > 0  # no sign change among critical values of Delta


def test_functional_equation(delta, g16):
    """Lambda(s) = (-1)^(k/2) Lambda(k-s), both sides from different split
    heights so nothing cancels by construction."""
    for f, k in ((delta, 12), (g16, 16)):
        sign = (-1) ** (k // 2)
        for s in range(1, k):
            La = lambda_value(f, s, split=0.7)
            Lb = lambda_value(f, k - s, split=1.3)
            assert abs(La - sign * Lb) < 1e-9 * abs(La), (f.label, s)


def test_lambda_probe_report(delta):
    rep = lambda_probe(delta)
    assert rep["sign"] == 1
    assert rep["max_rel"] < 1e-9
    assert len(rep["rows"]) == 11


def test_period_polynomial_vs_layered_route(delta, g16):
    """p(t) against the single iterated integral, fully independent routes."""
    for f in (delta, g16):
        p = period_polynomial(f)
        direct = r_direct([f], None, 0, PANEL)
        assert np.max(np.abs(p(PANEL) - direct)) < 1e-12
        assert p.degree == int(f.shifted_weight)


def test_double_period_polynomial_vs_layered_route(delta, g16):
    """Order-2: outer form first.  The reversed order must disagree, so the
    match is not an accident of symmetry."""
    p2 = double_period_polynomial(delta, g16)
    fwd = r_direct([delta, g16], None, 0, PANEL)
    rev = r_direct([g16, delta], None, 0, PANEL)
    assert np.max(np.abs(p2(PANEL) - fwd)) < 1e-10
    assert np.max(np.abs(p2(PANEL) - rev)) > 1e-2


def test_double_moments_shape(delta, g16):
    M = double_moments(delta, g16)
    assert M.shape == (11, 15)


def test_shuffle(delta, g16):
    rep = verify_shuffle(delta, delta, PANEL)
    assert rep["max"] < 1e-9 * max(rep["scale"], 1.0)
    rep = verify_shuffle(delta, g16, PANEL)
    assert rep["max"] < 1e-9 * max(rep["scale"], 1.0)


def test_zero_forms(delta):
    b = level_one_basis(12)
    zero = form_linear_combination([0.0], b)
    assert moment(zero, 3) == 0j
    assert np.all(double_moments(zero, delta) == 0)
    assert np.all(double_moments(delta, zero) == 0)


def test_rejects_nontrivial_multiplier():
    with pytest.raises(ValueError):
        moment(eta_form(4), 0)
    odd = CuspForm(Fraction(9), eta_form(24).multiplier, QSeries(Fraction(1), np.zeros(4)))
    with pytest.raises(ValueError):
        moment(odd, 0)


def test_moment_index_range(delta):
    with pytest.raises(ValueError):
        moment(delta, -1)
    with pytest.raises(ValueError):
        moment(delta, 11)


def test_period_polynomial_class():
    with pytest.raises(ValueError):
        PeriodPolynomial(4, np.ones(3))
    p = PeriodPolynomial(2, [1.0, 0.0, -2.0])
    assert p(2.0) == pytest.approx(1.0 - 8.0)
    assert p.degree == 2
    assert PeriodPolynomial(2, np.zeros(3)).degree == -1


def test_determinism_and_cache(delta):
    a = moments_table(delta)
    clear_caches()
    b = moments_table(delta)
    assert a.tobytes() == b.tobytes()
