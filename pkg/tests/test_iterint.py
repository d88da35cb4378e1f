"""Iterated integrals: layered quadrature oracle checks, path composition,
and agreement between the two independent routes."""

import math
from fractions import Fraction

import numpy as np
import pytest

from ncperiods.cocycle import CuspCollection, j_rows_direct
from ncperiods.iterint import (
    Endpoint,
    IterIntError,
    IterIntSpec,
    QuadConfig,
    clear_caches,
    cusp_frame,
    path_split_check,
    r_direct,
    vertical_J,
    zt_pow,
)
from ncperiods.modforms import level_one_basis
from ncperiods.ncpoly import Alphabet, GradedWords, Letter

PANEL = np.array([-0.7j, -0.4 - 0.6j])


def _upper_gamma(m: int, x: float) -> float:
    """Gamma(m+1, x) for integer m >= 0, closed form."""
    return math.factorial(m) * math.exp(-x) * sum(x**j / math.factorial(j) for j in range(m + 1))


def test_single_integral_against_series_oracle(delta):
    """R_1(Delta; oo, i y0; t) summed term by term from the q-expansion:
    each q^n contributes binomial * i^(k+1) Gamma(k+1, 2 pi n y0) / (2 pi n)^(k+1)."""
    y0 = 0.9
    w = 10
    got = r_direct([delta], None, Endpoint.point(1j * y0), PANEL)
    want = np.zeros_like(PANEL, dtype=complex)
    for j, a in enumerate(delta.expansion.coeffs):
        n = j + 1  # kappa = 1
        x = 2 * math.pi * n * y0
        if x > 120:
            break
        for k in range(w + 1):
            term = (
                math.comb(w, k)
                * (-PANEL) ** (w - k)
                * 1j ** (k + 1)
                * _upper_gamma(k, x)
                / (2 * math.pi * n) ** (k + 1)
            )
            want += a.real * term
    assert np.max(np.abs(got - want)) < 1e-10


def test_empty_and_degenerate():
    assert np.array_equal(r_direct([], None, 0, PANEL), np.ones(2, dtype=complex))
    e = Endpoint.point(1.7j)
    got = r_direct([level_one_basis(12)[0]], e, e, PANEL)
    assert np.array_equal(got, np.zeros(2, dtype=complex))


def test_orientation_antisymmetry(delta):
    a, b = Endpoint.point(0.3 + 1.1j), Endpoint.point(-0.2 + 1.6j)
    fwd = r_direct([delta], a, b, PANEL)
    bwd = r_direct([delta], b, a, PANEL)
    assert np.max(np.abs(fwd + bwd)) < 1e-11


def test_path_independence_cusp_vs_point_chain(delta):
    """oo -> x equals (oo -> mid) + (mid -> x) with independent quadratures."""
    x = Endpoint.point(0.4 + 0.9j)
    mid = Endpoint.point(-1.0 + 2.3j)
    whole = r_direct([delta], None, x, PANEL)
    parts = r_direct([delta], None, mid, PANEL) + r_direct([delta], mid, x, PANEL)
    assert np.max(np.abs(whole - parts)) < 1e-11


def test_path_split_orders_2_and_3(delta, g16):
    rep2 = path_split_check([delta, g16], Endpoint.point(1.9j), Endpoint.point(0.5 + 1.2j),
                            Endpoint.point(-0.4 + 0.8j), PANEL)
    assert rep2["order"] == 2
    assert rep2["max"] < 1e-8
    rep3 = path_split_check([delta, delta, delta], Endpoint.point(2.1j),
                            Endpoint.point(0.3 + 1.4j), Endpoint.point(1.0j), PANEL)
    assert rep3["order"] == 3
    assert rep3["max"] < 1e-8


def test_dual_route_agreement(delta, g16):
    """vertical_J (ODE down the ray) against j_rows_direct (layered quadrature
    per word): two fully independent computations of J(h; z0, oo; t)."""
    ab = Alphabet((Letter.trivial(10), Letter.trivial(14)))
    h = CuspCollection.from_letters(ab, [delta, g16])
    z0 = 0.25 + 1.3j
    ode = vertical_J(h, z0, PANEL, 2)
    quad = j_rows_direct(h, z0, None, PANEL, 2)
    assert ode.shape == quad.shape == (2, 7)
    assert np.max(np.abs(ode - quad)) < 1e-8


def test_vertical_J_unit_at_degree_zero(delta):
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection.from_letters(ab, [delta])
    rows = vertical_J(h, 1.1j, PANEL, 2)
    assert np.allclose(rows[:, 0], 1.0)


def test_y_max_override_consistent(delta):
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection.from_letters(ab, [delta])
    a = vertical_J(h, 1.4j, PANEL, 2, QuadConfig())
    b = vertical_J(h, 1.4j, PANEL, 2, QuadConfig(y_max=14.0))
    assert np.max(np.abs(a - b)) < 1e-9


def test_extended_precision_agrees(delta):
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection.from_letters(ab, [delta])
    a = vertical_J(h, 1.4j, PANEL, 2, QuadConfig())
    b = vertical_J(h, 1.4j, PANEL, 2, QuadConfig(extended=True))
    assert b.dtype == np.clongdouble
    assert np.max(np.abs(a - b.astype(complex))) < 1e-9


def test_determinism_and_cache(delta):
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection.from_letters(ab, [delta])
    r1 = vertical_J(h, 1.2j, PANEL, 2)
    r2 = vertical_J(h, 1.2j, PANEL, 2)
    assert r1.tobytes() == r2.tobytes()
    r2[0, 0] = 99.0  # memoized result must be a private copy
    assert vertical_J(h, 1.2j, PANEL, 2)[0, 0] == 1.0
    clear_caches()
    r3 = vertical_J(h, 1.2j, PANEL, 2)
    assert r1.tobytes() == r3.tobytes()
    d1 = r_direct([delta], None, 0, PANEL)
    d2 = r_direct([delta], None, 0, PANEL)
    assert d1.tobytes() == d2.tobytes()


def test_endpoint_validation():
    with pytest.raises(ValueError):
        Endpoint.point(0.5 - 0.2j)
    with pytest.raises(ValueError):
        Endpoint.point(1.0)
    assert Endpoint.coerce(None).is_infinity
    assert Endpoint.coerce("oo").is_infinity
    assert Endpoint.coerce(Fraction(1, 2)).cusp_value == Fraction(1, 2)
    assert Endpoint.coerce(0).cusp_value == 0
    assert Endpoint.coerce(1.8j).kind == "point"


def test_t_panel_validation(delta):
    with pytest.raises(ValueError):
        r_direct([delta], None, 0, np.array([0.3 + 0.1j]))
    with pytest.raises(ValueError):
        r_direct([delta], None, 0, np.array([-0.5j, 0.0j]))
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection.from_letters(ab, [delta])
    with pytest.raises(ValueError):
        vertical_J(h, 0.5 - 1j, PANEL, 2)


def test_cusp_frame():
    for c in [Fraction(0), Fraction(1, 2), Fraction(-3, 7), Fraction(5)]:
        g = cusp_frame(c)
        assert g.a * g.d - g.b * g.c == 1
        assert g.c > 0 or (g.c == 0 and c.denominator == 1)
        assert Fraction(g.a, g.c) == c if g.c else True


def test_zt_pow_branch():
    z = np.array([0.3 + 1.2j])
    t = np.array([-0.5 - 0.8j])
    assert zt_pow(z, t, 2.0)[0] == pytest.approx((z[0] - t[0]) ** 2)
    # fractional power continuous in the upper half plane: compare against
    # principal log directly
    w = 3.5
    assert zt_pow(z, t, w)[0] == pytest.approx(np.exp(w * np.log(z[0] - t[0])))


def test_iterint_spec(delta):
    spec = IterIntSpec((delta,), Endpoint.cusp(None), Endpoint.point(1.3j))
    got = spec.r(PANEL)
    want = r_direct([delta], None, Endpoint.point(1.3j), PANEL)
    assert np.array_equal(got, want)
