"""Cocycle construction and the verification battery at small degree."""

import numpy as np
import pytest

from ncperiods.cocycle import (
    CuspCollection,
    apply_to_endpoint,
    eta_example_check,
    j_between,
    j_rows_direct,
    phi_twist,
    psi,
    rows_inv,
    rows_mul,
    slash_eval,
    untwist_rows,
    verify_base_point_independence,
    verify_cocycle,
    verify_equivariance,
    verify_multiplicativity,
)
from ncperiods.iterint import Endpoint, QuadConfig
from ncperiods.modforms import CuspForm, QSeries, eta_form, level_one_basis
from ncperiods.ncpoly import Alphabet, GradedWords, Letter, NcPoly
from ncperiods.sl2z import I2, S, T, parse_word

PANEL = np.array([-0.7j, -0.4 - 0.6j])
Z0 = 2.0j


def _one_letter(delta):
    ab = Alphabet((Letter.trivial(10),))
    return CuspCollection.from_letters(ab, [delta])


def test_collection_validation(delta, g16):
    ab = Alphabet((Letter.trivial(10),))
    with pytest.raises(ValueError):
        CuspCollection(ab, {(1,): g16})  # weight 16 form on a weight-12 slot
    with pytest.raises(ValueError):
        CuspCollection(ab, {(): delta})  # empty monomial
    with pytest.raises(ValueError):
        CuspCollection(ab, {(2,): delta})  # letter out of range
    with pytest.raises(ValueError):
        CuspCollection(ab, (((1,), delta), ((1,), delta)))  # duplicate
    from fractions import Fraction as _F

    from ncperiods.modforms import cusp_space_basis
    from ncperiods.ncpoly import MultiplierSpec

    # monomial (1,1) over an eta^12 letter has eta power 24 = trivial; a
    # weight-matching eta^20 form must be rejected on its multiplier
    ab3 = Alphabet((Letter.eta(12),))
    f20 = cusp_space_basis(_F(8), MultiplierSpec.eta_power(20))[0]
    with pytest.raises(ValueError):
        CuspCollection(ab3, {(1, 1): f20})
    # zero forms are dropped from the support
    import numpy as _np

    zero = CuspForm(_F(10), delta.multiplier, QSeries(_F(1), _np.zeros(5, complex)))
    h = CuspCollection(ab, {(1,): zero})
    assert h.support == ()
    assert h.max_support_degree == 0


def test_block_splits(delta):
    s22 = level_one_basis(22)[0]
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection(ab, {(1,): delta, (1, 1): s22})
    assert h.block_splits((1,)) == [((1,),)]
    splits2 = set(h.block_splits((1, 1)))
    assert splits2 == {((1,), (1,)), ((1, 1),)}
    splits3 = set(h.block_splits((1, 1, 1)))
    assert splits3 == {((1,), (1,), (1,)), ((1,), (1, 1)), ((1, 1), (1,))}
    assert h.form_of((1, 1)) == s22
    assert h.form_of((1, 1, 1)) is None


def test_rows_arithmetic_matches_ncpoly(delta):
    words = GradedWords(Alphabet((Letter.trivial(10), Letter.trivial(4))), 3)
    rng = np.random.default_rng(5)
    A = rng.normal(size=(2, words.total)) + 1j * rng.normal(size=(2, words.total))
    B = rng.normal(size=(2, words.total)) + 1j * rng.normal(size=(2, words.total))
    A[:, 0] = 1.0
    B[:, 0] = 1.0
    from ncperiods.ncpoly import nc_inv, nc_mul

    prod = rows_mul(words, A, B)
    inv = rows_inv(words, A)
    for r in range(2):
        want = nc_mul(NcPoly(words, A[r]), NcPoly(words, B[r])).coeffs
        assert np.max(np.abs(prod[r] - want)) < 1e-12
        wanti = nc_inv(NcPoly(words, A[r])).coeffs.astype(complex)
        assert np.max(np.abs(inv[r] - wanti)) < 1e-12


def test_psi_parabolic_unit(delta):
    h = _one_letter(delta)
    for g in (T, I2, parse_word("TT"), T.inv()):
        rows = psi(h, g, Z0, PANEL, 2)
        assert np.allclose(rows[:, 0], 1.0)
        assert np.max(np.abs(rows[:, 1:])) == 0.0


def test_psi_degree_zero_is_one(delta):
    h = _one_letter(delta)
    rows = psi(h, S, Z0, PANEL, 2)
    assert np.max(np.abs(rows[:, 0] - 1.0)) < 1e-10
    assert np.max(np.abs(rows[:, 1])) > 1e-8  # genuinely nontrivial at degree 1


def test_verify_cocycle_pairs(delta):
    h = _one_letter(delta)
    for pair in [(S, T), (T, S), (S, S)]:
        rep = verify_cocycle(h, pair[0], pair[1], Z0, PANEL, 2)
        assert rep["max"] < 1e-7, pair
        assert rep["identity"] == "cocycle"
        assert rep["per_degree_max"][0] == 0.0


def test_verify_multiplicativity(delta):
    s22 = level_one_basis(22)[0]
    ab = Alphabet((Letter.trivial(10),))
    h = CuspCollection(ab, {(1,): delta, (1, 1): s22})
    rep = verify_multiplicativity(h, Endpoint.point(1.9j), Endpoint.point(0.4 + 1.1j),
                                  Endpoint.point(-0.6 + 0.9j), PANEL, 2)
    assert rep["max"] < 1e-8


def test_verify_equivariance(delta):
    h = _one_letter(delta)
    rep = verify_equivariance(h, S, None, 0, PANEL, 2)
    assert rep["max"] < 1e-7
    rep_t = verify_equivariance(h, T, None, 0, PANEL, 2)
    assert rep_t["max"] < 1e-7


def test_base_point_independence(delta):
    h = _one_letter(delta)
    rep = verify_base_point_independence(h, S, 2.0j, 0.3 + 1.4j, PANEL, 2)
    assert rep["max"] < 1e-7


def test_j_between_consistency(delta):
    """j_between (two vertical solves) vs j_rows_direct (layered quadrature)."""
    h = _one_letter(delta)
    y, x = 0.2 + 1.6j, -0.5 + 1.1j
    a = j_between(h, y, x, PANEL, 2)
    b = j_rows_direct(h, y, x, PANEL, 2)
    assert np.max(np.abs(a - b)) < 1e-8


def test_slash_eval_identity_strict(delta):
    from ncperiods.iterint import vertical_J

    h = _one_letter(delta)
    words = h.words(2)
    calls = []

    def F(t):
        calls.append(np.asarray(t))
        return vertical_J(h, Z0, t, 2)

    got = slash_eval(F, words, I2, PANEL)
    assert len(calls) == 1
    assert np.array_equal(calls[0], PANEL)
    assert np.array_equal(got, vertical_J(h, Z0, PANEL, 2))


def test_untwist_round_trip(delta):
    """Phi^{z1} conjugated back equals Phi^{z0}: n = J(z1, z0)."""
    h = _one_letter(delta)
    words = h.words(2)
    z0, z1 = 1.8j, 0.4 + 1.2j
    phi0 = phi_twist(h, S, z0, PANEL, 2)
    phi1 = phi_twist(h, S, z1, PANEL, 2)
    n_t = j_between(h, z1, z0, PANEL, 2)
    n_gt = j_between(h, z1, z0, S.mobius(PANEL), 2)
    back = untwist_rows(words, phi1, n_t, n_gt, S, PANEL)
    assert np.max(np.abs(back - phi0)) < 1e-7


def test_untwist_unit_is_noop(delta):
    h = _one_letter(delta)
    words = h.words(2)
    phi = phi_twist(h, S, 1.5j, PANEL, 2)
    unit = np.zeros_like(phi)
    unit[:, 0] = 1.0
    back = untwist_rows(words, phi, unit, unit, S, PANEL)
    assert np.max(np.abs(back - phi)) < 1e-12


def test_eta_example_small():
    h = CuspCollection.from_letters(Alphabet((Letter.eta(4),)), [eta_form(4)])
    rep = eta_example_check(h, Z0, PANEL, 2)
    assert rep["product_relation_max"] < 1e-7
    assert rep["involution_relation_max"] < 1e-7
    assert rep["max"] < 1e-7


def test_apply_to_endpoint():
    assert apply_to_endpoint(S, Endpoint.cusp(None)).cusp_value == 0
    assert apply_to_endpoint(S, Endpoint.cusp(0)).is_infinity
    e = apply_to_endpoint(T, Endpoint.cusp(0))
    assert e.cusp_value == 1
    p = apply_to_endpoint(S, Endpoint.point(2.0j))
    assert p.z == pytest.approx(S.mobius(2.0j))
