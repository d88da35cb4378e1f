"""Catalog construction, peeling cocycles back to collections, injectivity."""

import numpy as np
import pytest

from ncperiods.cocycle import CuspCollection
from ncperiods.config import DEFAULT_PANEL
from ncperiods.iterint import QuadConfig
from ncperiods.mlv import period_polynomial
from ncperiods.modforms import form_linear_combination, level_one_basis
from ncperiods.ncpoly import Alphabet, GradedWords, Letter, slash_factors
from ncperiods.reconstruct import (
    PeelError,
    UnavailableValue,
    _extend_panel,
    build_catalog,
    cocycle_from_json,
    deconjugate,
    dump_cocycle_values,
    injectivity_probe,
    peel,
    psi_evaluator,
)
from ncperiods.sl2z import S, T

AB2 = Alphabet((Letter.trivial(10), Letter.trivial(4)))
AB1 = Alphabet((Letter.trivial(10),))
PANEL = np.asarray(DEFAULT_PANEL, dtype=complex)

EXPECTED_DIMS = {
    "A1": 1,
    "A1*A1": 1, "A1*A2": 1, "A2*A1": 1,
    "A1*A1*A1": 2, "A1*A1*A2": 1, "A1*A2*A1": 1, "A1*A2*A2": 1,
    "A2*A1*A1": 1, "A2*A1*A2": 1, "A2*A2*A1": 1,
}


@pytest.fixture(scope="module")
def catalog():
    return build_catalog(AB2, 3, PANEL)


def test_catalog_structure(catalog):
    from ncperiods.ncpoly import mono_str

    got = {mono_str(e.mono): e.dim for e in catalog.entries}
    assert got == EXPECTED_DIMS
    # zero cusp spaces are genuinely absent, not present-with-dim-0
    assert catalog.entry((2,)) is None
    assert catalog.entry((2, 2)) is None
    assert catalog.entry((2, 2, 2)) is None
    assert catalog.entry((1,)).forms[0].label == "S12.1"
    assert [e.psi_samples.shape for e in catalog.of_degree(3)][0] == (5, 2)


def test_catalog_samples_match_period_polynomials(catalog, delta, g16):
    """Degree-1 psi samples are period polynomials on the panel: the catalog
    column for A1 must agree with the moment-route polynomial of Delta."""
    p = period_polynomial(delta)
    assert np.max(np.abs(catalog.entry((1,)).psi_samples[:, 0] - p(PANEL))) < 1e-9
    w14 = catalog.entry((1, 2)).forms[0]
    q = period_polynomial(w14)
    assert np.max(np.abs(catalog.entry((1, 2)).psi_samples[:, 0] - q(PANEL))) < 1e-9


def test_catalog_rejects_bad_panel():
    with pytest.raises(ValueError):
        build_catalog(AB1, 1, np.array([0.5 + 0.5j]))


def test_peel_exact_collection(catalog, delta, g16):
    """Recover a three-entry collection from its own cocycle values."""
    hidden = CuspCollection(AB2, {
        (1,): delta,
        (1, 2): form_linear_combination([0.7], [g16]),
        (2, 1): form_linear_combination([-0.3], [g16]),
    })
    X = psi_evaluator(hidden, 3)
    h_rec, report = peel(X, catalog)
    assert report.parabolic_check.startswith("ok")
    assert len(report.degrees) == 3
    for stage in report.degrees:
        assert stage["abelian"]["status"] == "ok"
    fits1 = report.degrees[0]["fits"]
    assert fits1["A1"]["coefficients"][0] == pytest.approx(1.0, abs=1e-5)
    fits2 = report.degrees[1]["fits"]
    assert fits2["A1*A2"]["coefficients"][0] == pytest.approx(0.7, abs=1e-5)
    assert fits2["A2*A1"]["coefficients"][0] == pytest.approx(-0.3, abs=1e-5)
    assert abs(fits2["A1*A1"]["coefficients"][0]) < 1e-5
    assert report.final_residual < 1e-7
    assert set(h_rec.support_monos) == {(1,), (1, 2), (2, 1)}
    assert h_rec.form_of((1, 2)).expansion.coeffs[0] == pytest.approx(0.7, abs=1e-5)


def test_peel_from_dumped_json(delta, g16):
    """Full JSON shape round trip: dump the value grid, rebuild the evaluator
    from the parsed dict, peel, compare."""
    cat2 = build_catalog(AB2, 2, PANEL)
    hidden = CuspCollection(AB2, {(1,): delta, (1, 2): form_linear_combination([0.7], [g16])})
    X = psi_evaluator(hidden, 2)
    blob = dump_cocycle_values(X, AB2, 2, PANEL)
    assert {e["gamma"] for e in blob["entries"]} >= {"T", "S", "ST", "TS", "SS"}
    h_rec, report = peel(blob, cat2)
    assert report.final_residual < 1e-7
    assert set(h_rec.support_monos) == {(1,), (1, 2)}
    for stage in report.degrees:
        assert stage["abelian"]["status"] == "ok"


def test_peel_bare_json_skips_unavailable(delta):
    """Bare shape stores only X_S on one panel: the parabolic and abelian
    checks report skipped instead of failing, the fit still lands."""
    cat1 = build_catalog(AB1, 1, PANEL)
    X = psi_evaluator(CuspCollection.from_letters(AB1, [delta]), 1)
    col = X(S, PANEL)[:, 1]
    bare = {"S": {"A1": [[float(v.real), float(v.imag)] for v in col]}}
    h_rec, report = peel(bare, cat1)
    assert report.parabolic_check == "skipped (values unavailable)"
    assert report.degrees[0]["abelian"]["status"] == "skipped (values unavailable)"
    assert report.degrees[0]["fits"]["A1"]["coefficients"][0] == pytest.approx(1.0, abs=1e-6)


def test_cocycle_from_json_unavailable():
    ev = cocycle_from_json({"S": {"A1": [[1.0, 0.0]] * 5}}, AB1, 1, default_panel=PANEL)
    got = ev(S, PANEL)
    assert got.shape == (5, 2)
    got[0, 0] = 77.0  # stored rows must not alias the returned array
    assert ev(S, PANEL)[0, 0] == 1.0
    with pytest.raises(UnavailableValue):
        ev(T, PANEL)
    with pytest.raises(UnavailableValue):
        ev(S, PANEL * 1.5)


def test_peel_panel_mismatch(catalog):
    X = psi_evaluator(CuspCollection(AB2, {}), 3)
    with pytest.raises(ValueError):
        peel(X, catalog, panel=PANEL * 1.01)
    with pytest.raises(ValueError):
        peel(X, catalog, panel=PANEL[:3])


def test_peel_panel_too_small(delta):
    small = np.array([-0.8j, -1.5j])
    cat = build_catalog(AB2, 3, small)  # A1*A1*A1 has dim 2, needs 4 points
    X = psi_evaluator(CuspCollection(AB2, {(1,): delta}), 3)
    with pytest.raises(PeelError, match="panel too small"):
        peel(X, cat)


def test_peel_rejects_broken_parabolic(catalog):
    words = GradedWords(AB2, 3)

    def X(gamma, t):
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        rows = np.zeros((len(t), words.total), dtype=complex)
        rows[:, 0] = 1.0
        if gamma.c == 0 and abs(gamma.b) > 0:
            rows[:, 1] = 0.25
        return rows

    with pytest.raises(PeelError, match="parabolic"):
        peel(X, catalog)


def test_peel_rejects_coboundary_component(catalog, delta):
    """A constant-polynomial coboundary on the A1 slot passes the parabolic
    and abelian checks exactly but is outside the period span: the degree-1
    fit must refuse it."""
    h = CuspCollection(AB2, {(1,): delta})
    X0 = psi_evaluator(h, 3)
    words = GradedWords(AB2, 3)

    def X(gamma, t):
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        rows = np.asarray(X0(gamma, t), dtype=complex)
        fac = slash_factors(words, gamma, t)[:, 1]
        rows[:, 1] += 0.01 * (fac - 1.0)
        return rows

    with pytest.raises(PeelError, match="fit residual"):
        peel(X, catalog)


def test_deconjugate_round_trip(delta):
    """Twisting by n then by its pointwise inverse reproduces the cocycle."""
    from ncperiods.cocycle import rows_inv

    h = CuspCollection(AB1, {(1,): delta})
    words = GradedWords(AB1, 2)
    X = psi_evaluator(h, 2)

    def n(t):
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        rows = np.zeros((len(t), words.total), dtype=complex)
        rows[:, 0] = 1.0
        rows[:, 1] = 0.3 * t**2
        rows[:, 2] = -0.1j * t
        return rows

    def n_inv(t):
        return rows_inv(words, n(t))

    Y = deconjugate(X, n, words)
    back = deconjugate(Y, n_inv, words)
    a = np.asarray(X(S, PANEL))
    b = np.asarray(back(S, PANEL))
    assert np.max(np.abs(a - b)) < 1e-10
    # and the twist itself is not a no-op
    assert np.max(np.abs(np.asarray(Y(S, PANEL)) - a)) > 1e-3


def test_injectivity_probe(delta, g16):
    s22 = level_one_basis(22)[0]
    h = CuspCollection(AB1, {(1,): delta, (1, 1): s22})
    same = CuspCollection(AB1, {(1,): delta, (1, 1): s22})
    rep = injectivity_probe(h, same, PANEL)
    assert rep["separated"] is False
    assert rep["first_differing_degree"] is None

    hp1 = CuspCollection(AB1, {(1,): form_linear_combination([2.0], [delta]), (1, 1): s22})
    rep1 = injectivity_probe(h, hp1, PANEL)
    assert rep1["first_differing_degree"] == 1
    assert rep1["separated"] is True
    assert rep1["panel_size"] == 8  # extended for the coboundary fit

    hp2 = CuspCollection(AB1, {(1,): delta})
    rep2 = injectivity_probe(h, hp2, PANEL)
    assert rep2["first_differing_degree"] == 2
    assert rep2["separated"] is True

    with pytest.raises(ValueError):
        injectivity_probe(h, CuspCollection(AB2, {(1,): delta}), PANEL)


def test_extend_panel():
    out = _extend_panel(PANEL, 9)
    assert len(out) == 9
    assert np.array_equal(out[:5], PANEL)
    assert np.all(out.imag < 0)
    again = _extend_panel(PANEL, 9)
    assert out.tobytes() == again.tobytes()
    assert len(np.unique(np.round(out, 12))) == 9
