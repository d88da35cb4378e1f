"""Degree-by-degree recovery of a cusp-form collection from its cocycle.

Given panel values of a cocycle X that is (a known twist of) Psi(h') for some
collection h' supported in degrees <= D, peel reconstructs h' one degree at a
time.  At stage d the discrepancy

    Delta = X_S - Psi(h_<d)_S        (degree-d block)

depends only on the degree-d entries of h', coefficient by coefficient:
Delta[C](t) = -psi_{h'(C),S}(t) with psi_{g,S}(t) = int_0^oo g(tau)(tau-t)^w(C).
Each monomial C with a nonzero cusp space is fitted by least squares against
the catalog basis of that space; monomials outside the catalog must show a
coefficient below tolerance, anything larger means X is not in the reachable
class (the general splitting of a cocycle into period part plus coboundary is
nonconstructive and out of scope here).

The catalog stores the psi samples once per (alphabet, D, panel); peel then
needs only vertical solves for the partial collections it accumulates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cocycle import CuspCollection, psi, rows_inv, rows_mul, rows_slash
from .iterint import Endpoint, QuadConfig, r_direct
from .modforms import cusp_space_basis, form_linear_combination
from .ncpoly import (Alphabet, GradedWords, MultiplierSpec, TRIVIAL,
                     mono_eta_power, mono_str, mono_weight, parse_mono)
from .sl2z import GroupElement, S, T, parse_word

__all__ = [
    "BasisCatalog",
    "CatalogEntry",
    "PeelError",
    "PeelReport",
    "UnavailableValue",
    "build_catalog",
    "peel",
    "deconjugate",
    "injectivity_probe",
    "psi_evaluator",
    "cocycle_from_json",
    "dump_cocycle_values",
]

DEFAULT_Z0 = 2.0j


class PeelError(ValueError):
    """Input cocycle outside the supported class, or an ill-posed fit."""


class UnavailableValue(KeyError):
    """A file-backed evaluator has no stored value for the requested point."""


@dataclass(frozen=True)
class CatalogEntry:
    mono: tuple
    forms: tuple
    psi_samples: np.ndarray  # (n_panel, dim), psi_{g_j,S}(t_i) = int_0^oo g_j (tau-t_i)^w

    @property
    def dim(self) -> int:
        return len(self.forms)


@dataclass(frozen=True)
class BasisCatalog:
    """Cusp-space bases and period samples for every monomial of degree <= D
    whose weight/multiplier pair carries a nonzero space."""

    alphabet: Alphabet
    D: int
    panel: tuple
    entries: tuple

    def entry(self, mono):
        mono = tuple(mono)
        for e in self.entries:
            if e.mono == mono:
                return e
        return None

    def of_degree(self, d: int) -> list:
        return [e for e in self.entries if len(e.mono) == d]

    @property
    def monos(self) -> tuple:
        return tuple(e.mono for e in self.entries)


def _mono_space(alphabet: Alphabet, m) -> list:
    w = mono_weight(alphabet, m)
    n = mono_eta_power(alphabet, m) % 24
    mult = TRIVIAL if n == 0 else MultiplierSpec.eta_power(n)
    return cusp_space_basis(w, mult)


def build_catalog(alphabet: Alphabet, D: int, panel,
                  cfg: QuadConfig = QuadConfig()) -> BasisCatalog:
    """Enumerate monomials of degree 1..D with nonzero cusp space and sample
    each basis form's period integral on the panel."""
    panel = np.atleast_1d(np.asarray(panel, dtype=complex))
    if np.any(panel.imag >= 0):
        raise ValueError("panel points must lie in the lower half-plane")
    words = GradedWords(alphabet, D)
    top = Endpoint.cusp(None)
    zero = Endpoint.cusp(Fraction(0))
    entries = []
    for d in range(1, D + 1):
        for m in words.words_of_degree(d):
            basis = _mono_space(alphabet, m)
            if not basis:
                continue
            samples = np.column_stack([r_direct([g], top, zero, panel, cfg) for g in basis])
            entries.append(CatalogEntry(m, tuple(basis), samples))
    return BasisCatalog(alphabet, D, tuple(panel.tolist()), tuple(entries))


# --- cocycle evaluators ------------------------------------------------------

def psi_evaluator(h: CuspCollection, D: int, z0=DEFAULT_Z0,
                  cfg: QuadConfig = QuadConfig()):
    """The in-process evaluator (gamma, panel) -> Psi(h)_gamma rows."""
    def ev(gamma: GroupElement, t):
        return psi(h, gamma, z0, t, D, cfg)
    return ev


def _canon_key(gamma: GroupElement) -> tuple:
    # +-gamma act identically on the cocycle, fold the sign
    ent = gamma.entries()
    for v in ent:
        if v != 0:
            return ent if v > 0 else tuple(-x for x in ent)
    raise ValueError("singular matrix")


def _parse_gamma_label(label: str) -> GroupElement:
    label = label.strip()
    if label.startswith("m:"):
        a, b, c, d = (int(x) for x in label[2:].split(","))
        return GroupElement(a, b, c, d)
    return parse_word(label)


def cocycle_from_json(data, alphabet: Alphabet, D: int, default_panel=None):
    """Evaluator backed by a file of precomputed panel values.

    Two shapes are accepted.  The full shape is
        {"entries": [{"gamma": "S", "panel": [[re,im],...],
                      "values": {"A1": [[re,im],...], ...}}, ...]}
    with one values list per monomial, one pair per panel point.  The bare
    shape maps gamma labels straight to {monomial: [re,im] | [[re,im],...]}
    and is pinned to default_panel.  Monomials not listed are zero, the
    constant term is fixed at 1.  Requests off the stored grid raise
    UnavailableValue (peel then records the affected checks as skipped).
    """
    if isinstance(data, (str, bytes)):
        with open(data) as fh:
            data = json.load(fh)
    words = GradedWords(alphabet, D)
    store = {}

    def add_entry(label, panel_pts, values):
        panel_pts = np.asarray(panel_pts, dtype=complex)
        rows = np.zeros((len(panel_pts), words.total), dtype=complex)
        rows[:, 0] = 1.0
        for key, pairs in values.items():
            m = parse_mono(key)
            if not m:
                continue
            arr = np.asarray(pairs, dtype=float)
            if arr.ndim == 1:
                arr = arr[None, :]
            if arr.shape != (len(panel_pts), 2):
                raise ValueError(f"{label}/{key}: need one [re,im] pair per panel point")
            rows[:, words.index(m)] = arr[:, 0] + 1j * arr[:, 1]
        store[(_canon_key(_parse_gamma_label(label)), panel_pts.tobytes())] = (panel_pts, rows)

    if "entries" in data:
        for ent in data["entries"]:
            add_entry(ent["gamma"], [complex(re, im) for re, im in ent["panel"]], ent["values"])
    else:
        if default_panel is None:
            raise ValueError("bare panel-value files need an explicit panel")
        pts = np.atleast_1d(np.asarray(default_panel, dtype=complex))
        for label, values in data.items():
            add_entry(label, pts, values)

    def ev(gamma: GroupElement, t):
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        hit = store.get((_canon_key(gamma), t.tobytes()))
        if hit is not None:
            return hit[1].copy()
        for (gk, _), (pts, rows) in store.items():
            if gk == _canon_key(gamma) and len(pts) == len(t) \
                    and np.allclose(pts, t, rtol=0, atol=1e-12):
                return rows.copy()
        raise UnavailableValue(f"no stored values for {gamma.entries()} at this panel")

    return ev


#: (label, panel transform) pairs whose values a file needs for a full peel,
#: including the translated panels the abelian checks slash through.
PEEL_VALUE_GRID = (
    ("T", None),
    ("T", "S"),
    ("S", None),
    ("S", "T"),
    ("S", "S"),
    ("ST", None),
    ("TS", None),
    ("SS", None),
)


def dump_cocycle_values(X, alphabet: Alphabet, D: int, panel) -> dict:
    """Evaluate X on the grid peel consumes and pack it in the full JSON shape."""
    panel = np.atleast_1d(np.asarray(panel, dtype=complex))
    words = GradedWords(alphabet, D)
    entries = []
    for label, move in PEEL_VALUE_GRID:
        pts = panel if move is None else parse_word(move).mobius(panel)
        rows = np.asarray(X(_parse_gamma_label(label), pts), dtype=complex)
        values = {}
        for i in range(1, words.total):
            col = rows[:, i]
            if np.max(np.abs(col)) == 0.0:
                continue
            values[mono_str(words.word(i))] = [[float(v.real), float(v.imag)] for v in col]
        entries.append({
            "gamma": label,
            "panel": [[float(p.real), float(p.imag)] for p in pts],
            "values": values,
        })
    return {"degree": D, "entries": entries}


def deconjugate(X, n, words: GradedWords):
    """Undo a known twist: gamma, t -> (n|gamma)(t)^(-1) X_gamma(t) n(t),
    for n a callable panel -> rows with constant term 1."""
    def ev(gamma: GroupElement, t):
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        n_t = np.asarray(n(t), dtype=complex)
        slashed = rows_slash(words, np.asarray(n(gamma.mobius(t)), dtype=complex), gamma, t)
        mid = rows_mul(words, rows_inv(words, slashed), np.asarray(X(gamma, t), dtype=complex))
        return rows_mul(words, mid, n_t)
    return ev


# --- peel --------------------------------------------------------------------

@dataclass
class PeelReport:
    tol: float
    panel: list
    degrees: list = field(default_factory=list)
    final_residual: float = float("nan")
    parabolic_check: str = "unchecked"

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "panel": self.panel,
            "parabolic_check": self.parabolic_check,
            "degrees": self.degrees,
            "final_residual": self.final_residual,
        }


_ABELIAN_PAIRS = (("S", "T"), ("T", "S"), ("S", "S"))


def _abelian_check(X, h_prev, words, d, panel, z0, cfg) -> dict:
    """Residual of Ybar_{gd} = Ybar_g|d + Ybar_d on the generator pairs,
    for Ybar the degree-d block of X - Psi(h_prev).  Run before fitting the
    degree; a breach means X is not a cocycle compatible with the lower
    degrees already recovered."""
    block = words.block(d)

    def ybar(gamma, pts):
        raw = np.asarray(X(gamma, pts), dtype=complex)
        prev = psi(h_prev, gamma, z0, pts, words.D, cfg)
        out = np.zeros_like(raw)
        out[:, block] = raw[:, block] - prev[:, block]
        # the raw magnitude is what the difference cancels against
        return out, float(np.max(np.abs(raw[:, block])))

    worst = 0.0
    scale = 1.0
    details = {}
    try:
        for gl, dl in _ABELIAN_PAIRS:
            g, dd = parse_word(gl), parse_word(dl)
            lhs, s1 = ybar(g * dd, panel)
            moved, _ = ybar(g, dd.mobius(panel))
            rhs_g = rows_slash(words, moved, dd, panel)
            rhs_d, s3 = ybar(dd, panel)
            resid = float(np.max(np.abs((lhs - rhs_g - rhs_d)[:, block])))
            details[f"{gl},{dl}"] = resid
            worst = max(worst, resid)
            scale = max(scale, s1, s3, float(np.max(np.abs(rhs_g[:, block]))))
    except UnavailableValue:
        return {"status": "skipped (values unavailable)", "pairs": details}
    thresh = 10.0 * max(cfg.atol, cfg.rtol * scale, cfg.quad_tol * scale)
    status = "ok" if worst <= thresh else "failed"
    return {"status": status, "pairs": details, "max": worst,
            "scale": scale, "threshold": thresh}


def peel(X, catalog: BasisCatalog, D: int | None = None, panel=None, tol: float = 1e-6,
         z0=DEFAULT_Z0, cfg: QuadConfig = QuadConfig()) -> tuple:
    """Reconstruct a collection from cocycle panel values.

    X is either a callable (gamma, panel) -> rows, or a dict/path in the
    shapes cocycle_from_json accepts.  Returns (CuspCollection, PeelReport).
    Raises PeelError when a degree's discrepancy cannot be explained by the
    catalog to within tol, or when the abelian pre-check fails.
    """
    D = catalog.D if D is None else int(D)
    if panel is None:
        panel = np.asarray(catalog.panel, dtype=complex)
    else:
        panel = np.atleast_1d(np.asarray(panel, dtype=complex))
        if len(panel) != len(catalog.panel) or not np.allclose(
                panel, np.asarray(catalog.panel), rtol=0, atol=1e-12):
            raise ValueError("peel panel must match the catalog panel (the samples live there)")
    alphabet = catalog.alphabet
    words = GradedWords(alphabet, D)
    if not callable(X):
        X = cocycle_from_json(X, alphabet, D, default_panel=panel)

    ndim_max = max((e.dim for e in catalog.entries if len(e.mono) <= D), default=0)
    if len(panel) < 2 * ndim_max:
        raise PeelError(f"panel too small: {len(panel)} points for fit dimension {ndim_max}")

    report = PeelReport(tol=float(tol),
                        panel=[[float(p.real), float(p.imag)] for p in panel])

    unit = np.zeros((len(panel), words.total), dtype=complex)
    unit[:, 0] = 1.0
    try:
        x_t = np.asarray(X(T, panel), dtype=complex)
        worst_t = float(np.max(np.abs(x_t - unit)) / max(1.0, np.max(np.abs(x_t))))
        if worst_t > 10.0 * tol:
            raise PeelError(f"X_T differs from 1 by {worst_t:.2e} relative; "
                            "peel needs the parabolic normalization at the base point oo")
        report.parabolic_check = f"ok ({worst_t:.2e})"
    except UnavailableValue:
        report.parabolic_check = "skipped (values unavailable)"

    x_s = np.asarray(X(S, panel), dtype=complex)

    # coefficients grow with the kernel power, so every tolerance below is
    # taken relative to the magnitude of the values whose cancellation
    # produced the quantity under test
    entries = {}
    for d in range(1, D + 1):
        h_prev = CuspCollection(alphabet, dict(entries))
        stage = {"degree": d, "abelian": _abelian_check(X, h_prev, words, d, panel, z0, cfg)}
        if stage["abelian"]["status"] == "failed":
            report.degrees.append(stage)
            raise PeelError(
                f"degree {d}: abelian cocycle check failed "
                f"(max {stage['abelian']['max']:.2e} > {stage['abelian']['threshold']:.2e}); "
                "input is not a cocycle over the recovered lower degrees")

        prev_rows = psi(h_prev, S, z0, panel, D, cfg)
        delta = x_s - prev_rows
        blk = words.block(d)
        block_scale = max(1.0, float(np.max(np.abs(x_s[:, blk]))),
                          float(np.max(np.abs(prev_rows[:, blk]))))
        fits = {}
        recovered = []
        absent_rel = 0.0
        for m in words.words_of_degree(d):
            col = delta[:, words.index(m)]
            entry = catalog.entry(m)
            if entry is None:
                absent_rel = max(absent_rel, float(np.max(np.abs(col))) / block_scale)
                continue
            if len(panel) < 2 * entry.dim:
                raise PeelError(f"{mono_str(m)}: panel has {len(panel)} points, "
                                f"fit needs at least {2 * entry.dim}")
            A = np.concatenate([(-entry.psi_samples).real, (-entry.psi_samples).imag])
            colnorm = np.linalg.norm(A, axis=0)
            colnorm[colnorm == 0.0] = 1.0
            An = A / colnorm
            b = np.concatenate([col.real, col.imag])
            coefn, *_ = np.linalg.lstsq(An, b, rcond=None)
            coef = coefn / colnorm
            denom = max(1.0, float(np.max(np.abs(b))), float(np.max(np.abs(An @ coefn))))
            resid = float(np.max(np.abs(An @ coefn - b))) / denom
            fits[mono_str(m)] = {
                "coefficients": [float(c) for c in coef],
                "residual": resid,
                "cond": float(np.linalg.cond(An)),
            }
            if resid > tol:
                report.degrees.append(stage)
                raise PeelError(f"{mono_str(m)}: fit residual {resid:.2e} exceeds tol {tol:.2e}; "
                                "cocycle not in the reachable class")
            if np.max(np.abs(coef)) > tol:
                entries[m] = form_linear_combination(coef, entry.forms)
                recovered.append(mono_str(m))
        if absent_rel > tol:
            report.degrees.append(stage)
            raise PeelError(f"degree {d}: relative coefficient {absent_rel:.2e} on a monomial "
                            "with zero cusp space; cocycle not in the reachable class")
        stage.update(fits=fits, recovered=recovered, absent_max=absent_rel,
                     block_scale=block_scale)
        report.degrees.append(stage)

    h_rec = CuspCollection(alphabet, dict(entries))
    final = np.abs(x_s - psi(h_rec, S, z0, panel, D, cfg))
    report.final_residual = float(np.max(final / np.maximum(1.0, np.abs(x_s))))
    return h_rec, report


# --- injectivity -------------------------------------------------------------

def _extend_panel(panel: np.ndarray, needed: int) -> np.ndarray:
    """Deterministically append lower-half-plane points until the panel has
    `needed` entries (distinct radii, golden-ratio angle steps)."""
    pts = list(panel)
    k = 0
    while len(pts) < needed:
        r = 0.4 + 0.23 * k
        phi = -np.pi * (0.15 + 0.7 * ((k * 0.6180339887498949) % 1.0))
        pts.append(r * np.exp(1j * phi))
        k += 1
    return np.asarray(pts, dtype=complex)


def _degree_one_coboundaries(words: GradedWords, idx: int, t: np.ndarray):
    """Coboundary directions a degree-one difference is only defined up to.

    Both cocycles take the value 1 at T, so an allowed coboundary q|gamma - q
    must vanish at T: for a trivial-multiplier letter that forces q constant,
    leaving the single direction (1|S - 1)(t).  Eta-multiplier letters admit
    no nonzero T-invariant polynomial at all."""
    j = words.word(idx)[0]
    L = words.alphabet.letter(j)
    if L.multiplier.eta_N % 24 != 0:
        return None
    from .ncpoly import slash_factors
    fac = slash_factors(words, S, t)[:, idx]
    A = (fac - 1.0)[:, None]
    return A / np.linalg.norm(A, axis=0)


def injectivity_probe(h: CuspCollection, hp: CuspCollection, panel,
                      tol: float = 1e-6, z0=DEFAULT_Z0,
                      cfg: QuadConfig = QuadConfig()) -> dict:
    """Separation margin of Psi(h) and Psi(h') at the first degree where the
    collections differ.

    At degree one the margin is computed modulo the best coboundary fit per
    letter (the direction a shared parabolic normalization leaves free, see
    _degree_one_coboundaries); the panel is extended so the fit is
    overdetermined.  At higher degrees the raw block difference is used.
    Margin is the max residual over panel points and words of that degree;
    'separated' requires some word's residual to exceed 10 tol and to clear
    the evaluation noise floor on that word's own scale.
    """
    if h.alphabet != hp.alphabet:
        raise ValueError("collections must share an alphabet")
    panel = np.atleast_1d(np.asarray(panel, dtype=complex))

    per = {}
    for m in sorted(set(h.support_monos) | set(hp.support_monos), key=lambda m: (len(m), m)):
        a, b = h.form_of(m), hp.form_of(m)
        if (a.digest if a else None) != (b.digest if b else None):
            per.setdefault(len(m), []).append(m)
    if not per:
        return {"first_differing_degree": None, "margin": 0.0, "separated": False}
    dstar = min(per)

    words = GradedWords(h.alphabet, dstar)
    t = panel
    if dstar == 1 and any(h.alphabet.letter(m[0]).multiplier.eta_N % 24 == 0
                          for m in per[1]):
        t = _extend_panel(panel, max(len(panel), 8))
    rows_h = psi(h, S, z0, t, dstar, cfg)
    rows_hp = psi(hp, S, z0, t, dstar, cfg)
    diff = rows_h - rows_hp

    blk = words.block(dstar)
    eps = max(cfg.rtol, cfg.quad_tol)
    margin = 0.0
    separated = False
    per_word = {}
    for idx in range(blk.start, blk.stop):
        col = diff[:, idx]
        if dstar == 1:
            A = _degree_one_coboundaries(words, idx, t)
            if A is not None:
                coef, *_ = np.linalg.lstsq(A, col, rcond=None)
                col = col - A @ coef
        worst = float(np.max(np.abs(col)))
        word_scale = max(1.0, float(np.max(np.abs(rows_h[:, idx]))),
                         float(np.max(np.abs(rows_hp[:, idx]))))
        per_word[mono_str(words.word(idx))] = worst
        margin = max(margin, worst)
        # a word separates when its residual clears both the requested
        # tolerance and the noise floor of the evaluations on its own scale
        if worst > 10.0 * tol and worst > 10.0 * eps * word_scale:
            separated = True
    return {
        "first_differing_degree": dstar,
        "margin": margin,
        "separated": separated,
        "per_word_max": per_word,
        "panel_size": int(len(t)),
    }
