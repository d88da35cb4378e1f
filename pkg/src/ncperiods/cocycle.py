"""Group cocycles built from generating series of iterated integrals.

For a collection h (cusp forms attached to monomials in the letters, weights
and multipliers matching) the series J(h; z0, oo; t) transforms under gamma by

    Psi_gamma = (J(z0)|gamma)^(-1) * J(gamma^(-1) z0)

which is a cocycle for the slashed multiplication: Psi_{gd} = (Psi_g|d) Psi_d.
Psi is independent of the base point z0; the twist Phi^z_gamma =
J(gamma^(-1) z, z) is base-point dependent but only up to an explicit
conjugation, which untwist_rows undoes.

Value convention throughout: a "rows" array has shape (n_t, n_words), row r
the truncated series at panel point t[r], words indexed by
GradedWords(h.alphabet, D).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .iterint import Endpoint, QuadConfig, r_direct, vertical_J
from .ncpoly import (Alphabet, GradedWords, NcPoly, TRIVIAL, MultiplierSpec,
                     mono_str, mono_weight, mono_eta_power, nc_inv, nc_mul,
                     slash_factors)
from .sl2z import GroupElement, I2

__all__ = [
    "CuspCollection",
    "rows_mul",
    "rows_inv",
    "rows_slash",
    "slash_eval",
    "psi",
    "j_between",
    "j_rows_direct",
    "phi_twist",
    "untwist_rows",
    "verify_cocycle",
    "verify_multiplicativity",
    "verify_equivariance",
    "verify_base_point_independence",
    "eta_example_check",
    "apply_to_endpoint",
]


@dataclass(frozen=True)
class CuspCollection:
    """Cusp forms attached to monomials: h(B) = support[B].

    support maps a word (nonempty tuple of 1-based letter indices) to a form
    whose modular weight is w(B) + 2 and whose multiplier is the product of
    the letter multipliers, reduced mod 24.  The common case of one form per
    letter is CuspCollection.from_letters(alphabet, [f1, ..., f_ell]); a zero
    form for a letter, or an absent key, both mean h vanishes there.
    """

    alphabet: Alphabet
    support: tuple = field(default=())

    def __post_init__(self):
        items = self.support
        if hasattr(items, "items"):
            items = items.items()
        entries = []
        for m, f in items:
            m = tuple(int(j) for j in m)
            if not m or any(j < 1 or j > self.alphabet.ell for j in m):
                raise ValueError(f"bad monomial {m!r} for an {self.alphabet.ell}-letter alphabet")
            if f.is_zero:
                continue
            if f.shifted_weight != mono_weight(self.alphabet, m):
                raise ValueError(
                    f"{mono_str(m)}: weight mismatch "
                    f"(monomial {mono_weight(self.alphabet, m)}, form {f.shifted_weight})")
            n = mono_eta_power(self.alphabet, m) % 24
            expected = TRIVIAL if n == 0 else MultiplierSpec.eta_power(n)
            if f.multiplier != expected:
                raise ValueError(f"{mono_str(m)}: multiplier mismatch")
            entries.append((m, f))
        entries.sort(key=lambda e: (len(e[0]), e[0]))
        seen = {m for m, _ in entries}
        if len(seen) != len(entries):
            raise ValueError("duplicate monomial in support")
        object.__setattr__(self, "support", tuple(entries))

    @classmethod
    def from_letters(cls, alphabet: Alphabet, forms) -> "CuspCollection":
        forms = list(forms)
        if len(forms) != alphabet.ell:
            raise ValueError("need exactly one form per letter")
        return cls(alphabet, tuple(((j,), f) for j, f in enumerate(forms, start=1)))

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        for L in self.alphabet.letters:
            h.update(f"{L.weight}|{L.multiplier.kind}{L.multiplier.N};".encode())
        for m, f in self.support:
            h.update(f"{m}:{f.digest};".encode())
        return h.hexdigest()[:16]

    @property
    def support_monos(self) -> tuple:
        return tuple(m for m, _ in self.support)

    @property
    def support_forms(self) -> tuple:
        return tuple(f for _, f in self.support)

    @property
    def max_support_degree(self) -> int:
        return max((len(m) for m, _ in self.support), default=0)

    def form_of(self, m):
        m = tuple(m)
        for mm, f in self.support:
            if mm == m:
                return f
        return None

    def words(self, D: int) -> GradedWords:
        return GradedWords(self.alphabet, D)

    def block_splits(self, m) -> list:
        """All ways to break the word m into consecutive supported blocks."""
        m = tuple(m)
        monos = set(self.support_monos)
        out = []

        def rec(rest, acc):
            if not rest:
                out.append(tuple(acc))
                return
            for L in range(1, len(rest) + 1):
                if rest[:L] in monos:
                    rec(rest[L:], acc + [rest[:L]])

        rec(m, [])
        return out


# --- batched series arithmetic on value rows -------------------------------

def rows_mul(words: GradedWords, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.empty_like(np.asarray(A, dtype=complex))
    for r in range(out.shape[0]):
        out[r] = nc_mul(NcPoly(words, A[r]), NcPoly(words, B[r])).coeffs
    return out

def rows_inv(words: GradedWords, A: np.ndarray) -> np.ndarray:
    out = np.empty(np.asarray(A).shape, dtype=complex)
    for r in range(out.shape[0]):
        out[r] = nc_inv(NcPoly(words, np.asarray(A[r], dtype=complex))).coeffs.astype(complex)
    return out

def rows_slash(words: GradedWords, rows_at_gamma_t: np.ndarray,
               gamma: GroupElement, t: np.ndarray) -> np.ndarray:
    """(F|gamma)(t) rows from F's rows at gamma t."""
    return slash_factors(words, gamma, np.asarray(t)) * rows_at_gamma_t


def slash_eval(F, words: GradedWords, gamma: GroupElement, t) -> np.ndarray:
    """(F|gamma) at the panel t, for F a callable panel -> rows.

    Evaluates F at the moved panel gamma t and multiplies in the per-word
    factor v(B)(gamma)^(-1) (ct+d)^(w(B)); the identity is a strict no-op.
    """
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    if gamma.a == gamma.d == 1 and gamma.b == gamma.c == 0:
        return np.asarray(F(t), dtype=complex)
    return rows_slash(words, np.asarray(F(gamma.mobius(t)), dtype=complex), gamma, t)


def apply_to_endpoint(gamma: GroupElement, e: Endpoint) -> Endpoint:
    e = Endpoint.coerce(e)
    if e.kind == "point":
        return Endpoint.point(gamma.mobius(e.z))
    if e.is_infinity:
        if gamma.c == 0:
            return e
        return Endpoint.cusp(Fraction(gamma.a, gamma.c))
    p, q = e.cusp_value.numerator, e.cusp_value.denominator
    num, den = gamma.a * p + gamma.b * q, gamma.c * p + gamma.d * q
    return Endpoint.cusp(None) if den == 0 else Endpoint.cusp(Fraction(num, den))


# --- the cocycle ------------------------------------------------------------

def psi(h: CuspCollection, gamma: GroupElement, z0: complex, t, D: int,
        cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Psi_gamma rows at the t panel.

    Exactly 1 for c = 0 (gamma = +-T^m fixes oo and the two series coincide);
    otherwise two vertical solves, one at t, one at gamma t.
    """
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    if gamma.c == 0:
        out = np.zeros((len(t), words.total), dtype=complex)
        out[:, 0] = 1.0
        return out
    gt = gamma.mobius(t)
    slashed = rows_slash(words, vertical_J(h, z0, gt, D, cfg), gamma, t)
    j_moved = vertical_J(h, gamma.inv().mobius(complex(z0)), t, D, cfg)
    return rows_mul(words, rows_inv(words, slashed), j_moved)


def j_between(h: CuspCollection, y, x, t, D: int,
              cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """J(h; y, x; t) rows for interior points y, x, via the common base at oo."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    Jy = vertical_J(h, complex(y), t, D, cfg)
    Jx = vertical_J(h, complex(x), t, D, cfg)
    return rows_mul(words, Jy, rows_inv(words, Jx))


def j_rows_direct(h: CuspCollection, y, x, t, D: int,
                  cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Generating series rows with every coefficient assembled from layered
    integrals; the slow oracle route.

    The word-B coefficient is the sum over decompositions of B into
    consecutive supported blocks of the iterated integral of the block forms
    (one form per level, kernel power the block weight).  For a collection
    supported on single letters this is one nested integral per word.
    """
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    out = np.zeros((len(t), words.total), dtype=complex)
    out[:, 0] = 1.0
    for i in range(1, words.total):
        for split in h.block_splits(words.word(i)):
            out[:, i] += r_direct([h.form_of(b) for b in split], y, x, t, cfg)
    return out


def phi_twist(h: CuspCollection, gamma: GroupElement, z, t, D: int,
              cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """Phi^z_gamma = J(gamma^(-1) z, z) rows."""
    return j_between(h, gamma.inv().mobius(complex(z)), complex(z), t, D, cfg)


def untwist_rows(words: GradedWords, phi1_rows: np.ndarray, n_rows_at_t: np.ndarray,
                 n_rows_at_gamma_t: np.ndarray, gamma: GroupElement, t) -> np.ndarray:
    """Undo the base-point conjugation Phi^{z1} = (n|gamma) Phi^{z0} n^(-1),
    n = J(z1, z0): returns Phi^{z0} rows from Phi^{z1} rows."""
    slashed_n = rows_slash(words, n_rows_at_gamma_t, gamma, t)
    return rows_mul(words, rows_mul(words, rows_inv(words, slashed_n), phi1_rows),
                    n_rows_at_t)


# --- verification reports ---------------------------------------------------

def _per_degree_max(words: GradedWords, diff: np.ndarray) -> list:
    return [float(np.max(np.abs(diff[:, words.block(d)]))) for d in range(words.D + 1)]


def _report(identity: str, words: GradedWords, diff: np.ndarray, t, **extra) -> dict:
    per = _per_degree_max(words, diff)
    rep = {
        "identity": identity,
        "panel": [[float(x.real), float(x.imag)] for x in np.atleast_1d(t)],
        "degree": words.D,
        "per_degree_max": per,
        "max": max(per),
    }
    rep.update(extra)
    return rep


def verify_cocycle(h: CuspCollection, gamma: GroupElement, delta: GroupElement,
                   z0: complex, t, D: int, cfg: QuadConfig = QuadConfig()) -> dict:
    """Residual of Psi_{gamma delta} = (Psi_gamma|delta) Psi_delta at the panel."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    lhs = psi(h, gamma * delta, z0, t, D, cfg)
    slashed = rows_slash(words, psi(h, gamma, z0, delta.mobius(t), D, cfg), delta, t)
    rhs = rows_mul(words, slashed, psi(h, delta, z0, t, D, cfg))
    return _report("cocycle", words, lhs - rhs, t,
                   gamma=gamma.entries(), delta=delta.entries())


def verify_multiplicativity(h: CuspCollection, z, y, x, t, D: int,
                            cfg: QuadConfig = QuadConfig()) -> dict:
    """J(z,x) = J(z,y) J(y,x) with every side from independent layered
    integrals; the degree-2 block is the classical two-term composition rule,
    degree 3 the three-term one."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    lhs = j_rows_direct(h, z, x, t, D, cfg)
    rhs = rows_mul(words, j_rows_direct(h, z, y, t, D, cfg),
                   j_rows_direct(h, y, x, t, D, cfg))
    return _report("multiplicativity", words, lhs - rhs, t)


def verify_equivariance(h: CuspCollection, gamma: GroupElement, y, x, t, D: int,
                        cfg: QuadConfig = QuadConfig()) -> dict:
    """(J(y,x)|gamma)(t) = J(gamma^(-1) y, gamma^(-1) x)(t), both sides from
    the layered route coefficient by coefficient."""
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    y = Endpoint.coerce(y)
    x = Endpoint.coerce(x)
    gi = gamma.inv()
    lhs = rows_slash(words, j_rows_direct(h, y, x, gamma.mobius(t), D, cfg), gamma, t)
    rhs = j_rows_direct(h, apply_to_endpoint(gi, y), apply_to_endpoint(gi, x), t, D, cfg)
    return _report("equivariance", words, lhs - rhs, t, gamma=gamma.entries())


def verify_base_point_independence(h: CuspCollection, gamma: GroupElement,
                                   z0a: complex, z0b: complex, t, D: int,
                                   cfg: QuadConfig = QuadConfig()) -> dict:
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    diff = psi(h, gamma, z0a, t, D, cfg) - psi(h, gamma, z0b, t, D, cfg)
    return _report("base_point_independence", words, diff, t, gamma=gamma.entries())


def eta_example_check(h: CuspCollection, z0: complex, t, D: int,
                      cfg: QuadConfig = QuadConfig()) -> dict:
    """The defining relations of a one-letter eta collection's cocycle.

    With T' = TST lower triangular, triviality at the parabolic elements plus
    the cocycle property force
        Psi_S = (Psi_S|T') (Psi_S|T)     and     (Psi_S|S) Psi_S = 1.
    Neither residual is tautological for the solver: every slash term needs
    Psi_S on a different t panel, hence separate vertical solves.
    """
    from .sl2z import S, T
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    words = h.words(D)
    Tp = T * S * T
    psiS = psi(h, S, z0, t, D, cfg)
    sTp = rows_slash(words, psi(h, S, z0, Tp.mobius(t), D, cfg), Tp, t)
    sT = rows_slash(words, psi(h, S, z0, T.mobius(t), D, cfg), T, t)
    diff1 = psiS - rows_mul(words, sTp, sT)
    sS = rows_slash(words, psi(h, S, z0, S.mobius(t), D, cfg), S, t)
    unit = np.zeros_like(psiS)
    unit[:, 0] = 1.0
    diff2 = rows_mul(words, sS, psiS) - unit
    rep = _report("eta_example", words, np.concatenate([diff1, diff2]), t)
    rep["product_relation_max"] = float(np.max(np.abs(diff1)))
    rep["involution_relation_max"] = float(np.max(np.abs(diff2)))
    return rep
