"""Truncated noncommutative series over a weighted alphabet.

Letters carry a shifted weight w (the kernel exponent; actual modular weight
is w + 2) and a multiplier spec.  Words over the letters are graded by length
and indexed degree-major, positionally within a degree (base-ell digits, most
significant first), so concatenation is index arithmetic and degreewise
multiplication reduces to outer products.

An NcPoly holds one complex coefficient per word of degree <= D.  Everything
is immutable after construction; mixing truncation degrees or alphabets is an
error, never an implicit re-truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .sl2z import GroupElement, eta_epsilon, sqrt_lower

__all__ = [
    "MultiplierSpec",
    "TRIVIAL",
    "Letter",
    "Alphabet",
    "GradedWords",
    "NcPoly",
    "mono_weight",
    "mono_multiplier",
    "mono_str",
    "parse_mono",
    "nc_mul",
    "nc_inv",
    "slash_factors",
]

# Monomials are tuples of 1-based letter indices, () for the empty word.
Mono = tuple


@dataclass(frozen=True)
class MultiplierSpec:
    """Trivial, or the eta-power multiplier epsilon^N (N taken mod 24)."""

    kind: str  # "trivial" | "eta_power"
    N: int = 0

    def __post_init__(self):
        if self.kind == "trivial":
            if self.N != 0:
                raise ValueError("trivial multiplier carries no eta power")
        elif self.kind == "eta_power":
            if not 1 <= self.N <= 24:
                raise ValueError(f"eta power N must be in 1..24, got {self.N}")
        else:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")

    @staticmethod
    def trivial() -> "MultiplierSpec":
        return MultiplierSpec("trivial")

    @staticmethod
    def eta_power(N: int) -> "MultiplierSpec":
        return MultiplierSpec("eta_power", N)

    @property
    def eta_N(self) -> int:
        return self.N if self.kind == "eta_power" else 0

    def value(self, gamma: GroupElement) -> complex:
        if self.kind == "trivial":
            return 1.0 + 0.0j
        return eta_epsilon(gamma) ** self.N


TRIVIAL = MultiplierSpec.trivial()


@dataclass(frozen=True)
class Letter:
    """One alphabet letter: shifted weight w (modular weight w+2) + multiplier."""

    weight: Fraction
    multiplier: MultiplierSpec

    def __post_init__(self):
        w = Fraction(self.weight)
        object.__setattr__(self, "weight", w)
        if w + 2 <= 0:
            raise ValueError(f"need w + 2 > 0, got w = {w}")
        if self.multiplier.kind == "trivial":
            if w.denominator != 1 or w.numerator % 2 != 0:
                raise ValueError(f"trivial multiplier needs even integer w, got {w}")
        else:
            if w != Fraction(self.multiplier.N, 2) - 2:
                raise ValueError(
                    f"eta-power letter needs w = N/2 - 2, got w = {w}, N = {self.multiplier.N}"
                )

    @staticmethod
    def trivial(w: int) -> "Letter":
        return Letter(Fraction(w), TRIVIAL)

    @staticmethod
    def eta(N: int) -> "Letter":
        return Letter(Fraction(N, 2) - 2, MultiplierSpec.eta_power(N))


@dataclass(frozen=True)
class Alphabet:
    letters: tuple

    def __post_init__(self):
        if not self.letters:
            raise ValueError("alphabet must have at least one letter")
        object.__setattr__(self, "letters", tuple(self.letters))

    @property
    def ell(self) -> int:
        return len(self.letters)

    def letter(self, j: int) -> Letter:
        """1-based letter lookup, matching the A1, A2, ... naming."""
        if not 1 <= j <= self.ell:
            raise IndexError(f"letter index {j} out of range 1..{self.ell}")
        return self.letters[j - 1]

    def describe(self) -> list:
        out = []
        for L in self.letters:
            if L.multiplier.kind == "trivial":
                out.append({"weight": int(L.weight), "multiplier": "trivial"})
            else:
                out.append({"weight": str(L.weight), "multiplier": f"eta{L.multiplier.N}"})
        return out


def mono_weight(alphabet: Alphabet, m: Mono) -> Fraction:
    """Total shifted weight w(B) = sum of letter weights; empty word -> 0."""
    return sum((alphabet.letter(j).weight for j in m), Fraction(0))


def mono_eta_power(alphabet: Alphabet, m: Mono) -> int:
    return sum(alphabet.letter(j).multiplier.eta_N for j in m)


def mono_multiplier(alphabet: Alphabet, m: Mono, gamma: GroupElement) -> complex:
    """v(B)(gamma): product of letter multipliers; order never matters."""
    N = mono_eta_power(alphabet, m)
    if N % 24 == 0:
        return 1.0 + 0.0j
    return eta_epsilon(gamma) ** (N % 24)


def mono_str(m: Mono) -> str:
    if not m:
        return "1"
    return "*".join(f"A{j}" for j in m)


def parse_mono(text: str) -> Mono:
    text = text.strip()
    if text == "1":
        return ()
    parts = text.split("*")
    out = []
    for p in parts:
        p = p.strip()
        if not p.startswith("A"):
            raise ValueError(f"bad monomial token {p!r} in {text!r}")
        out.append(int(p[1:]))
    return tuple(out)


class GradedWords:
    """Indexing of all words of degree <= D over an alphabet.

    Global index of a word (m_1,...,m_d): offsets[d] + sum (m_i - 1) ell^(d-1-i),
    i.e. degree-major, then base-ell positional with the leftmost letter most
    significant.  Concatenation is then
        idx(BC) = offsets[dB+dC] + pos(B) * ell^dC + pos(C)
    which makes degreewise products contiguous outer products.
    """

    def __init__(self, alphabet: Alphabet, D: int):
        if D < 0:
            raise ValueError("truncation degree must be >= 0")
        self.alphabet = alphabet
        self.D = D
        ell = alphabet.ell
        self.offsets = [0]
        for d in range(D + 1):
            self.offsets.append(self.offsets[-1] + ell**d)
        self.total = self.offsets[-1]
        self._weights = None
        self._eta_powers = None

    def __eq__(self, other):
        return (
            isinstance(other, GradedWords)
            and self.alphabet == other.alphabet
            and self.D == other.D
        )

    def __hash__(self):
        return hash((self.alphabet, self.D))

    def index(self, m: Mono) -> int:
        d = len(m)
        if d > self.D:
            raise ValueError(f"degree {d} exceeds truncation {self.D}")
        ell = self.alphabet.ell
        pos = 0
        for j in m:
            if not 1 <= j <= ell:
                raise ValueError(f"letter index {j} out of range")
            pos = pos * ell + (j - 1)
        return self.offsets[d] + pos

    def word(self, idx: int) -> Mono:
        if not 0 <= idx < self.total:
            raise IndexError(idx)
        d = 0
        while idx >= self.offsets[d + 1]:
            d += 1
        pos = idx - self.offsets[d]
        ell = self.alphabet.ell
        digits = []
        for _ in range(d):
            digits.append(pos % ell + 1)
            pos //= ell
        return tuple(reversed(digits))

    def words_of_degree(self, d: int):
        for pos in range(self.alphabet.ell**d):
            yield self.word(self.offsets[d] + pos)

    def all_words(self):
        for idx in range(self.total):
            yield self.word(idx)

    def block(self, d: int) -> slice:
        return slice(self.offsets[d], self.offsets[d + 1])

    # cached per-word weight/eta-power tables used by the slash action
    def _tables(self):
        if self._weights is None:
            w = np.empty(self.total, dtype=float)
            n = np.empty(self.total, dtype=np.int64)
            for idx in range(self.total):
                m = self.word(idx)
                w[idx] = float(mono_weight(self.alphabet, m))
                n[idx] = mono_eta_power(self.alphabet, m)
            self._weights = w
            self._eta_powers = n
        return self._weights, self._eta_powers


@dataclass(frozen=True)
class NcPoly:
    """Element of the truncated series ring: one coefficient per word."""

    words: GradedWords
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.words.total,):
            raise ValueError("coefficient vector length mismatch")

    @staticmethod
    def zero(words: GradedWords, dtype=np.complex128) -> "NcPoly":
        return NcPoly(words, np.zeros(words.total, dtype=dtype))

    @staticmethod
    def one(words: GradedWords, dtype=np.complex128) -> "NcPoly":
        c = np.zeros(words.total, dtype=dtype)
        c[0] = 1.0
        return NcPoly(words, c)

    @staticmethod
    def from_dict(words: GradedWords, data: dict, dtype=np.complex128) -> "NcPoly":
        c = np.zeros(words.total, dtype=dtype)
        for m, v in data.items():
            c[words.index(m)] = v
        return NcPoly(words, c)

    def coeff(self, m: Mono) -> complex:
        return complex(self.coeffs[self.words.index(m)])

    def to_dict(self) -> dict:
        return {self.words.word(i): complex(c) for i, c in enumerate(self.coeffs)}

    def degree_part(self, d: int) -> np.ndarray:
        return self.coeffs[self.words.block(d)]

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_unit_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.coeffs[0] - 1.0) <= tol

    def __add__(self, other: "NcPoly") -> "NcPoly":
        _check_same(self, other)
        return NcPoly(self.words, self.coeffs + other.coeffs)

    def __sub__(self, other: "NcPoly") -> "NcPoly":
        _check_same(self, other)
        return NcPoly(self.words, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "NcPoly":
        if isinstance(scalar, NcPoly):
            return nc_mul(self, scalar)
        return NcPoly(self.words, self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c != 0:
                terms.append(f"({c:.6g})*{mono_str(self.words.word(i))}")
            if len(terms) > 6:
                terms.append("...")
                break
        return "NcPoly(" + (" + ".join(terms) if terms else "0") + ")"


def _check_same(x: NcPoly, y: NcPoly):
    if x.words != y.words:
        raise ValueError("mixed truncation degree or alphabet")


def _mul_raw(w: GradedWords, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Concatenation product on raw coefficient vectors, no dtype changes."""
    out = np.zeros(w.total, dtype=np.result_type(xs, ys))
    for d in range(w.D + 1):
        acc = out[w.block(d)]
        for d1 in range(d + 1):
            acc += np.outer(xs[w.block(d1)], ys[w.block(d - d1)]).ravel()
    return out


def nc_mul(x: NcPoly, y: NcPoly) -> NcPoly:
    """Concatenation product, truncated at D.

    Accumulates in 80-bit extended precision: inverse coefficients grow large
    and cancel, and the extra digits keep the double-precision result at the
    cancellation-free rounding floor.  The vectors are tiny, so this is cheap.
    """
    _check_same(x, y)
    w = x.words
    dtype = np.result_type(x.coeffs, y.coeffs)
    out = _mul_raw(w, x.coeffs.astype(np.clongdouble), y.coeffs.astype(np.clongdouble))
    return NcPoly(w, out.astype(dtype))


def nc_inv(x: NcPoly) -> NcPoly:
    """Inverse in N(A) by the geometric series sum_{k<=D} (1-x)^k.

    Exact in the truncated ring (u = 1-x is nilpotent).  The result keeps the
    extended-precision dtype of the accumulation: inverse coefficients are
    large and cancel against x in products, and rounding them to double costs
    three digits in the two-sided inverse residual for no benefit.
    """
    if abs(x.coeffs[0] - 1.0) > 1e-9:
        raise ValueError(f"nc_inv needs constant term 1, got {x.coeffs[0]}")
    w = x.words
    u = -x.coeffs.astype(np.clongdouble)
    u[0] += 1.0  # u = 1 - x, constant term ~ 0
    out = np.zeros(w.total, dtype=np.clongdouble)
    out[0] = 1.0
    power = out.copy()
    for _ in range(w.D):
        power = _mul_raw(w, power, u)
        out += power
    return NcPoly(w, out)


def slash_factors(words: GradedWords, gamma: GroupElement, t) -> np.ndarray:
    """Per-word slash factors v(B)(gamma)^(-1) (ct+d)^(w(B)) at t in the lower
    half plane.

    The power is assembled per word as sqrt_lower(ct+d)^(N mod 24) times an
    integer power of ct+d, with the eta-power reduced mod 24 and the reduction
    compensated exactly by the integer exponent.  t may be a scalar or a 1-d
    array; the result has shape (..., n_words).
    """
    wvec, nvec = words._tables()
    nred = nvec % 24
    iexp = np.rint(wvec - nred / 2.0).astype(np.int64)
    eps = eta_epsilon(gamma)
    vinv = np.where(nred == 0, 1.0 + 0.0j, eps ** (-nred.astype(float)))
    t = np.asarray(t)
    j = gamma.c * t + gamma.d
    if t.ndim == 0:
        return vinv * sqrt_lower(j) ** nred * j**iexp
    return vinv[None, :] * sqrt_lower(j)[:, None] ** nred[None, :] * j[:, None] ** iexp[None, :]
