"""Evaluable cusp forms: truncated q-expansions with certified tails.

A CuspForm bundles a q-expansion (exact coefficients cast to complex), the
shifted weight w (modular weight w + 2), a multiplier spec, and a decay bound
|f(x+iy)| <= C exp(-2 pi kappa_min y) valid for y >= 1.  Evaluation refuses,
rather than silently degrades, when the stored expansion cannot certify the
requested tolerance at the requested height.

Supported spaces: the eta powers eta^N, level-one trivial-multiplier cusp
forms (echelonized Delta * E4^b * E6^c), and eta^N' times level-one modular
forms, which together realize every cusp space S_{w+2}(SL2(Z), eps^N') a
monomial over a Trivial/EtaPower alphabet can ask for.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import qexp
from .ncpoly import MultiplierSpec, TRIVIAL
from .sl2z import GroupElement, eta_epsilon, sqrt_upper

__all__ = [
    "QSeries",
    "CuspForm",
    "EvalError",
    "eta_qseries",
    "eta_form",
    "level_one_basis",
    "cusp_space_basis",
    "eval_form",
    "eval_forms",
    "multiplier_value",
    "transformation_factor",
    "form_linear_combination",
    "form_to_json",
    "form_from_json",
    "eta_epsilon",
]

DEFAULT_M = 200


class EvalError(Exception):
    """Stored expansion cannot certify the requested tolerance."""


@dataclass(frozen=True)
class QSeries:
    """sum_n coeffs[n] q^(n + kappa), q = exp(2 pi i tau).

    kappa is a rational with denominator dividing 24 (integer for trivial
    multipliers, N/24 for eta powers), so q^kappa is an exact integer power
    of q^(1/24).
    """

    kappa: Fraction
    coeffs: np.ndarray

    def __post_init__(self):
        k = Fraction(self.kappa)
        if k <= 0 or (24 * k).denominator != 1:
            raise ValueError(f"kappa must be positive with denominator | 24, got {k}")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    @property
    def r24(self) -> int:
        """kappa as an exact multiple of 1/24."""
        return int(24 * self.kappa)


@dataclass(frozen=True)
class CuspForm:
    shifted_weight: Fraction
    multiplier: MultiplierSpec
    expansion: QSeries
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "shifted_weight", Fraction(self.shifted_weight))

    @property
    def weight(self) -> Fraction:
        return self.shifted_weight + 2

    @property
    def kappa_min(self) -> float:
        return float(self.expansion.kappa)

    @property
    def growth_power(self) -> float:
        # crude coefficient growth model |a_n| <= c_g (n+1)^p, enough for tails
        return float(self.weight) + 2.0

    @property
    def growth_const(self) -> float:
        a = np.abs(self.expansion.coeffs)
        n = np.arange(len(a), dtype=float) + 1.0
        return float(np.max(a / n**self.growth_power)) if len(a) else 0.0

    @property
    def decay_C(self) -> float:
        """|f(x+iy)| <= decay_C * exp(-2 pi kappa_min y) for y >= 1."""
        a = np.abs(self.expansion.coeffs)
        n = np.arange(len(a), dtype=float)
        head = float(np.sum(a * np.exp(-2 * np.pi * n)))
        M = self.expansion.M
        # stored-tail bound at y = 1 via the growth model
        x = np.exp(-2 * np.pi)
        rho = x * (1 + 1 / (M + 2)) ** self.growth_power
        tail = self.growth_const * (M + 2) ** self.growth_power * x ** (M + 1) / (1 - rho)
        return head + tail

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.expansion.coeffs == 0))

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.shifted_weight).encode())
        h.update(f"{self.multiplier.kind}:{self.multiplier.N}".encode())
        h.update(str(self.expansion.kappa).encode())
        h.update(np.ascontiguousarray(self.expansion.coeffs).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, CuspForm) and self.digest == other.digest

    def __hash__(self):
        return hash(self.digest)

    def __repr__(self):
        name = self.label or f"w={self.shifted_weight}"
        return f"CuspForm({name}, kappa={self.expansion.kappa})"


def eta_qseries(N: int, M: int = DEFAULT_M) -> QSeries:
    """q-expansion of eta^N: kappa = N/24, integer product coefficients."""
    return QSeries(Fraction(N, 24), np.array(qexp.eta_power_coeffs(N, M), dtype=complex))


def eta_form(N: int, M: int = DEFAULT_M) -> CuspForm:
    mult = TRIVIAL if N == 24 else MultiplierSpec.eta_power(N)
    return CuspForm(Fraction(N, 2) - 2, mult, eta_qseries(N, M), label=f"eta^{N}")


def level_one_basis(k: int, M: int = DEFAULT_M) -> list:
    """Echelonized basis of S_k(SL2(Z), trivial); [] when the space is zero."""
    if k % 2 or k < 12:
        return []
    rows = qexp.cusp_basis_coeffs(k, M)
    out = []
    for i, row in enumerate(rows):
        lead = i + 1  # row i is q^(i+1) + O(q^(d+1))
        coeffs = np.array([float(x) for x in row[lead:]], dtype=complex)
        q = QSeries(Fraction(lead), coeffs)
        out.append(CuspForm(Fraction(k - 2), TRIVIAL, q, label=f"S{k}.{i + 1}"))
    return out


def cusp_space_basis(w: Fraction, multiplier: MultiplierSpec, M: int = DEFAULT_M) -> list:
    """Basis of S_{w+2}(SL2(Z), v) for v trivial or an eta power.

    Nontrivial eta power N' in 1..23: the space is eta^N' * M_{w+2-N'/2},
    echelonized through the modular-form factor.
    """
    w = Fraction(w)
    k = w + 2
    if multiplier.kind == "trivial":
        if k.denominator != 1:
            return []
        return level_one_basis(int(k), M)
    N = multiplier.N % 24
    if N == 0:
        return level_one_basis(int(k), M) if k.denominator == 1 else []
    m = k - Fraction(N, 2)
    if m.denominator != 1 or m < 0 or int(m) % 2:
        return []
    mrows = qexp.modular_basis_coeffs(int(m), M)
    eta_c = qexp.eta_power_coeffs(N, M)
    out = []
    for i, row in enumerate(mrows):
        prod = qexp.mul_trunc(list(eta_c), [Fraction(x) for x in row], M)
        # leading term q^(N/24 + i): strip the known zero head
        coeffs = np.array([float(x) for x in prod[i:]], dtype=complex)
        assert coeffs[0] != 0
        q = QSeries(Fraction(N, 24) + i, coeffs)
        out.append(CuspForm(w, MultiplierSpec.eta_power(N), q, label=f"eta{N}.M{int(m)}.{i}"))
    return out


def _tail_bound(f: CuspForm, y: float) -> float:
    """Certified bound on the dropped tail sum_{n > M} |a_n| |q|^(n+kappa)."""
    M = f.expansion.M
    p = f.growth_power
    x = np.exp(-2 * np.pi * y)
    rho = x * (1 + 1 / (M + 2)) ** p
    if rho >= 0.999:
        return np.inf
    first = f.growth_const * (M + 2) ** p * x ** (M + 1 + float(f.expansion.kappa))
    return float(first / (1 - rho))


def eval_forms(forms, tau, tol: float = 1e-13) -> np.ndarray:
    """Evaluate several forms at points tau (Im tau > 0), sharing power tables.

    Returns shape (n_forms, n_tau).  Raises EvalError when any stored
    expansion cannot push its tail below tol at min Im tau.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=complex))
    ymin = float(np.min(tau.imag))
    if ymin <= 0:
        raise ValueError("evaluation requires Im tau > 0")
    for f in forms:
        tb = _tail_bound(f, ymin)
        if not tb < tol:
            raise EvalError(
                f"{f!r}: tail bound {tb:.2e} > tol {tol:.1e} at Im tau = {ymin:.4f}; "
                "expansion too short for this height"
            )
    Mmax = max(f.expansion.M for f in forms)
    q24 = np.exp(2j * np.pi * tau / 24)
    q = q24**24
    pows = np.empty((len(tau), Mmax + 1), dtype=complex)
    pows[:, 0] = 1.0
    if Mmax:
        np.cumprod(np.broadcast_to(q[:, None], (len(tau), Mmax)), axis=1, out=pows[:, 1:])
    out = np.empty((len(forms), len(tau)), dtype=complex)
    for i, f in enumerate(forms):
        M = f.expansion.M
        out[i] = (pows[:, : M + 1] @ f.expansion.coeffs) * q24 ** f.expansion.r24
    return out


def eval_form(f: CuspForm, tau, tol: float = 1e-13):
    """Single-form wrapper; scalar in, scalar out."""
    scalar = np.ndim(tau) == 0
    vals = eval_forms([f], tau, tol)[0]
    return complex(vals[0]) if scalar else vals


def multiplier_value(spec: MultiplierSpec, gamma: GroupElement) -> complex:
    return spec.value(gamma)


def transformation_factor(f: CuspForm, gamma: GroupElement, tau) -> np.ndarray:
    """Full factor in f(gamma tau) = factor * f(tau), tau in the upper half
    plane, principal square root per eta-power unit."""
    N = f.multiplier.eta_N % 24
    j = gamma.c * np.asarray(tau, dtype=complex) + gamma.d
    iexp = int(f.weight - Fraction(N, 2))
    return multiplier_value(f.multiplier, gamma) * sqrt_upper(j) ** N * j**iexp


def form_linear_combination(coeffs, forms) -> CuspForm:
    """sum_j coeffs[j] forms[j] within one cusp space."""
    forms = list(forms)
    if not forms:
        raise ValueError("need at least one form")
    w, mult = forms[0].shifted_weight, forms[0].multiplier
    for f in forms[1:]:
        if f.shifted_weight != w or f.multiplier != mult:
            raise ValueError("forms live in different spaces")
    r0 = min(f.expansion.r24 for f in forms)
    M = min(f.expansion.M + (f.expansion.r24 - r0) // 24 for f in forms)
    acc = np.zeros(M + 1, dtype=complex)
    bound = np.zeros(M + 1)  # per-index input magnitude, to spot cancellation zeros
    for c, f in zip(coeffs, forms):
        off = (f.expansion.r24 - r0) // 24
        n = min(M + 1 - off, f.expansion.M + 1)
        acc[off : off + n] += c * f.expansion.coeffs[:n]
        bound[off : off + n] += abs(c) * np.abs(f.expansion.coeffs[:n])
    live = np.abs(acc) > 1e-12 * bound
    if not live.any():
        return CuspForm(w, mult, QSeries(Fraction(r0, 24), np.zeros(M + 1, complex)), label="zero")
    lead = int(np.argmax(live))
    return CuspForm(
        w, mult, QSeries(Fraction(r0 + 24 * lead, 24), acc[lead:]), label="combo"
    )


def form_to_json(f: CuspForm) -> dict:
    mult = (
        {"type": "trivial"}
        if f.multiplier.kind == "trivial"
        else {"type": "eta_power", "N": f.multiplier.N}
    )
    return {
        "weight": str(f.shifted_weight),
        "multiplier": mult,
        "kappa": str(f.expansion.kappa),
        "coeffs": [[float(c.real), float(c.imag)] for c in f.expansion.coeffs],
        "label": f.label,
    }


def form_from_json(data: dict) -> CuspForm:
    mult = (
        TRIVIAL
        if data["multiplier"]["type"] == "trivial"
        else MultiplierSpec.eta_power(int(data["multiplier"]["N"]))
    )
    coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
    return CuspForm(
        Fraction(data["weight"]),
        mult,
        QSeries(Fraction(data["kappa"]), coeffs),
        label=data.get("label", ""),
    )
