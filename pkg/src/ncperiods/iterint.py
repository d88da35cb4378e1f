"""Iterated integrals of cusp forms along hyperbolic paths.

Two independent routes to the same quantities, kept separate on purpose so
they can cross-check each other:

* r_direct: the iterated integral R_l(f_1,...,f_l; y, x; t) by layered
  quadrature.  Level m integrates f_{l-m+1}(z) (z-t)^w I_{m-1}(z) along a
  fixed path from x to y; the running antiderivative of one level is the
  inner factor of the next, so an l-fold integral costs l one-dimensional
  adaptive passes, not a nested mesh.

* vertical_J: the full generating series J(h; z0, oo; t) of all words up to
  degree D at once, as the solution of dJ/dz = Omega(z) J integrated down a
  vertical ray from a certified cutoff height, J(cutoff) = 1.

Paths run point -> vertical -> horizontal connector -> vertical -> point.
A cusp endpoint is traversed in a frame gamma with gamma(oo) = cusp: the
leg near the cusp is a vertical ray in the frame coordinate, where the form
is evaluated at large imaginary part and transported by its automorphy
factor.  The kernel (z - t)^w always uses the true coordinate z; with
Im t < 0 and Im z > 0 the base never meets the principal branch cut, so the
power is unambiguous for fractional w.

All t arguments are panels (1-d arrays) in the lower half plane; every
routine is vectorized over the panel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .modforms import eval_forms, transformation_factor
from .ncpoly import GradedWords, mono_weight
from .quadrature import adaptive_pw
from .sl2z import I2, GroupElement

__all__ = [
    "QuadConfig",
    "IterIntError",
    "Endpoint",
    "IterIntSpec",
    "cusp_frame",
    "zt_pow",
    "r_direct",
    "path_split_check",
    "vertical_J",
    "omega_apply",
    "clear_caches",
]


class IterIntError(Exception):
    pass


@dataclass(frozen=True)
class QuadConfig:
    """Numerical knobs shared by both integration routes.

    rtol/atol control the ODE stepper; quad_tol is the panel resolution
    criterion of the layered route; y_max overrides the automatic cutoff
    height (None means derive it from the forms' decay bounds so the dropped
    tail stays below atol); extended switches the ODE state to 80-bit floats.
    """

    rtol: float = 1e-9
    atol: float = 1e-11
    quad_tol: float = 1e-11
    y_max: float | None = None
    max_steps: int = 100_000
    max_panels: int = 4096
    extended: bool = False


@dataclass(frozen=True)
class Endpoint:
    """Integration endpoint: a point of the upper half plane or a cusp.

    Cusps are rationals (Fraction) or oo (stored as None), i.e. the
    SL2(Z)-orbit representatives gamma(oo).
    """

    kind: str  # "point" | "cusp"
    z: complex = 0j
    cusp_value: Fraction | None = None

    @staticmethod
    def point(z) -> "Endpoint":
        z = complex(z)
        if z.imag <= 0:
            raise ValueError("interior endpoint needs Im z > 0")
        return Endpoint("point", z=z)

    @staticmethod
    def cusp(c) -> "Endpoint":
        if c is None or c in ("oo", "inf"):
            return Endpoint("cusp", cusp_value=None)
        return Endpoint("cusp", cusp_value=Fraction(c))

    @staticmethod
    def coerce(v) -> "Endpoint":
        if isinstance(v, Endpoint):
            return v
        if v is None or (isinstance(v, str) and v in ("oo", "inf")):
            return Endpoint.cusp(None)
        if isinstance(v, (Fraction, int)):
            return Endpoint.cusp(v)
        return Endpoint.point(v)

    @property
    def is_infinity(self) -> bool:
        return self.kind == "cusp" and self.cusp_value is None

    def __repr__(self):
        if self.kind == "point":
            return f"Endpoint({self.z})"
        return f"Endpoint(cusp {'oo' if self.cusp_value is None else self.cusp_value})"


def cusp_frame(c: Fraction) -> GroupElement:
    """gamma with gamma(oo) = c = p/q, q > 0, deterministic choice of column."""
    c = Fraction(c)
    p, q = c.numerator, c.denominator
    # d = p^{-1} mod q in [0, q), b = (p d - 1) / q
    d = pow(p % q, -1, q) if q > 1 else 0
    b = (p * d - 1) // q
    return GroupElement(p, b, q, d)


def zt_pow(z, t, w: float):
    """(z - t)^w, principal branch; safe since Im z > 0 > Im t keeps the base
    off the cut."""
    base = np.asarray(z) - np.asarray(t)
    if w == 0:
        return np.ones_like(base)
    return np.exp(w * np.log(base))


@dataclass(frozen=True)
class _Segment:
    """Straight segment in frame coordinates; true points are frame(tau')."""

    frame: GroupElement
    p0: complex
    p1: complex

    def tau(self, s):
        return self.p0 + np.asarray(s) * (self.p1 - self.p0)

    def z(self, s):
        tau = self.tau(s)
        return tau if self.frame == I2 else self.frame.mobius(tau)

    def dz(self, s):
        d = self.p1 - self.p0
        if self.frame == I2:
            return np.full(np.shape(s), d, dtype=complex)
        return d * self.frame.jfactor(self.tau(s)) ** -2

    def form_values(self, forms, s, tol=1e-13):
        """(n_forms, npts) values of the forms at the true points z(s)."""
        tau = self.tau(np.atleast_1d(s))
        vals = eval_forms(forms, tau, tol=tol)
        if self.frame == I2:
            return vals
        fac = np.stack([transformation_factor(f, self.frame, tau) for f in forms])
        return fac * vals

    def reversed(self) -> "_Segment":
        return _Segment(self.frame, self.p1, self.p0)


def _cutoff_height(kappa: float, C: float, tol: float, polw: float, tfac: float) -> float:
    """Height beyond which C e^(-2 pi kappa Y) (Y tfac)^polw < tol, padded."""
    two_pi_k = 2 * math.pi * kappa
    Y = max(3.0, math.log(max(C, 1.0) / tol) / two_pi_k)
    for _ in range(3):
        Y = max(3.0, (math.log(max(C, 1.0) / tol) + polw * math.log(max(Y * tfac, 2.0))) / two_pi_k)
    return Y + 1.0


def _approach(e: Endpoint, H: float, cutoff: float):
    """Segments running from the endpoint up to abscissa + iH, plus abscissa."""
    if e.kind == "point":
        a = e.z.real
        if abs(e.z.imag - H) < 1e-15:
            return a, []
        return a, [_Segment(I2, e.z, complex(a, H))]
    if e.is_infinity:
        ycut = max(cutoff, H + 1.0)
        return 0.0, [_Segment(I2, complex(0.0, ycut), complex(0.0, H))]
    c = e.cusp_value
    q = c.denominator
    g = cusp_frame(c)
    uj = 1.0 / q
    umax = max(cutoff, uj + 1.0)
    x_frame = -g.d / q
    zj = complex(float(c), 1.0 / q)
    return float(c), [
        _Segment(g, complex(x_frame, umax), complex(x_frame, uj)),
        _Segment(I2, zj, complex(float(c), H)),
    ]


def build_path(x: Endpoint, y: Endpoint, cutoff: float) -> list:
    """Segments from x to y: ascend from x, horizontal connector, descend to y."""
    H = 2.0
    for e in (x, y):
        if e.kind == "point":
            H = max(H, e.z.imag)
    ax, legs_x = _approach(x, H, cutoff)
    ay, legs_y = _approach(y, H, cutoff)
    path = list(legs_x)
    if ax != ay:
        path.append(_Segment(I2, complex(ax, H), complex(ay, H)))
    path.extend(seg.reversed() for seg in reversed(legs_y))
    return path


class _PathAntideriv:
    """Cumulative antiderivative along a segment chain, vanishing at the start."""

    def __init__(self, pws, jumps):
        self.pws = pws      # per-segment antiderivative PwPolys on [0, 1]
        self.jumps = jumps  # value accumulated before each segment

    def seg_eval(self, i, s):
        return self.jumps[i] + self.pws[i](s)

    @property
    def end_value(self):
        return self.jumps[-1] + self.pws[-1](1.0)


def _validate_t(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    if np.any(t.imag >= 0):
        raise ValueError("t panel must lie strictly in the lower half plane")
    return t


def r_direct(forms, y, x, t, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """R_l(f_1,...,f_l; y, x; t) for the t panel; forms[0] is the outermost.

    Layered route: one adaptive pass per level along the path from x to y,
    each level's running antiderivative feeding the next.  Returns shape
    (len(t),).
    """
    t = _validate_t(t)
    forms = list(forms)
    y = Endpoint.coerce(y)
    x = Endpoint.coerce(x)
    if not forms:
        return np.ones(len(t), dtype=complex)
    if y == x:
        return np.zeros(len(t), dtype=complex)
    kappa = min(f.kappa_min for f in forms)
    Cbig = max(f.decay_C for f in forms)
    polw = sum(max(float(f.shifted_weight), 0.0) for f in forms) + len(forms) + 2
    tfac = 1.0 + float(np.max(np.abs(t)))
    cutoff = _cutoff_height(kappa, Cbig, cfg.atol * 1e-2, polw, tfac)
    path = build_path(x, y, cutoff)

    inner = None  # level-0 inner factor is the constant 1
    for m in range(1, len(forms) + 1):
        f = forms[len(forms) - m]
        w = float(f.shifted_weight)
        pws = []
        jumps = []
        acc = np.zeros(len(t), dtype=complex)
        for i, seg in enumerate(path):
            def integrand(s, seg=seg, i=i):
                fv = seg.form_values([f], s)[0]
                zs = seg.z(s)
                base = (fv * seg.dz(s))[:, None] * zt_pow(zs[:, None], t[None, :], w)
                if inner is not None:
                    base = base * inner.seg_eval(i, s)
                return base
            pw = adaptive_pw(integrand, 0.0, 1.0, tol=cfg.quad_tol,
                             max_panels=cfg.max_panels)
            A = pw.antiderivative()
            pws.append(A)
            jumps.append(acc.copy())
            acc = acc + A(1.0)
        inner = _PathAntideriv(pws, jumps)
    return inner.end_value


@dataclass(frozen=True)
class IterIntSpec:
    """A specific iterated integral: ordered forms and endpoints."""

    forms: tuple
    y: Endpoint
    x: Endpoint

    def r(self, t, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
        return r_direct(list(self.forms), self.y, self.x, t, cfg)


def path_split_check(forms, z, y, x, t, cfg: QuadConfig = QuadConfig()) -> dict:
    """Residual of splitting the order-l simplex at an intermediate point:

        R_l(forms; z, x) = sum_{j=0..l} R_j(forms[:j]; z, y) R_{l-j}(forms[j:]; y, x)

    Every term is an independent layered quadrature, so the identity is a
    genuine cross-check, not a rearrangement of one computation."""
    t = _validate_t(t)
    forms = list(forms)
    l = len(forms)
    total = r_direct(forms, z, x, t, cfg)
    acc = np.zeros_like(total)
    for j in range(l + 1):
        acc += r_direct(forms[:j], z, y, t, cfg) * r_direct(forms[j:], y, x, t, cfg)
    resid = np.abs(total - acc)
    return {
        "identity": f"path_split_{l}",
        "order": l,
        "panel": [[float(v.real), float(v.imag)] for v in t],
        "max": float(np.max(resid)),
        "scale": float(np.max(np.abs(total))),
    }


# ---------------------------------------------------------------------------
# generating series along a vertical ray


@lru_cache(maxsize=64)
def _ode_tables(words: GradedWords, support: tuple):
    """Per supported monomial B: indices of the words with prefix B, paired
    with the index of the remaining suffix word."""
    tables = []
    for B in support:
        k = len(B)
        tgt, src = [], []
        for i in range(1, words.total):
            m = words.word(i)
            if len(m) >= k and m[:k] == B:
                tgt.append(i)
                src.append(words.index(m[k:]))
        tables.append((np.asarray(tgt, dtype=np.intp), np.asarray(src, dtype=np.intp)))
    return tuple(tables)


# Dormand-Prince 5(4) tableau
_DP_C = np.array([1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_DP_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_J_CACHE: dict = {}


def clear_caches():
    """Drop memoized generating-series solves (used by determinism checks)."""
    _J_CACHE.clear()


def _collection_data(h):
    """Support monomials, their forms, and kernel powers w(B), aligned."""
    monos = tuple(h.support_monos)
    forms = list(h.support_forms)
    wvec = np.array([float(mono_weight(h.alphabet, m)) for m in monos])
    return monos, forms, wvec


def omega_apply(h, z, t, vals: np.ndarray, D: int) -> np.ndarray:
    """One application of Omega(z) to coefficient rows vals (n_t, n_words):
    the right-hand side dJ/dz = Omega J of the generating-series equation,
    Omega = sum over supported monomials B of h(B; z) (z - t)^w(B) B."""
    t = _validate_t(t)
    words = GradedWords(h.alphabet, D)
    monos, forms, wvec = _collection_data(h)
    out = np.zeros_like(vals)
    if not monos:
        return out
    tables = _ode_tables(words, monos)
    fv = eval_forms(forms, complex(z))[:, 0]
    om = fv[None, :] * np.exp(wvec[None, :] * np.log(complex(z) - t)[:, None])
    for b, (tgt, src) in enumerate(tables):
        out[:, tgt] += om[:, b, None] * vals[:, src]
    return out


def vertical_J(h, z0, t, D: int, cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    """J(h; z0, oo; t) for the t panel: coefficient rows, shape (n_t, n_words).

    Words are indexed by GradedWords(h.alphabet, D); row r is the truncated
    series at t[r].  Solves dJ/dz = Omega(z) J down the vertical ray from the
    cutoff height (where J = 1 holds to below atol) with an adaptive
    Dormand-Prince 5(4) stepper; the linear right side lets each step batch
    its five fresh form evaluations into one call.  Results are memoized on
    (collection digest, z0, t panel, D, config).
    """
    t = _validate_t(t)
    z0 = complex(z0)
    if z0.imag <= 0:
        raise ValueError("base point must have Im z0 > 0")
    words = GradedWords(h.alphabet, D)
    monos, forms, wvec = _collection_data(h)
    if not monos:
        out = np.zeros((len(t), words.total), dtype=complex)
        out[:, 0] = 1.0
        return out
    key = (h.digest, z0, t.tobytes(), D, cfg)
    hit = _J_CACHE.get(key)
    if hit is not None:
        return hit.copy()

    tables = _ode_tables(words, monos)

    if cfg.y_max is not None:
        ymax = float(cfg.y_max)
    else:
        kappa = min(f.kappa_min for f in forms)
        Cbig = max(f.decay_C for f in forms)
        polw = D * max(float(np.max(wvec)), 0.0) + D + 2
        tfac = 1.0 + float(np.max(np.abs(t)))
        ymax = _cutoff_height(kappa, Cbig, cfg.atol * 1e-2, polw, tfac)
    ymax = max(ymax, z0.imag + 1.0)
    x0 = z0.real
    L = ymax - z0.imag

    def omega_at(s_arr):
        """(npts, n_t, n_support) kernel-weighted form values at heights ymax - s."""
        z = x0 + 1j * (ymax - s_arr)
        fv = eval_forms(forms, z)  # (n_support, npts)
        logzt = np.log(z[:, None] - t[None, :])
        return fv.T[:, None, :] * np.exp(wvec[None, None, :] * logzt[:, :, None])

    def rhs(om_row, J):
        out = np.zeros_like(J)
        for b, (tgt, src) in enumerate(tables):
            out[:, tgt] += om_row[:, b, None] * J[:, src]
        out *= -1j  # dz/ds = -i going down the ray
        return out

    dtype = np.clongdouble if cfg.extended else np.complex128
    J = np.zeros((len(t), words.total), dtype=dtype)
    J[:, 0] = 1.0
    s = 0.0
    h_step = min(1.0, L / 10)
    h_min = L / cfg.max_steps
    k1 = rhs(omega_at(np.array([s]))[0], J)
    nsteps = 0
    while s < L - 1e-13 * L:
        if h_step < h_min and L - s > h_min:
            raise IterIntError(
                f"step underflow at height {ymax - s:.3f} (h = {h_step:.2e}); "
                "raise max_steps or loosen tolerances")
        h_step = min(h_step, L - s)
        om = omega_at(s + h_step * _DP_C)
        ks = [k1]
        for j, arow in enumerate(_DP_A):
            acc = J + h_step * sum(a * k for a, k in zip(arow, ks))
            ks.append(rhs(om[j], acc))
        ynew = J + h_step * sum(b * k for b, k in zip(_DP_B, ks) if b)
        ks.append(rhs(om[4], ynew))  # FSAL stage, same height as stage 6
        errv = h_step * sum(e * k for e, k in zip(_DP_E, ks) if e)
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(J), np.abs(ynew))
        err = float(np.max(np.abs(errv) / scale))
        if err <= 1.0:
            s += h_step
            J = ynew
            k1 = ks[-1]
            nsteps += 1
            if nsteps > cfg.max_steps:
                raise IterIntError("step budget exhausted")
        h_step *= float(np.clip(0.9 * max(err, 1e-10) ** -0.2, 0.2, 5.0))

    out = J.astype(np.complex128) if not cfg.extended else J
    _J_CACHE[key] = out
    return out.copy()
