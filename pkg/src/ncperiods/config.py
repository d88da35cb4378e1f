"""Run configuration: alphabet/panel specs, quadrature knobs, reporting.

A RunConfig is the single source every command resolves before doing any
work, and every report embeds the resolved dict so runs are reproducible
from their own output.  File values come from a JSON object with the same
field names; explicit flags override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .iterint import QuadConfig
from .ncpoly import Alphabet, Letter

__all__ = [
    "DEFAULT_PANEL",
    "RunConfig",
    "ConfigError",
    "parse_alphabet",
    "format_alphabet",
    "parse_panel",
]

# canonical 5-point panel in the lower half plane
DEFAULT_PANEL = (-0.8j, -1.5j, -0.4 - 0.9j, 0.6 - 1.1j, -1.3 - 0.5j)


class ConfigError(ValueError):
    pass


def parse_alphabet(spec: str) -> Alphabet:
    """Alphabet from a spec string.

    "10:trivial,4:trivial" lists shifted weights with multipliers; "eta4" is
    the one-letter alphabet of the eta-power collection eta^4.
    """
    spec = spec.strip()
    if spec.startswith("eta"):
        try:
            N = int(spec[3:])
        except ValueError:
            raise ConfigError(f"bad eta alphabet spec {spec!r}")
        if not 1 <= N <= 24:
            raise ConfigError(f"eta power must be 1..24, got {N}")
        return Alphabet((Letter.eta(N),))
    letters = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            wtext, mult = part.split(":", 1)
        else:
            wtext, mult = part, "trivial"
        try:
            w = int(wtext)
        except ValueError:
            raise ConfigError(f"bad weight {wtext!r} in alphabet spec")
        mult = mult.strip().lower()
        try:
            if mult == "trivial":
                letters.append(Letter.trivial(w))
            elif mult.startswith("eta"):
                N = int(mult[3:])
                L = Letter.eta(N)
                if L.weight != w:
                    raise ConfigError(f"eta{N} letter has weight {L.weight}, spec says {w}")
                letters.append(L)
            else:
                raise ConfigError(f"unknown multiplier {mult!r}")
        except ValueError as e:
            raise ConfigError(f"bad letter {part!r}: {e}")
    if not letters:
        raise ConfigError(f"empty alphabet spec {spec!r}")
    return Alphabet(tuple(letters))


def format_alphabet(alphabet: Alphabet) -> str:
    parts = []
    for L in alphabet.letters:
        if L.multiplier.kind == "trivial":
            parts.append(f"{int(L.weight)}:trivial")
        else:
            parts.append(f"{L.weight}:eta{L.multiplier.N}")
    return ",".join(parts)


def parse_panel(spec) -> tuple:
    """Panel points from "re+imj;re+imj;..." or a list of [re, im] pairs."""
    if isinstance(spec, str):
        vals = [complex(p.replace(" ", "")) for p in spec.split(";") if p.strip()]
    else:
        vals = [complex(p[0], p[1]) if isinstance(p, (list, tuple)) else complex(p)
                for p in spec]
    if not vals:
        raise ConfigError("empty panel")
    for v in vals:
        if v.imag >= 0:
            raise ConfigError(f"panel point {v} not in the lower half plane")
    return tuple(vals)


@dataclass(frozen=True)
class RunConfig:
    alphabet: str = "10:trivial"
    degree: int = 3
    rtol: float = 1e-9
    atol: float = 1e-11
    quad_tol: float = 1e-11
    y_max: float | None = None
    max_steps: int = 100_000
    precision: str = "double"  # "double" | "extended"
    panel: tuple = DEFAULT_PANEL
    format: str = "json"  # "json" | "csv"
    seed: int = 0
    threshold: float = 1e-7
    z0: complex = 2.0j

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError("degree must be >= 1")
        if self.precision not in ("double", "extended"):
            raise ConfigError(f"precision must be double or extended, got {self.precision!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        object.__setattr__(self, "panel", parse_panel(self.panel))
        parse_alphabet(self.alphabet)  # validate early
        z0 = complex(self.z0)
        if z0.imag <= 0:
            raise ConfigError("z0 must lie in the upper half plane")
        object.__setattr__(self, "z0", z0)

    @classmethod
    def from_sources(cls, path: str | None = None, **overrides) -> "RunConfig":
        """File values (if any) merged with explicit overrides (flags win)."""
        data = {}
        if path is not None:
            with open(path) as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise ConfigError("config file must hold a JSON object")
            known = {f.name for f in fields(cls)}
            unknown = set(raw) - known
            if unknown:
                raise ConfigError(f"unknown config fields: {sorted(unknown)}")
            data.update(raw)
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "panel" in data:
            data["panel"] = parse_panel(data["panel"])
        if "z0" in data and isinstance(data["z0"], (list, tuple)):
            data["z0"] = complex(data["z0"][0], data["z0"][1])
        return cls(**data)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def quad(self) -> QuadConfig:
        return QuadConfig(
            rtol=self.rtol,
            atol=self.atol,
            quad_tol=self.quad_tol,
            y_max=self.y_max,
            max_steps=self.max_steps,
            extended=(self.precision == "extended"),
        )

    def the_alphabet(self) -> Alphabet:
        return parse_alphabet(self.alphabet)

    def panel_array(self) -> np.ndarray:
        return np.asarray(self.panel, dtype=complex)

    def resolved(self) -> dict:
        """JSON-ready dict of every field, embedded in all reports."""
        return {
            "alphabet": self.alphabet,
            "degree": self.degree,
            "rtol": self.rtol,
            "atol": self.atol,
            "quad_tol": self.quad_tol,
            "y_max": self.y_max,
            "max_steps": self.max_steps,
            "precision": self.precision,
            "panel": [[p.real, p.imag] for p in self.panel],
            "format": self.format,
            "seed": self.seed,
            "threshold": self.threshold,
            "z0": [self.z0.real, self.z0.imag],
        }
