"""TOML run configuration with strict key checking.

Layout::

    [ambient]   tau
    [domain]    kind, radius, center, a, b, path, samples,
                boundary_constant, boundary_cos, boundary_sin
    [solver]    H, h, method, tol, max_iter, steps, max_bisections, jacobian,
                picard_fallback, schedule, seed, check_barriers, gradient_A,
                uniqueness, uniqueness_scale
    [output]    csv, vtk, report
    [curvature] surface, s, n_s, t, vertex_height, graph_coeffs
    [verify]    taus, points, fd_points, seed, surfaces

Every section and key is optional; unknown ones are rejected.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .exceptions import ValidationError

__all__ = ["DEFAULTS", "RunConfig", "load_config", "parse_config"]

DEFAULTS = {
    "ambient": {"tau": 0.0},
    "domain": {
        "kind": "circle",
        "radius": 1.0,
        "center": [0.0, 0.0],
        "a": 2.0,
        "b": 1.0,
        "path": "",
        "samples": 2048,
        "boundary_constant": 0.0,
        "boundary_cos": [],
        "boundary_sin": [],
    },
    "solver": {
        "H": 0.0,
        "h": 0.03125,
        "method": "continuity",
        "tol": 1e-10,
        "max_iter": 50,
        "steps": 10,
        "max_bisections": 8,
        "jacobian": "newton",
        "picard_fallback": True,
        "schedule": [4, 8, 16],
        "seed": 0,
        "check_barriers": True,
        "gradient_A": 1.0,
        "uniqueness": False,
        "uniqueness_scale": 0.1,
    },
    "output": {"csv": True, "vtk": True, "report": True},
    "curvature": {
        "surface": "cylinder",
        "s": [],
        "n_s": 8,
        "t": [1.0],
        "vertex_height": 1.0,
        "graph_coeffs": [],
    },
    "verify": {
        "taus": [0.0, 0.5, -0.5, 2.0, -2.0],
        "points": 1000,
        "fd_points": 50,
        "seed": 0,
        "surfaces": True,
    },
}

_CHOICES = {
    ("domain", "kind"): ("circle", "ellipse", "user-parametric"),
    ("solver", "method"): ("continuity", "exhaustion", "newton"),
    ("solver", "jacobian"): ("newton", "picard"),
    ("curvature", "surface"): ("cylinder", "cone", "graph"),
}


def _coerce(section, key, value, default):
    where = f"[{section}] {key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValidationError(f"{where} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ValidationError(f"{where} must be a string")
        choices = _CHOICES.get((section, key))
        if choices and value not in choices:
            raise ValidationError(f"{where} must be one of {', '.join(choices)}; got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ValidationError(f"{where} must be an array")
        if key == "graph_coeffs":
            out = []
            for term in value:
                if not (isinstance(term, list) and len(term) == 3):
                    raise ValidationError(f"{where} entries must be [i, j, c]")
                i, j, c = term
                if not (isinstance(i, int) and isinstance(j, int) and i >= 0 and j >= 0):
                    raise ValidationError(f"{where} exponents must be non-negative integers")
                out.append([i, j, float(c)])
            return out
        if key == "schedule":
            if not value or not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in value):
                raise ValidationError(f"{where} must be a non-empty array of positive integers")
            return list(value)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ValidationError(f"{where} must hold numbers")
        return [float(v) for v in value]
    raise ValidationError(f"{where}: unsupported value")  # pragma: no cover


@dataclass
class RunConfig:
    """Validated configuration; ``sections`` mirrors :data:`DEFAULTS`."""

    sections: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))
    base_dir: Path = field(default_factory=Path.cwd)
    command: str = "solve"

    def __getitem__(self, section):
        return self.sections[section]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.sections)

    def dumps(self) -> str:
        return tomli_w.dumps(self.sections)

    def domain_path(self):
        p = self["domain"]["path"]
        if not p:
            return None
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path


def parse_config(data: dict, base_dir=None, command: str = "solve") -> RunConfig:
    if not isinstance(data, dict):
        raise ValidationError("configuration must be a table")
    sections = copy.deepcopy(DEFAULTS)
    for section, values in data.items():
        if section not in DEFAULTS:
            raise ValidationError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ValidationError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ValidationError(f"unknown key {key!r} in [{section}]")
            sections[section][key] = _coerce(section, key, value, DEFAULTS[section][key])
    s = sections
    if len(s["domain"]["center"]) != 2:
        raise ValidationError("[domain] center must have two entries")
    if s["domain"]["kind"] == "user-parametric" and not s["domain"]["path"]:
        raise ValidationError("[domain] kind = 'user-parametric' needs a path to an s,x,y CSV")
    for sec, key in (("domain", "radius"), ("domain", "a"), ("domain", "b"), ("solver", "h"),
                     ("solver", "tol"), ("solver", "gradient_A")):
        if not s[sec][key] > 0:
            raise ValidationError(f"[{sec}] {key} must be positive")
    for sec, key in (("domain", "samples"), ("solver", "max_iter"), ("solver", "steps"),
                     ("verify", "points"), ("verify", "fd_points"), ("curvature", "n_s")):
        if not s[sec][key] >= 1:
            raise ValidationError(f"[{sec}] {key} must be at least 1")
    return RunConfig(sections, Path(base_dir) if base_dir else Path.cwd(), command)


def load_config(path, command: str = "solve") -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(data, path.parent, command)
