"""Run configuration: JSON schema, defaults and command-line overrides."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import jsonschema

from .certify import DEFAULT_BUDGET
from .errors import GridMisaligned, SpecError
from .fdsolver.grid import GridSpec
from .geometry import WaveguideSpec

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "a"],
    "properties": {
        "variant": {"enum": ["CenteredObstacles", "MidlineSegments", "Unobstructed"]},
        "wall_bc": {"enum": ["Neumann", "Dirichlet", "NeumannWalls", "DirichletWalls"]},
        "n": {"type": "integer", "minimum": 1},
        "a": {"type": "number", "exclusiveMinimum": 0},
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["zero", "parabolic", "cosine", "samples"]},
                "amplitude": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "values": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                    "minItems": 257,
                },
            },
            "allOf": [
                {
                    "if": {"properties": {"kind": {"enum": ["parabolic", "cosine"]}}},
                    "then": {"required": ["amplitude"]},
                },
                {"if": {"properties": {"kind": {"const": "samples"}}}, "then": {"required": ["values"]}},
            ],
        },
        "budget": {"type": "integer", "minimum": 1},
        "k": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "hx": {"type": "number", "exclusiveMinimum": 0},
                "hy": {"type": "number", "exclusiveMinimum": 0},
                "l": {"type": "number", "exclusiveMinimum": 0},
                "truncation_bc": {"enum": ["dirichlet", "neumann"]},
            },
        },
    },
}


class ConfigError(SpecError):
    """The configuration file is unreadable or violates the schema."""


@dataclass(frozen=True)
class RunConfig:
    spec: WaveguideSpec
    grid: GridSpec = field(default_factory=GridSpec)
    budget: int = DEFAULT_BUDGET
    k: Optional[int] = None
    seed: int = 0

    @property
    def modes_k(self):
        return 2 * self.spec.n if self.k is None else self.k

    def to_dict(self):
        """Fully resolved configuration, defaults included."""
        d = self.spec.to_dict()
        d.update({"budget": self.budget, "k": self.modes_k, "seed": self.seed, "grid": self.grid.to_dict()})
        return d


def validate(raw):
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from None
    return raw


def from_dict(raw) -> RunConfig:
    validate(raw)
    try:
        spec = WaveguideSpec.from_dict(raw)
        g = raw.get("grid", {})
        default = GridSpec()
        grid = GridSpec(
            g.get("l", default.l), g.get("hx", default.hx), g.get("hy", default.hy), g.get("truncation_bc", "dirichlet")
        )
    except (SpecError, GridMisaligned) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(spec, grid, raw.get("budget", DEFAULT_BUDGET), raw.get("k"), raw.get("seed", 0))


def load(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return from_dict(raw)


def parse_grid(text: str) -> GridSpec:
    """``"hx,hy,L"`` -> :class:`GridSpec`."""
    try:
        hx, hy, big_l = (float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"--grid expects hx,hy,L; got {text!r}") from None
    try:
        return GridSpec(big_l, hx, hy)
    except GridMisaligned as exc:
        raise ConfigError(str(exc)) from None


def with_overrides(cfg: RunConfig, budget=None, grid=None, k=None) -> RunConfig:
    changes = {}
    if budget is not None:
        if budget < 1:
            raise ConfigError("--budget must be at least 1")
        changes["budget"] = budget
    if grid is not None:
        new = parse_grid(grid) if isinstance(grid, str) else grid
        changes["grid"] = replace(new, truncation_bc=cfg.grid.truncation_bc)
    if k is not None:
        if k < 1:
            raise ConfigError("--k must be at least 1")
        changes["k"] = k
    return replace(cfg, **changes)
