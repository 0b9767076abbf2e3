"""JSON experiment descriptions (schema version 1).

Example::

    {
      "schema": 1,
      "material": "GaAs",
      "barriers": [{"x_nm": 0, "J_eVA": 2}, {"x_nm": 100, "J_eVA": 2}],
      "scan": {"emin_meV": 0.1, "emax_meV": 15, "points": 3001}
    }

``material`` is a preset name, a bare effective-mass ratio, or an object
``{"effective_mass_ratio": ..., "label": ...}``. Instead of ``barriers`` a
config may give ``cells`` (each with its own local ``barriers``) and
``spacers_nm``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .core import BarrierArray
from .errors import ConfigError, DomainError
from .filters import Cell, Composition, flatten
from .physunits import CONSTANTS, Material, PhysicalArraySpec, get_material

SCHEMA_VERSION = 1

_BARRIER = {
    "type": "object",
    "properties": {"x_nm": {"type": "number"}, "J_eVA": {"type": "number"}},
    "required": ["x_nm", "J_eVA"],
    "additionalProperties": False,
}
_BARRIERS = {"type": "array", "items": _BARRIER, "minItems": 1}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "deltarray experiment",
    "type": "object",
    "x-constants": CONSTANTS,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "material": {
            "oneOf": [
                {"type": "string"},
                {"type": "number"},
                {
                    "type": "object",
                    "properties": {
                        "effective_mass_ratio": {"type": "number"},
                        "label": {"type": "string"},
                    },
                    "required": ["effective_mass_ratio"],
                    "additionalProperties": False,
                },
            ]
        },
        "barriers": _BARRIERS,
        "cells": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"label": {"type": "string"}, "barriers": _BARRIERS},
                "required": ["barriers"],
                "additionalProperties": False,
            },
        },
        "spacers_nm": {"type": "array", "items": {"type": "number"}},
        "scan": {
            "type": "object",
            "properties": {
                "emin_meV": {"type": "number"},
                "emax_meV": {"type": "number"},
                "points": {"type": "integer"},
            },
            "required": ["emin_meV", "emax_meV", "points"],
            "additionalProperties": False,
        },
        "resonances": {
            "type": "object",
            "properties": {
                "grid": {"type": "integer"},
                "tol": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "reduce": {
            "type": "object",
            "properties": {"tol": {"type": "number"}},
            "additionalProperties": False,
        },
        "design": {
            "type": "object",
            "properties": {
                "J_eVA": {"type": "number"},
                "target_meV": {"type": "number"},
                "branch": {"type": "integer"},
                "d_nm": {"type": "number"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema", "material"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ScanSpec:
    emin: float
    emax: float
    points: int


@dataclass(frozen=True)
class ExperimentConfig:
    material: Material
    barriers: tuple[tuple[float, float], ...]
    scan: ScanSpec | None = None
    cells: tuple[tuple[str, tuple[tuple[float, float], ...]], ...] | None = None
    spacers: tuple[float, ...] = ()
    grid: int = 4000
    tol: float = 1e-10
    reduce_tol: float = 1e-9
    design: dict | None = None

    def physical(self) -> PhysicalArraySpec:
        return PhysicalArraySpec(self.material, self.barriers)

    def array(self) -> BarrierArray:
        return self.physical().to_array()


def _material(raw) -> Material:
    if isinstance(raw, str):
        return get_material(raw)
    if isinstance(raw, dict):
        return Material(float(raw["effective_mass_ratio"]), raw.get("label", ""))
    return Material(float(raw), "")


def _pairs(items) -> tuple[tuple[float, float], ...]:
    return tuple((float(b["x_nm"]), float(b["J_eVA"])) for b in items)


def parse_config(data: Any) -> ExperimentConfig:
    """Validate a decoded JSON document and build an :class:`ExperimentConfig`.

    Structural problems raise :class:`ConfigError`; physically meaningless
    values (nonpositive mass ratio or energies) raise :class:`DomainError`.
    """
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None

    has_b, has_c = "barriers" in data, "cells" in data
    if has_b and has_c:
        raise ConfigError("config needs exactly one of 'barriers' or 'cells'")
    if not (has_b or has_c or "design" in data):
        # a design-only config is fine; everything else needs geometry
        raise ConfigError("config needs exactly one of 'barriers' or 'cells'")

    material = _material(data["material"])

    cells = None
    spacers: tuple[float, ...] = ()
    if has_c:
        cells = tuple((c.get("label", ""), _pairs(c["barriers"])) for c in data["cells"])
        spacers = tuple(float(s) for s in data.get("spacers_nm", ()))
        if len(spacers) != len(cells) - 1:
            raise ConfigError("'spacers_nm' needs one entry between each pair of cells")
        barriers = _flatten_cells(cells, spacers)
    else:
        if "spacers_nm" in data:
            raise ConfigError("'spacers_nm' is only valid together with 'cells'")
        barriers = _pairs(data.get("barriers", []))
    xs = [x for x, _ in barriers]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ConfigError("barrier positions must be strictly increasing")

    scan = None
    if "scan" in data:
        s = data["scan"]
        scan = ScanSpec(float(s["emin_meV"]), float(s["emax_meV"]), int(s["points"]))
        if scan.emin <= 0:
            raise DomainError("scan energies must be positive")
        if not (scan.emax > scan.emin and scan.points >= 2):
            raise ConfigError("bad scan range")

    res = data.get("resonances", {})
    return ExperimentConfig(
        material=material,
        barriers=barriers,
        scan=scan,
        cells=cells,
        spacers=spacers,
        grid=int(res.get("grid", 4000)),
        tol=float(res.get("tol", 1e-10)),
        reduce_tol=float(data.get("reduce", {}).get("tol", 1e-9)),
        design=data.get("design"),
    )


def _flatten_cells(cells, spacers):
    # strengths ride along unconverted; flattening only moves positions
    built = []
    for label, pairs in cells:
        xs = [x for x, _ in pairs]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigError(f"cell {label!r}: positions must be strictly increasing")
        built.append(Cell.local(BarrierArray(pairs), label))
    if any(not s > 0 for s in spacers):
        raise ConfigError("spacers must be positive")
    return tuple((b.x, b.g) for b in flatten(Composition(tuple(built), spacers)))


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a config file; unreadable or undecodable files raise :class:`ConfigError`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config(data)
