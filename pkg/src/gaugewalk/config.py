"""Run configuration: JSON loading, validation, and object builders.

A configuration is a single JSON file.  Field expressions are strings in the
grammar of `gaugewalk.fieldexpr`; tabulated fields come from a CSV with
header ``t,x,y,A0,A1,A2`` whose rows must cover every sampled point exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .evolution import WalkParams1D, WalkParams2D
from .fieldexpr import compile_expr
from .gauge import GaugeFunction, PotentialSpec
from .lattice import LatticeGeom, WalkerState, gaussian_packet, point_source

__all__ = ["RunConfig", "load_config", "TabulatedPotential"]

_KEY_ROUND = 9  # decimals for tabulated-field lookup keys


class TabulatedPotential:
    """Exact-match lookup of potential samples from a CSV table."""

    def __init__(self, path):
        self.path = str(path)
        self._tables = {"A0": {}, "A1": {}, "A2": {}}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"t", "x", "y", "A0", "A1", "A2"}
            if reader.fieldnames is None or set(reader.fieldnames) != required:
                raise ValidationError(
                    f"tabulated field file {self.path} must have header t,x,y,A0,A1,A2"
                )
            for row in reader:
                key = (
                    round(float(row["t"]), _KEY_ROUND),
                    round(float(row["x"]), _KEY_ROUND),
                    round(float(row["y"]), _KEY_ROUND),
                )
                for name in ("A0", "A1", "A2"):
                    self._tables[name][key] = float(row[name])

    def component(self, name):
        table = self._tables[name]

        def f(t, x, y):
            # scalar-only on purpose: sampling falls back to pointwise mode
            key = (round(float(t), _KEY_ROUND), round(float(x), _KEY_ROUND),
                   round(float(y), _KEY_ROUND))
            if key not in table:
                raise KeyError(f"tabulated {name} missing sample at (t,x,y)={key}")
            return table[key]

        return f


def _require(raw: dict, name: str):
    if name not in raw:
        raise ValidationError(f"missing required field {name!r}")
    return raw[name]


def _finite_number(raw: dict, name: str, value=None):
    v = raw[name] if value is None else value
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ValidationError(f"field {name!r} must be a finite number, got {v!r}")
    return float(v)


def _positive_int(raw: dict, name: str, minimum: int):
    v = _require(raw, name)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ValidationError(f"field {name!r} must be an integer >= {minimum}, got {v!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    dimension: int
    extent_x: int
    extent_y: int
    spacing: float
    eps_a: float | None
    eps_m: float | None
    mass: float
    charge: float
    angles: object  # "continuum-family" | {"theta": x} | {"theta1": x, "theta2": y}
    potential: dict | None
    tabulated_path: str | None
    chi: str | None
    initial_state: dict
    n_steps: int
    seed: int
    out_dir: str | None
    corrupt_gauge_half_factor: bool = False
    convergence: dict = dc_field(default_factory=dict)
    base_dir: Path = dc_field(default_factory=Path, repr=False)

    # ------------------------------------------------------------------ build
    def geom(self) -> LatticeGeom:
        return LatticeGeom(self.dimension, self.extent_x, self.extent_y, self.spacing)

    def effective_eps_m(self) -> float:
        return self.spacing if self.eps_m is None else self.eps_m

    def params(self):
        if self.angles == "continuum-family":
            family = WalkParams1D if self.dimension == 1 else WalkParams2D
            return family.continuum_family(self.mass, self.charge, self.effective_eps_m())
        if self.dimension == 1:
            return WalkParams1D(theta=self.angles["theta"], charge=self.charge,
                                mass=self.mass, eps_m=self.effective_eps_m())
        return WalkParams2D(theta1=self.angles["theta1"], theta2=self.angles["theta2"],
                            charge=self.charge, mass=self.mass, eps_m=self.effective_eps_m())

    def potential_spec(self) -> PotentialSpec:
        if self.tabulated_path is not None:
            table = TabulatedPotential(self.base_dir / self.tabulated_path)
            return PotentialSpec(
                a0=table.component("A0"),
                a1=table.component("A1"),
                a2=table.component("A2") if self.dimension == 2 else None,
                charge=self.charge,
                eps_a=self.eps_a,
            )
        exprs = self.potential or {}
        compiled = {}
        for name in ("A0", "A1", "A2"):
            source = exprs.get(name, "0")
            try:
                compiled[name] = compile_expr(source)
            except ParseError as exc:
                raise ValidationError(f"field 'potential.{name}': {exc}") from exc
        return PotentialSpec(
            a0=compiled["A0"],
            a1=compiled["A1"],
            a2=compiled["A2"] if self.dimension == 2 else None,
            charge=self.charge,
            eps_a=self.eps_a,
        )

    def chi_function(self) -> GaugeFunction | None:
        if self.chi is None:
            return None
        try:
            return GaugeFunction(fn=compile_expr(self.chi))
        except ParseError as exc:
            raise ValidationError(f"field 'chi': {exc}") from exc

    def initial_walker(self) -> WalkerState:
        geom = self.geom()
        spec = self.initial_state
        kind = spec.get("type", "gaussian")
        pol = spec.get("polarization", [[1.0, 0.0], [0.0, 0.0]])
        try:
            polarization = np.array([complex(re, im) for re, im in pol])
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"field 'initial_state.polarization': {exc}") from exc
        if kind == "point":
            site = spec.get("site", [0] * self.dimension)
            return point_source(geom, site, polarization)
        if kind == "gaussian":
            length_x = self.extent_x * self.spacing
            default_center = [length_x / 2] + (
                [self.extent_y * self.spacing / 2] if self.dimension == 2 else []
            )
            center = spec.get("center", default_center)
            width = spec.get("width", length_x / 16)
            momentum = spec.get("momentum", [0.0] * self.dimension)
            return gaussian_packet(geom, center, width, momentum, polarization)
        raise ValidationError(f"field 'initial_state.type' unknown: {kind!r}")


def _validate_angles(raw_angles, dimension: int):
    if raw_angles == "continuum-family":
        return raw_angles
    if not isinstance(raw_angles, dict):
        raise ValidationError("field 'angles' must be 'continuum-family' or an object")
    if dimension == 1:
        if set(raw_angles) != {"theta"}:
            raise ValidationError("field 'angles' must provide exactly 'theta' in 1D")
        return {"theta": _finite_number(raw_angles, "angles.theta", raw_angles["theta"])}
    if set(raw_angles) != {"theta1", "theta2"}:
        raise ValidationError("field 'angles' must provide 'theta1' and 'theta2' in 2D")
    return {
        "theta1": _finite_number(raw_angles, "angles.theta1", raw_angles["theta1"]),
        "theta2": _finite_number(raw_angles, "angles.theta2", raw_angles["theta2"]),
    }


def config_from_dict(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValidationError("configuration must be a JSON object")
    dimension = _positive_int(raw, "dimension", 1)
    if dimension not in (1, 2):
        raise ValidationError(f"field 'dimension' must be 1 or 2, got {dimension}")
    extent_x = _positive_int(raw, "extent_x", 2)
    if dimension == 2:
        extent_y = _positive_int(raw, "extent_y", 2)
    else:
        extent_y = raw.get("extent_y", 1)
        if extent_y != 1:
            raise ValidationError("field 'extent_y' must be 1 (or absent) in 1D")
    _require(raw, "spacing")
    spacing = _finite_number(raw, "spacing")
    if spacing <= 0:
        raise ValidationError(f"field 'spacing' must be positive, got {spacing}")
    _require(raw, "mass")
    mass = _finite_number(raw, "mass")
    _require(raw, "charge")
    charge = _finite_number(raw, "charge")
    eps_a = _finite_number(raw, "eps_a") if "eps_a" in raw else None
    eps_m = _finite_number(raw, "eps_m") if "eps_m" in raw else None
    for name, value in (("eps_a", eps_a), ("eps_m", eps_m)):
        if value is not None and value <= 0:
            raise ValidationError(f"field {name!r} must be positive, got {value}")
    angles = _validate_angles(raw.get("angles", "continuum-family"), dimension)
    n_steps = raw.get("n_steps", 0)
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 0:
        raise ValidationError(f"field 'n_steps' must be an integer >= 0, got {n_steps!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError(f"field 'seed' must be an integer >= 0, got {seed!r}")

    potential = raw.get("potential")
    tabulated = None
    if potential is not None:
        if not isinstance(potential, dict):
            raise ValidationError("field 'potential' must be an object")
        if "tabulated" in potential:
            tabulated = potential["tabulated"]
            if not isinstance(tabulated, str):
                raise ValidationError("field 'potential.tabulated' must be a path string")
            potential = None
        else:
            unknown = set(potential) - {"A0", "A1", "A2"}
            if unknown:
                raise ValidationError(f"field 'potential' has unknown keys {sorted(unknown)}")
            for key, value in potential.items():
                if not isinstance(value, str):
                    raise ValidationError(f"field 'potential.{key}' must be an expression string")

    chi = raw.get("chi")
    if chi is not None and not isinstance(chi, str):
        raise ValidationError("field 'chi' must be an expression string")

    initial_state = raw.get("initial_state", {"type": "gaussian"})
    if not isinstance(initial_state, dict):
        raise ValidationError("field 'initial_state' must be an object")

    convergence = raw.get("convergence", {})
    if not isinstance(convergence, dict):
        raise ValidationError("field 'convergence' must be an object")

    corrupt = raw.get("corrupt_gauge_half_factor", False)
    if not isinstance(corrupt, bool):
        raise ValidationError("field 'corrupt_gauge_half_factor' must be a boolean")

    out_dir = raw.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ValidationError("field 'out_dir' must be a path string")

    config = RunConfig(
        dimension=dimension,
        extent_x=extent_x,
        extent_y=extent_y,
        spacing=spacing,
        eps_a=eps_a,
        eps_m=eps_m,
        mass=mass,
        charge=charge,
        angles=angles,
        potential=potential,
        tabulated_path=tabulated,
        chi=chi,
        initial_state=initial_state,
        n_steps=n_steps,
        seed=seed,
        out_dir=out_dir,
        corrupt_gauge_half_factor=corrupt,
        convergence=convergence,
        base_dir=base_dir,
    )
    # fail fast on malformed expressions and initial states
    config.potential_spec() if tabulated is None else None
    config.chi_function()
    config.params()
    return config


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw, base_dir=path.parent)
