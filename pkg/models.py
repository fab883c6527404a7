"""
Scenario and report models, and the JSON scenario document parser.

A config document is one scenario object, a list of them, or
{"scenarios": [...]}. Each scenario:

    {
      "id": "square-euclid",
      "domain": {"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
             | {"type": "wulff", "anisotropy": {...}, "R": 1.0, "m": 512},
      "anisotropy": {"kind": "ellipse", "params": {"a": 1, "b": 2}},
      "weight": {"kind": "constant", "params": {}},        (optional)
      "p": 2,
      "mesh": {"h": 0.02},                                  (optional)
      "solver": {"max_iter": 5000, "tol": 1e-12, "seeds": 5}, (optional)
      "seed": 0                                             (optional)
    }

Unknown keys are ignored so documents can carry notes.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .anisotropy import Anisotropy, DirectionGrid
from .config import Settings, resolve
from .errors import ConfigParseError, DomainError, InvalidInputError, PoincareError
from .geometry import ConvexPolygon, Weight, euclidean_diameter, wulff_shape
from .helpers import validate_exponent

REPORT_FIELDS = (
    "scenario_id",
    "mu_hat",
    "pi_p",
    "d_h",
    "d_euclid",
    "h_polar_max",
    "sharp_bound",
    "naive_bound",
    "ratio",
    "pass",
    "h",
    "iterations",
    "seed",
    "slack",
    "best_effort",
    "solver_slack",
    "polar_m",
)


def _get(d: dict[str, Any], key: str, default):
    # Safe nested getter for dicts
    v = d.get(key)
    return v if isinstance(v, type(default)) else default


@dataclass(frozen=True, eq=False)
class Scenario:
    scenario_id: str
    polygon: ConvexPolygon
    anisotropy: Anisotropy
    weight: Weight
    p: float
    h: float
    max_iter: int = 5000
    solver_tol: float = 1e-12
    seeds: int = 5
    seed: int = 0
    domain: dict[str, Any] = field(default_factory=lambda: {"type": "polygon"})

    def __post_init__(self) -> None:
        ok, err = validate_exponent(self.p)
        if not ok:
            raise DomainError(err)
        diameter = euclidean_diameter(self.polygon)
        if not (self.h > 0.0 and self.h < diameter / 4.0):
            raise InvalidInputError(
                f"mesh h must lie in (0, diameter/4) = (0, {diameter / 4.0:.6g}), got: {self.h}"
            )
        if self.seeds < 1 or self.max_iter < 1:
            raise InvalidInputError("solver needs seeds >= 1 and max_iter >= 1")


@dataclass
class VerificationReport:
    scenario_id: str
    mu_hat: float
    pi_p: float
    d_h: float
    d_euclid: float
    h_polar_max: float
    sharp_bound: float
    naive_bound: float
    ratio: float
    passed: bool
    h: float
    iterations: int
    seed: int
    slack: float
    best_effort: bool = False
    solver_slack: float = 0.02
    polar_m: int = 4096

    def to_dict(self) -> dict[str, Any]:
        d = {name: getattr(self, "passed" if name == "pass" else name) for name in REPORT_FIELDS}
        return d

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "VerificationReport":
        missing = [k for k in REPORT_FIELDS if k not in d]
        if missing:
            raise ConfigParseError(missing[0], "missing report field")
        return VerificationReport(
            scenario_id=str(d["scenario_id"]),
            mu_hat=float(d["mu_hat"]),
            pi_p=float(d["pi_p"]),
            d_h=float(d["d_h"]),
            d_euclid=float(d["d_euclid"]),
            h_polar_max=float(d["h_polar_max"]),
            sharp_bound=float(d["sharp_bound"]),
            naive_bound=float(d["naive_bound"]),
            ratio=float(d["ratio"]),
            passed=bool(d["pass"]),
            h=float(d["h"]),
            iterations=int(d["iterations"]),
            seed=int(d["seed"]),
            slack=float(d["slack"]),
            best_effort=bool(d["best_effort"]),
            solver_slack=float(d["solver_slack"]),
            polar_m=int(d["polar_m"]),
        )

    def is_finite(self) -> bool:
        return all(
            math.isfinite(getattr(self, k))
            for k in ("mu_hat", "pi_p", "d_h", "d_euclid", "h_polar_max", "sharp_bound", "naive_bound", "ratio")
        )


# --- parsing --------------------------------------------------------------------


def _path(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _number(d: dict[str, Any], key: str, prefix: str, default: Any = None) -> float:
    if key not in d:
        if default is None:
            raise ConfigParseError(_path(prefix, key), "required number is missing")
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigParseError(_path(prefix, key), f"expected a finite number, got: {val!r}")
    return float(val)


def _object(d: dict[str, Any], key: str, prefix: str, required: bool = True) -> dict[str, Any]:
    val = d.get(key)
    if val is None and not required:
        return {}
    if not isinstance(val, dict):
        raise ConfigParseError(_path(prefix, key), "expected an object")
    return val


def _anisotropy(d: dict[str, Any], path: str) -> Anisotropy:
    try:
        return Anisotropy.from_dict(d)
    except PoincareError as e:
        key = "kind" if "kind" in str(e) else "params"
        raise ConfigParseError(_path(path, key), str(e)) from e


def _domain(d: dict[str, Any], path: str, s: Settings) -> tuple[ConvexPolygon, dict[str, Any]]:
    kind = d.get("type")
    if kind == "polygon":
        vertices = d.get("vertices")
        if not isinstance(vertices, list):
            raise ConfigParseError(_path(path, "vertices"), "expected a list of [x, y] pairs")
        try:
            return ConvexPolygon.from_points(vertices), {"type": "polygon"}
        except (PoincareError, ValueError, TypeError) as e:
            raise ConfigParseError(_path(path, "vertices"), str(e)) from e
    if kind == "wulff":
        aniso = _anisotropy(_object(d, "anisotropy", path), _path(path, "anisotropy"))
        R = _number(d, "R", path, 1.0)
        m = int(_number(d, "m", path, float(s.wulff_vertices)))
        try:
            poly = wulff_shape(aniso, R, m, DirectionGrid.from_settings(s))
        except PoincareError as e:
            raise ConfigParseError(path, str(e)) from e
        return poly, {"type": "wulff", "anisotropy": aniso.to_dict(), "R": R, "m": m}
    raise ConfigParseError(_path(path, "type"), f"unknown domain type {kind!r}, expected polygon or wulff")


def parse_scenario(d: Any, path: str = "", index: int = 0, settings: Settings | None = None) -> Scenario:
    s = resolve(settings)
    if not isinstance(d, dict):
        raise ConfigParseError(path or "<root>", "scenario must be an object")

    polygon, domain = _domain(_object(d, "domain", path), _path(path, "domain"), s)
    aniso = _anisotropy(_object(d, "anisotropy", path), _path(path, "anisotropy"))
    try:
        weight = Weight.from_dict(_object(d, "weight", path, required=False) or {"kind": "constant"})
    except PoincareError as e:
        raise ConfigParseError(_path(path, "weight"), str(e)) from e

    p = _number(d, "p", path)
    ok, err = validate_exponent(p)
    if not ok:
        raise ConfigParseError(_path(path, "p"), err) from DomainError(err)

    mesh = _object(d, "mesh", path, required=False)
    solver = _object(d, "solver", path, required=False)
    mesh_path, solver_path = _path(path, "mesh"), _path(path, "solver")
    h = _number(mesh, "h", mesh_path, s.mesh_factor * euclidean_diameter(polygon))
    max_iter = int(_number(solver, "max_iter", solver_path, float(s.max_iter)))
    tol = _number(solver, "tol", solver_path, s.solver_tol)
    seeds = int(_number(solver, "seeds", solver_path, float(s.seeds)))
    seed = int(_number(d, "seed", path, float(s.seed)))
    scenario_id = _get(d, "id", "") or f"scenario-{index}"

    try:
        return Scenario(
            scenario_id=scenario_id,
            polygon=polygon,
            anisotropy=aniso,
            weight=weight,
            p=p,
            h=h,
            max_iter=max_iter,
            solver_tol=tol,
            seeds=seeds,
            seed=seed,
            domain=domain,
        )
    except PoincareError as e:
        raise ConfigParseError(mesh_path if "mesh h" in str(e) else solver_path, str(e)) from e


def parse_config(text: str, settings: Settings | None = None) -> list[Scenario]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError("<root>", f"invalid JSON: {e}") from e

    if isinstance(doc, dict) and "scenarios" in doc:
        items, prefix = doc["scenarios"], "scenarios"
        if not isinstance(items, list):
            raise ConfigParseError("scenarios", "expected a list")
    elif isinstance(doc, list):
        items, prefix = doc, ""
    else:
        return [parse_scenario(doc, "", 0, settings)]

    return [parse_scenario(item, f"{prefix}[{i}]", i, settings) for i, item in enumerate(items)]
