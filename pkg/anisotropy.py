"""
Gauges of the plane and their polar functions.

An ``Anisotropy`` is a positively 1-homogeneous function H, positive away from
the origin. Suprema over directions are taken on the unit circle: a
``DirectionGrid`` supplies the coarse argmax, then a golden-section search in
the two neighbouring cells refines it. Gauges with a jump (``half_space_gauge``)
are handled branch by branch on closed half-circles, and ``custom_sampled``
gauges (piecewise constant in angle) get an exact cell-by-cell polar.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np
from scipy.special import expit

from .config import Settings, resolve
from .errors import ConfigurationError, InvalidInputError, InvariantViolationError
from .helpers import direction, rotation_matrix, validate_finite_vector, validate_kind
from .store.memory_store import MemoryStore

log = logging.getLogger("poincare-bound")

KINDS = ("euclidean", "ellipse", "lq_norm", "half_space_gauge", "custom_sampled")
MIN_GRID = 64
GOLDEN_STEPS = 20
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * math.pi
_CHUNK = 256

# Polar tables and maxima keyed by anisotropy fingerprint and grid size
_tables = MemoryStore(max_entries=128)


@dataclass(frozen=True)
class DirectionGrid:
    m: int = 4096
    refinement_levels: int = 3

    def __post_init__(self) -> None:
        if int(self.m) < MIN_GRID:
            raise ConfigurationError(
                f"direction grid needs at least {MIN_GRID} directions, got: {self.m}"
            )
        if int(self.refinement_levels) < 0:
            raise ConfigurationError("refinement_levels must be >= 0")

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.m) / self.m

    @property
    def directions(self) -> np.ndarray:
        return direction(self.angles)

    @staticmethod
    def from_settings(settings: Settings | None = None) -> "DirectionGrid":
        s = resolve(settings)
        return DirectionGrid(m=s.polar_grid_size, refinement_levels=s.polar_refinements)


def _positive(params: dict[str, Any], key: str, kind: str) -> float:
    try:
        val = float(params[key])
    except (KeyError, TypeError, ValueError):
        raise ConfigurationError(f"{kind} requires numeric parameter '{key}'")
    if not math.isfinite(val) or val <= 0.0:
        raise ConfigurationError(f"{kind} parameter '{key}' must be positive, got: {val}")
    return val


@dataclass(frozen=True, eq=False)
class Anisotropy:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    rotation: float = 0.0

    def __post_init__(self) -> None:
        ok, err = validate_kind(self.kind, KINDS, "anisotropy kind")
        if not ok:
            raise ConfigurationError(err)

        raw = dict(self.params or {})
        if self.kind == "euclidean":
            norm: dict[str, Any] = {}
        elif self.kind == "ellipse":
            norm = {"a": _positive(raw, "a", "ellipse"), "b": _positive(raw, "b", "ellipse")}
        elif self.kind == "lq_norm":
            norm = {"q": _positive(raw, "q", "lq_norm")}
        elif self.kind == "half_space_gauge":
            c = _positive(raw, "c", "half_space_gauge")
            if c <= 1.0:
                raise ConfigurationError(f"half_space_gauge requires c > 1, got: {c}")
            norm = {"c": c}
        else:
            values = np.asarray(raw.get("values", ()), dtype=float)
            if values.ndim != 1 or values.size < MIN_GRID:
                raise ConfigurationError(
                    f"custom_sampled needs at least {MIN_GRID} sampled values"
                )
            if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
                raise ConfigurationError("custom_sampled values must be finite and positive")
            norm = {"values": tuple(float(v) for v in values)}
            if "is_convex" in raw:
                norm["is_convex"] = bool(raw["is_convex"])
        object.__setattr__(self, "params", norm)
        object.__setattr__(self, "rotation", float(self.rotation))

    @property
    def is_convex(self) -> bool:
        if self.kind == "lq_norm":
            return self.params["q"] >= 1.0
        if self.kind == "half_space_gauge":
            return False
        if self.kind == "custom_sampled":
            return bool(self.params.get("is_convex", False))
        return True

    @property
    def is_even(self) -> bool:
        if self.kind == "half_space_gauge":
            return False
        if self.kind == "custom_sampled":
            v = np.asarray(self.params["values"])
            return v.size % 2 == 0 and bool(np.allclose(v, np.roll(v, v.size // 2)))
        return True

    def fingerprint(self) -> str:
        payload = json.dumps(
            {"kind": self.kind, "params": self.params, "rotation": self.rotation},
            sort_keys=True,
        )
        return hashlib.sha1(payload.encode()).hexdigest()

    def to_dict(self) -> dict[str, Any]:
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        d: dict[str, Any] = {"kind": self.kind, "params": params}
        if self.rotation:
            d["rotation"] = self.rotation
        return d

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Anisotropy":
        if not isinstance(d, dict):
            raise ConfigurationError("anisotropy must be an object with 'kind' and 'params'")
        params = d.get("params", {})
        if not isinstance(params, dict):
            raise ConfigurationError("anisotropy params must be an object")
        return Anisotropy(
            kind=d.get("kind", ""), params=params, rotation=float(d.get("rotation", 0.0))
        )

    def __repr__(self) -> str:
        shown = {k: v for k, v in self.params.items() if k != "values"}
        return f"Anisotropy({self.kind}, {shown}, rotation={self.rotation:g})"


def _as_points(xi: Any, name: str) -> np.ndarray:
    ok, err = validate_finite_vector(xi, name)
    if not ok:
        raise InvalidInputError(err)
    return np.asarray(xi, dtype=float)


def _rotate_points(aniso: Anisotropy, xi: np.ndarray) -> np.ndarray:
    if aniso.rotation == 0.0:
        return xi
    return xi @ rotation_matrix(aniso.rotation).T


def _unrotated_value(aniso: Anisotropy, z: np.ndarray) -> np.ndarray:
    x, y = z[..., 0], z[..., 1]
    r = np.hypot(x, y)
    kind = aniso.kind
    if kind == "euclidean":
        return r
    if kind == "ellipse":
        return np.hypot(aniso.params["a"] * x, aniso.params["b"] * y)
    if kind == "lq_norm":
        q = aniso.params["q"]
        big = np.maximum(np.abs(x), np.abs(y))
        safe = np.where(big > 0.0, big, 1.0)
        inner = (np.abs(x) / safe) ** q + (np.abs(y) / safe) ** q
        return np.where(big > 0.0, big * inner ** (1.0 / q), 0.0)
    if kind == "half_space_gauge":
        return np.where(x >= 0.0, r, aniso.params["c"] * r)
    values = np.asarray(aniso.params["values"])
    m = values.size
    theta = np.mod(np.arctan2(y, x), TWO_PI)
    idx = np.rint(theta / (TWO_PI / m)).astype(int) % m
    return r * values[idx]


def evaluate(aniso: Anisotropy, xi: Any) -> float | np.ndarray:
    """H(xi) for a single vector (returns float) or an array of vectors (..., 2)."""
    pts = _as_points(xi, "xi")
    val = _unrotated_value(aniso, _rotate_points(aniso, pts))
    return float(val) if np.ndim(val) == 0 else val


def rotate(aniso: Anisotropy, angle: float) -> Anisotropy:
    """The anisotropy xi -> H(A xi), A the rotation by angle."""
    return replace(aniso, rotation=aniso.rotation + float(angle))


# --- suprema on the unit circle ------------------------------------------------


def _arc_sup(
    objective: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n: int,
    periodic: bool,
    levels: int,
    grid_values: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Row-wise sup over theta in [lo, hi] of objective(theta).

    objective receives theta of shape (1, n) (coarse grid) or (k, 1) (one angle
    per row) and returns (k, n) or (k, 1). Returns (sup values, argmax angles).
    """
    if periodic:
        theta = lo + (hi - lo) * np.arange(n) / n
        step = (hi - lo) / n
    else:
        theta = np.linspace(lo, hi, n)
        step = theta[1] - theta[0]

    vals = grid_values if grid_values is not None else objective(theta[None, :])
    j = np.argmax(vals, axis=1)
    rows = np.arange(vals.shape[0])
    best = vals[rows, j]
    arg = theta[j]

    iters = GOLDEN_STEPS * int(levels)
    if iters <= 0:
        return best, arg

    a = arg - step
    b = arg + step
    if not periodic:
        a = np.maximum(a, lo)
        b = np.minimum(b, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = objective(c[:, None])[:, 0]
    fd = objective(d[:, None])[:, 0]
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        fc = objective(c[:, None])[:, 0]
        fd = objective(d[:, None])[:, 0]

    refined = np.maximum(fc, fd)
    refined_arg = np.where(fc >= fd, c, d)
    better = refined > best
    return np.where(better, refined, best), np.where(better, refined_arg, arg)


def _branches(aniso: Anisotropy) -> list[tuple[float, float, bool, Callable[[np.ndarray], np.ndarray]]]:
    """
    Arcs on which H restricted to unit directions is continuous, each with its
    branch function of the angle. Closed half-circles for the half-space gauge.
    """
    if aniso.kind == "half_space_gauge":
        c = aniso.params["c"]
        rot = aniso.rotation
        right = (-0.5 * math.pi - rot, 0.5 * math.pi - rot)
        left = (0.5 * math.pi - rot, 1.5 * math.pi - rot)
        return [
            (right[0], right[1], False, lambda th: np.ones_like(th)),
            (left[0], left[1], False, lambda th: np.full_like(th, c)),
        ]

    def full(th: np.ndarray) -> np.ndarray:
        return _unrotated_value(aniso, _rotate_points(aniso, direction(th)))

    return [(0.0, TWO_PI, True, full)]


def _arc_points(grid: DirectionGrid, lo: float, hi: float, periodic: bool) -> int:
    if periodic:
        return grid.m
    return max(MIN_GRID, int(math.ceil(grid.m * (hi - lo) / TWO_PI)) + 1)


def _custom_polar(aniso: Anisotropy, eta: np.ndarray) -> np.ndarray:
    values = np.asarray(aniso.params["values"])
    m = values.size
    width = TWO_PI / m
    centers = TWO_PI * np.arange(m) / m - aniso.rotation
    ang = np.arctan2(eta[:, 1], eta[:, 0])
    norm = np.hypot(eta[:, 0], eta[:, 1])
    out = np.empty(len(eta))
    for start in range(0, len(eta), _CHUNK):
        sl = slice(start, start + _CHUNK)
        gap = np.abs(np.mod(ang[sl, None] - centers[None, :] + math.pi, TWO_PI) - math.pi)
        dist = np.clip(gap - 0.5 * width, 0.0, math.pi)
        out[sl] = np.max(norm[sl, None] * np.cos(dist) / values[None, :], axis=1)
    return out


def _grid_polar(aniso: Anisotropy, eta: np.ndarray, grid: DirectionGrid) -> np.ndarray:
    if aniso.kind == "custom_sampled":
        return _custom_polar(aniso, eta)

    out = np.full(len(eta), -np.inf)
    for lo, hi, periodic, branch in _branches(aniso):
        n = _arc_points(grid, lo, hi, periodic)
        for start in range(0, len(eta), _CHUNK):
            rows = eta[start : start + _CHUNK]

            def objective(th: np.ndarray, rows: np.ndarray = rows) -> np.ndarray:
                u = direction(th)
                return (u[..., 0] * rows[:, 0:1] + u[..., 1] * rows[:, 1:2]) / branch(th)

            sup, _ = _arc_sup(objective, lo, hi, n, periodic, grid.refinement_levels)
            out[start : start + _CHUNK] = np.maximum(out[start : start + _CHUNK], sup)
    return np.maximum(out, 0.0)


def polar(aniso: Anisotropy, eta: Any, grid: DirectionGrid) -> float | np.ndarray:
    """
    H°(eta) = sup over xi != 0 of <xi, eta> / H(xi), by grid sup with local
    golden-section refinement; clamped below at 0. Accepts (2,) or (..., 2).
    """
    pts = _as_points(eta, "eta")
    flat = pts.reshape(-1, 2)
    vals = _grid_polar(aniso, flat, grid).reshape(pts.shape[:-1])
    return float(vals) if vals.ndim == 0 else vals


def polar_closed(aniso: Anisotropy, eta: Any) -> float | np.ndarray | None:
    """Closed-form polar where one exists; None otherwise."""
    pts = _as_points(eta, "eta")
    z = _rotate_points(aniso, pts)
    x, y = z[..., 0], z[..., 1]
    r = np.hypot(x, y)
    kind = aniso.kind
    if kind == "euclidean":
        val = r
    elif kind == "ellipse":
        val = np.hypot(x / aniso.params["a"], y / aniso.params["b"])
    elif kind == "lq_norm" and aniso.params["q"] >= 1.0:
        q = aniso.params["q"]
        if q == 1.0:
            val = np.maximum(np.abs(x), np.abs(y))
        else:
            val = _unrotated_value(Anisotropy("lq_norm", {"q": q / (q - 1.0)}), z)
    elif kind == "half_space_gauge":
        c = aniso.params["c"]
        val = np.where(x >= 0.0, r, np.maximum(np.abs(y), r / c))
    else:
        return None
    return float(val) if np.ndim(val) == 0 else val


def _polar_table(aniso: Anisotropy, grid: DirectionGrid) -> np.ndarray:
    key = f"polar-table:{aniso.fingerprint()}:{grid.m}:{grid.refinement_levels}"
    table = _tables.get(key)
    if table is None:
        table = _grid_polar(aniso, grid.directions, grid)
        _tables.set(key, table)
    return table


def polar_of(
    gauge: Callable[[np.ndarray], np.ndarray],
    eta: Any,
    grid: DirectionGrid,
    table: np.ndarray | None = None,
) -> float | np.ndarray:
    """
    Polar of an arbitrary continuous gauge given by its values gauge(theta) on
    unit directions; ``table`` may hold gauge on the grid angles.
    """
    pts = _as_points(eta, "eta")
    flat = pts.reshape(-1, 2)
    angles = grid.angles
    if table is None:
        table = np.asarray(gauge(angles[None, :])).reshape(-1)
    dirs = grid.directions
    out = np.empty(len(flat))
    for start in range(0, len(flat), _CHUNK):
        rows = flat[start : start + _CHUNK]

        def objective(th: np.ndarray, rows: np.ndarray = rows) -> np.ndarray:
            u = direction(th)
            return (u[..., 0] * rows[:, 0:1] + u[..., 1] * rows[:, 1:2]) / gauge(th)

        coarse = (rows @ dirs.T) / table[None, :]
        sup, _ = _arc_sup(
            objective, 0.0, TWO_PI, grid.m, True, grid.refinement_levels, grid_values=coarse
        )
        out[start : start + _CHUNK] = sup
    vals = np.maximum(out, 0.0).reshape(pts.shape[:-1])
    return float(vals) if vals.ndim == 0 else vals


def bipolar(aniso: Anisotropy, xi: Any, grid: DirectionGrid) -> float | np.ndarray:
    """
    (H°)°(xi): the convex envelope of H at xi. The inner polar is tabulated on
    the grid once per anisotropy and cached.
    """
    table = _polar_table(aniso, grid)

    def inner(th: np.ndarray) -> np.ndarray:
        return _grid_polar(aniso, direction(th).reshape(-1, 2), grid).reshape(th.shape)

    return polar_of(inner, xi, grid, table=table)


def coercivity_constant(aniso: Anisotropy, grid: DirectionGrid) -> float:
    """Largest a with a|xi| <= H(xi): min of H on the unit circle."""
    if aniso.kind == "custom_sampled":
        low = float(min(aniso.params["values"]))
    else:
        low = math.inf
        for lo, hi, periodic, branch in _branches(aniso):
            n = _arc_points(grid, lo, hi, periodic)
            sup, _ = _arc_sup(lambda th: -branch(th), lo, hi, n, periodic, grid.refinement_levels)
            low = min(low, float(-sup[0]))
    if not low > 0.0:
        raise InvariantViolationError(
            f"coercivity constant of {aniso!r} is {low}; gauge is not positive off the origin"
        )
    return low


def max_polar(aniso: Anisotropy, grid: DirectionGrid) -> float:
    """max over |nu| = 1 of H°(nu)."""
    key = f"polar-max:{aniso.fingerprint()}:{grid.m}:{grid.refinement_levels}"
    cached = _tables.get(key)
    if cached is not None:
        return cached

    table = _polar_table(aniso, grid)

    def objective(th: np.ndarray) -> np.ndarray:
        return _grid_polar(aniso, direction(th).reshape(-1, 2), grid).reshape(th.shape)

    sup, _ = _arc_sup(
        objective, 0.0, TWO_PI, grid.m, True, grid.refinement_levels, grid_values=table[None, :]
    )
    value = float(sup[0])
    _tables.set(key, value)
    return value


def width_sup(
    aniso: Anisotropy, vertices: np.ndarray, grid: DirectionGrid
) -> tuple[float, float]:
    """
    sup over unit xi of (max <v, xi> - min <v, xi>) / H(xi) for a vertex set,
    with the maximizing angle. Equals the max of H°(v_j - v_i) over ordered pairs.
    """
    best, best_arg = -math.inf, 0.0
    for lo, hi, periodic, branch in _branches(aniso):
        n = _arc_points(grid, lo, hi, periodic)

        def objective(th: np.ndarray, branch: Callable = branch) -> np.ndarray:
            u = direction(th)
            proj = u @ vertices.T
            return (proj.max(axis=-1) - proj.min(axis=-1)) / branch(th)

        sup, arg = _arc_sup(objective, lo, hi, n, periodic, grid.refinement_levels)
        if sup[0] > best:
            best, best_arg = float(sup[0]), float(arg[0])
    return best, best_arg


def smoothed_gradient(
    aniso: Anisotropy, xi: np.ndarray, smoothing: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    H and its gradient at each row of xi (N, 2). The half-space gauge switches
    branches through a logistic of width ``smoothing``; gradients at 0 are 0.
    """
    z = _rotate_points(aniso, np.asarray(xi, dtype=float))
    x, y = z[:, 0], z[:, 1]
    r = np.hypot(x, y)
    pos = r > 0.0
    safe_r = np.where(pos, r, 1.0)
    unit = z / safe_r[:, None]
    kind = aniso.kind

    if kind == "euclidean":
        h, g = r, unit
    elif kind == "ellipse":
        a2, b2 = aniso.params["a"] ** 2, aniso.params["b"] ** 2
        h = np.sqrt(a2 * x * x + b2 * y * y)
        safe_h = np.where(h > 0.0, h, 1.0)
        g = np.stack([a2 * x, b2 * y], axis=1) / safe_h[:, None]
    elif kind == "lq_norm":
        q = aniso.params["q"]
        h = _unrotated_value(aniso, z)
        safe_h = np.where(h > 0.0, h, 1.0)
        az = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(az > 0.0, np.sign(z) * (az / safe_h[:, None]) ** (q - 1.0), 0.0)
    elif kind == "half_space_gauge":
        c = aniso.params["c"]
        if smoothing > 0.0:
            arg = -x / (smoothing * safe_r)
            s = expit(arg)
            factor = 1.0 + (c - 1.0) * s
            h = r * factor
            dratio = (np.stack([np.ones_like(x), np.zeros_like(x)], axis=1) - (x / safe_r)[:, None] * unit) / safe_r[:, None]
            ds = -(s * (1.0 - s) / smoothing)[:, None] * dratio
            g = factor[:, None] * unit + (r * (c - 1.0))[:, None] * ds
        else:
            factor = np.where(x >= 0.0, 1.0, c)
            h = r * factor
            g = factor[:, None] * unit
    else:
        h = _unrotated_value(aniso, z)
        g = (h / safe_r)[:, None] * unit

    g = np.where(pos[:, None], g, 0.0)
    if aniso.rotation != 0.0:
        g = g @ rotation_matrix(aniso.rotation)
    return h, g
