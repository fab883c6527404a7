"""
Convex polygons, log-concave weights and the quantities measured on them:
diameters (Euclidean and anisotropic), Wulff shapes, half-plane clipping,
fan quadrature and section profiles.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import numpy as np
from scipy.spatial.distance import pdist

from .anisotropy import Anisotropy, DirectionGrid, polar, polar_closed, width_sup
from .errors import AccuracyError, ConfigurationError, InvalidInputError
from .helpers import (
    direction,
    is_log_concave,
    rotation_matrix,
    validate_finite_vector,
    validate_kind,
    validate_polygon_vertices,
    validate_positive,
)

log = logging.getLogger("poincare-bound")

WEIGHT_KINDS = ("constant", "exp_linear", "gaussian")
QUADRATURE_ORDERS = (1, 2, 5)
ADAPTIVE_BUDGET = 400_000


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    vertices: np.ndarray

    def __post_init__(self) -> None:
        ok, err = validate_polygon_vertices(self.vertices)
        if not ok:
            raise InvalidInputError(err)
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @staticmethod
    def from_points(points: Any) -> "ConvexPolygon":
        """Accepts either orientation; clockwise input is reversed."""
        v = np.asarray(points, dtype=float)
        if v.ndim == 2 and len(v) >= 3 and _signed_area(v) < 0.0:
            v = v[::-1]
        return ConvexPolygon(v)

    @staticmethod
    def rectangle(width: float, height: float, origin: tuple[float, float] = (0.0, 0.0)) -> "ConvexPolygon":
        x0, y0 = origin
        return ConvexPolygon(
            [[x0, y0], [x0 + width, y0], [x0 + width, y0 + height], [x0, y0 + height]]
        )

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        a = 0.5 * cross.sum()
        cx = ((v[:, 0] + w[:, 0]) * cross).sum() / (6.0 * a)
        cy = ((v[:, 1] + w[:, 1]) * cross).sum() / (6.0 * a)
        return np.array([cx, cy])

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    def rotated(self, angle: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices @ rotation_matrix(angle).T)

    def scaled(self, factor: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices * float(factor))

    def translated(self, offset: Any) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(offset, dtype=float))

    def to_list(self) -> list[list[float]]:
        return self.vertices.tolist()


def _signed_area(v: np.ndarray) -> float:
    return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))


def _trusted(vertices: np.ndarray) -> ConvexPolygon:
    # Clipping output is convex by construction; skip re-validation
    poly = object.__new__(ConvexPolygon)
    v = np.array(vertices, dtype=float)
    v.setflags(write=False)
    object.__setattr__(poly, "vertices", v)
    return poly


@dataclass(frozen=True, eq=False)
class Weight:
    kind: str = "constant"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ok, err = validate_kind(self.kind, WEIGHT_KINDS, "weight kind")
        if not ok:
            raise ConfigurationError(err)
        raw = dict(self.params or {})
        if self.kind == "constant":
            value = raw.get("value", 1.0)
            ok, err = validate_positive(value, "constant weight value")
            if not ok:
                raise ConfigurationError(err)
            norm: dict[str, Any] = {"value": float(value)}
        elif self.kind == "exp_linear":
            ok, err = validate_finite_vector(raw.get("c", [0.0, 0.0]), "exp_linear c")
            if not ok:
                raise ConfigurationError(err)
            norm = {"c": tuple(float(x) for x in raw.get("c", [0.0, 0.0]))}
        else:
            ok, err = validate_positive(raw.get("c"), "gaussian c")
            if not ok:
                raise ConfigurationError(err)
            center = raw.get("center", [0.0, 0.0])
            ok, err = validate_finite_vector(center, "gaussian center")
            if not ok:
                raise ConfigurationError(err)
            norm = {"c": float(raw["c"]), "center": tuple(float(x) for x in center)}
        object.__setattr__(self, "params", norm)

    def log_value(self, points: Any) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.full(pts.shape[:-1], math.log(self.params["value"]))
        if self.kind == "exp_linear":
            c = np.asarray(self.params["c"])
            return pts @ c
        d = pts - np.asarray(self.params["center"])
        return -self.params["c"] * np.sum(d * d, axis=-1)

    def __call__(self, points: Any) -> np.ndarray:
        return np.exp(self.log_value(points))

    def log_concavity_check(self, a: Any, b: Any, tol: float = 1e-10) -> bool:
        """Midpoint test along segments a[i] -> b[i]."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid = self.log_value(0.5 * (a + b))
        return bool(np.all(mid >= 0.5 * (self.log_value(a) + self.log_value(b)) - tol))

    def to_dict(self) -> dict[str, Any]:
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        return {"kind": self.kind, "params": params}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "Weight":
        if not isinstance(d, dict):
            raise ConfigurationError("weight must be an object with 'kind' and 'params'")
        params = d.get("params", {})
        if not isinstance(params, dict):
            raise ConfigurationError("weight params must be an object")
        return Weight(kind=d.get("kind", ""), params=params)


@dataclass(frozen=True)
class Line:
    point: np.ndarray
    normal: np.ndarray


def euclidean_diameter(poly: ConvexPolygon) -> float:
    return float(pdist(poly.vertices).max())


def anisotropic_diameter_pair(
    poly: ConvexPolygon, aniso: Anisotropy, grid: DirectionGrid
) -> tuple[float, int, int]:
    """
    D_H together with an ordered vertex pair (i, j) with H°(v_j - v_i) = D_H.

    sup over x, y of H°(y - x) equals sup over unit xi of width(xi) / H(xi):
    both are sup of <xi, y - x> / H(xi) with the suprema taken in either order.
    The pair is read off the support points of the maximizing direction.
    """
    value, arg = width_sup(aniso, poly.vertices, grid)
    proj = poly.vertices @ direction(arg)
    return value, int(np.argmin(proj)), int(np.argmax(proj))


def anisotropic_diameter(poly: ConvexPolygon, aniso: Anisotropy, grid: DirectionGrid) -> float:
    return anisotropic_diameter_pair(poly, aniso, grid)[0]


def wulff_shape(
    aniso: Anisotropy, R: float, m: int, grid: DirectionGrid | None = None
) -> ConvexPolygon:
    """
    Polygon inscribed in {H° < R}: vertices R / H°(u_k) * u_k on m equispaced
    directions. H and its convex envelope share H°, so non-convex gauges need
    no separate treatment.
    """
    ok, err = validate_positive(R, "R")
    if not ok:
        raise InvalidInputError(err)
    if int(m) < 16:
        raise InvalidInputError(f"Wulff polygon needs at least 16 vertices, got: {m}")
    if not aniso.is_convex:
        log.info("Wulff shape of non-convex %r: using its polar, shared with the convex envelope", aniso)

    grid = grid or DirectionGrid.from_settings()
    u = direction(2.0 * math.pi * np.arange(int(m)) / int(m))
    closed = polar_closed(aniso, u)
    radial = closed if closed is not None else polar(aniso, u, grid)
    return ConvexPolygon(float(R) * u / np.asarray(radial)[:, None])


def clip_halfplane(poly: ConvexPolygon, line: Line) -> ConvexPolygon | None:
    """
    poly ∩ {x : <x - point, normal> <= 0}; None when nothing of positive area
    remains. Crossing points on the cut line are inserted.
    """
    out = _clip_vertices(poly.vertices, np.asarray(line.point, float), np.asarray(line.normal, float))
    if out is None:
        return None
    if out is poly.vertices:
        return poly
    return _trusted(out)


def _clip_vertices(v: np.ndarray, point: np.ndarray, normal: np.ndarray) -> np.ndarray | None:
    s = (v - point) @ normal
    if np.all(s <= 0.0):
        return v
    if np.all(s >= 0.0):
        return None

    out: list[np.ndarray] = []
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        sa, sb = s[i], s[(i + 1) % n]
        if sa <= 0.0:
            out.append(a)
        if (sa < 0.0 < sb) or (sb < 0.0 < sa):
            out.append(a + (sa / (sa - sb)) * (b - a))

    pts = np.array(out)
    scale = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
    keep = np.linalg.norm(pts - np.roll(pts, 1, axis=0), axis=1) > 1e-14 * scale
    pts = pts[keep] if keep.any() else pts[:1]
    if len(pts) < 3 or _signed_area(pts) <= 1e-15 * scale * scale:
        return None
    return pts


def clipped_area(poly: ConvexPolygon, line: Line) -> float:
    out = _clip_vertices(poly.vertices, np.asarray(line.point, float), np.asarray(line.normal, float))
    return 0.0 if out is None else _signed_area(out)


# --- quadrature -----------------------------------------------------------------


@lru_cache(maxsize=32)
def _reference_rule(order: int, refine: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric nodes and weights (summing to 1) on a 4^refine-split triangle."""
    if order == 1:
        bary = np.array([[1.0, 1.0, 1.0]]) / 3.0
        w = np.array([1.0])
    elif order == 2:
        bary = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
        w = np.full(3, 1.0 / 3.0)
    elif order == 5:
        r15 = math.sqrt(15.0)
        a1, a2 = (6.0 - r15) / 21.0, (6.0 + r15) / 21.0
        w1, w2 = (155.0 - r15) / 1200.0, (155.0 + r15) / 1200.0
        bary = np.array(
            [
                [1 / 3, 1 / 3, 1 / 3],
                [1 - 2 * a1, a1, a1], [a1, 1 - 2 * a1, a1], [a1, a1, 1 - 2 * a1],
                [1 - 2 * a2, a2, a2], [a2, 1 - 2 * a2, a2], [a2, a2, 1 - 2 * a2],
            ]
        )
        w = np.array([9.0 / 40.0, w1, w1, w1, w2, w2, w2])
    else:
        raise ConfigurationError(
            f"quadrature order {order} unsupported, expected one of {QUADRATURE_ORDERS}"
        )

    k = 2 ** int(refine)
    subs = []
    for i in range(k):
        for j in range(k - i):
            subs.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j <= k - 2:
                subs.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))

    nodes, weights = [], []
    for tri in subs:
        corners = np.array([[1.0 - (i + j) / k, i / k, j / k] for i, j in tri])
        nodes.append(bary @ corners)
        weights.append(w / len(subs))
    return np.vstack(nodes), np.concatenate(weights)


def quadrature_nodes(poly: ConvexPolygon, order: int = 5, refine: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the centroid-fan rule on poly."""
    bary, w = _reference_rule(int(order), int(refine))
    v = poly.vertices
    c = poly.centroid
    a, b = v, np.roll(v, -1, axis=0)
    areas = 0.5 * ((a[:, 0] - c[0]) * (b[:, 1] - c[1]) - (b[:, 0] - c[0]) * (a[:, 1] - c[1]))
    # (fan triangle, node, xy)
    pts = (
        bary[None, :, 0:1] * c[None, None, :]
        + bary[None, :, 1:2] * a[:, None, :]
        + bary[None, :, 2:3] * b[:, None, :]
    )
    weights = areas[:, None] * w[None, :]
    return pts.reshape(-1, 2), weights.reshape(-1)


def integrate(
    poly: ConvexPolygon,
    f: Callable[[np.ndarray], np.ndarray],
    order: int = 5,
    refine: int = 0,
) -> float:
    """∫_poly f, f vectorized over an (N, 2) array of points."""
    pts, w = quadrature_nodes(poly, order, refine)
    return float(np.dot(w, np.asarray(f(pts), dtype=float)))


def _fan_triangles(poly: ConvexPolygon) -> np.ndarray:
    v = poly.vertices
    c = np.broadcast_to(poly.centroid, v.shape)
    return np.stack([c, v, np.roll(v, -1, axis=0)], axis=1)


def _subdivide(tris: np.ndarray) -> np.ndarray:
    """Midpoint split, (N, 3, 2) -> (4N, 3, 2); children of triangle k are 4k..4k+3."""
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    m01, m12, m20 = 0.5 * (v0 + v1), 0.5 * (v1 + v2), 0.5 * (v2 + v0)
    kids = np.stack(
        [
            np.stack([v0, m01, m20], axis=1),
            np.stack([m01, v1, m12], axis=1),
            np.stack([m20, m12, v2], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ],
        axis=1,
    )
    return kids.reshape(-1, 3, 2)


def _split_at_zero(tris: np.ndarray, level_set: Callable[[np.ndarray], np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """
    Cut every triangle whose vertex values change sign along the zero line of
    the linear interpolant. Returns the pieces and the index of their parent.
    """
    vals = np.asarray(level_set(tris.reshape(-1, 2)), dtype=float).reshape(-1, 3)
    neg = vals < 0.0
    mixed = neg.any(axis=1) & ~neg.all(axis=1)
    keep = np.flatnonzero(~mixed)
    cut = np.flatnonzero(mixed)
    if cut.size == 0:
        return tris, np.arange(len(tris))

    n = neg[cut]
    # the vertex alone on its side goes first
    lone = np.where(n[:, 0] == n[:, 1], 2, np.where(n[:, 0] == n[:, 2], 1, 0))
    idx = (lone[:, None] + np.arange(3)[None, :]) % 3
    t = np.take_along_axis(tris[cut], idx[:, :, None], axis=1)
    f = np.take_along_axis(vals[cut], idx, axis=1)
    vk, vi, vj = t[:, 0], t[:, 1], t[:, 2]
    a = (f[:, 0] / (f[:, 0] - f[:, 1]))[:, None]
    b = (f[:, 0] / (f[:, 0] - f[:, 2]))[:, None]
    p = vk + a * (vi - vk)
    q = vk + b * (vj - vk)
    pieces = np.concatenate(
        [
            tris[keep],
            np.stack([vk, p, q], axis=1),
            np.stack([p, vi, vj], axis=1),
            np.stack([p, vj, q], axis=1),
        ]
    )
    owner = np.concatenate([keep, cut, cut, cut])
    return pieces, owner


def _rule_values(
    tris: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    bary: np.ndarray,
    w: np.ndarray,
    level_set: Callable[[np.ndarray], np.ndarray] | None,
) -> np.ndarray:
    pieces, owner = (tris, np.arange(len(tris))) if level_set is None else _split_at_zero(tris, level_set)
    d1 = pieces[:, 1] - pieces[:, 0]
    d2 = pieces[:, 2] - pieces[:, 0]
    areas = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    pts = np.einsum("kc,ncx->nkx", bary, pieces)
    vals = np.asarray(f(pts.reshape(-1, 2)), dtype=float).reshape(len(pieces), -1)
    return np.bincount(owner, weights=areas * (vals @ w), minlength=len(tris))


def adaptive_integrate(
    poly: ConvexPolygon,
    f: Callable[[np.ndarray], np.ndarray],
    tol: float,
    order: int = 5,
    level_set: Callable[[np.ndarray], np.ndarray] | None = None,
    max_triangles: int = ADAPTIVE_BUDGET,
) -> float:
    """
    ∫_poly f to absolute accuracy tol by adaptive midpoint refinement of the
    centroid fan. The error of a triangle is estimated by comparing it with
    the sum over its four children; the leaves with the smallest estimates are
    accepted while they fit in half of the remaining budget.

    f may have a kink across the zero set of level_set (e.g. |u|^{p-2} u
    across u = 0); triangles are then cut along the zero line of the linear
    interpolant of level_set before the rule is applied.
    """
    bary, w = _reference_rule(int(order), 0)
    tris = _fan_triangles(poly)
    coarse = _rule_values(tris, f, bary, w, level_set)
    total, spent = 0.0, 0.0
    while True:
        kids = _subdivide(tris)
        kid_vals = _rule_values(kids, f, bary, w, level_set)
        fine = kid_vals.reshape(-1, 4).sum(axis=1)
        err = np.abs(fine - coarse)
        budget = tol - spent
        if err.sum() <= budget:
            return total + float(fine.sum())

        ranked = np.argsort(err)
        take = ranked[np.cumsum(err[ranked]) <= 0.5 * budget]
        total += float(fine[take].sum())
        spent += float(err[take].sum())
        rest = np.setdiff1d(ranked, take, assume_unique=True)
        if 4 * len(rest) > max_triangles:
            raise AccuracyError(
                f"adaptive quadrature needs more than {max_triangles} triangles for tol {tol:.3e}"
            )
        tris = kids.reshape(-1, 4, 3, 2)[rest].reshape(-1, 3, 2)
        coarse = kid_vals.reshape(-1, 4)[rest].reshape(-1)


# --- sections -------------------------------------------------------------------


def support_interval(poly: ConvexPolygon, angle: float) -> tuple[float, float]:
    proj = poly.vertices @ direction(angle)
    return float(proj.min()), float(proj.max())


def section_profile(poly: ConvexPolygon, angle: float, t: Any) -> float | np.ndarray:
    """
    Length of the chord poly ∩ {<x, direction(angle)> = t}; 0 outside the
    support interval. Vectorized over t.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    d = direction(angle)
    e = np.array([-d[1], d[0]])
    v = poly.vertices
    edge = np.roll(v, -1, axis=0) - v
    normals = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
    offsets = np.sum(normals * v, axis=1)

    # points t d + s e satisfy s <e, n_k> <= c_k - t <d, n_k>
    en = normals @ e
    dn = normals @ d
    rhs = offsets[None, :] - t_arr[:, None] * dn[None, :]
    scale = np.linalg.norm(normals, axis=1)[None, :] * poly.scale
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = rhs / en[None, :]
    upper = np.where(en[None, :] > 1e-15 * scale, bound, np.inf).min(axis=1)
    lower = np.where(en[None, :] < -1e-15 * scale, bound, -np.inf).max(axis=1)
    parallel_violated = np.any((np.abs(en[None, :]) <= 1e-15 * scale) & (rhs < 0.0), axis=1)
    length = np.where(parallel_violated, 0.0, np.maximum(upper - lower, 0.0))
    lo, hi = support_interval(poly, angle)
    length = np.where((t_arr < lo) | (t_arr > hi), 0.0, length)
    return float(length[0]) if np.ndim(t) == 0 else length


def profile_is_log_concave(poly: ConvexPolygon, angle: float, samples: int = 200, tol: float = 1e-10) -> bool:
    """Midpoint log-concavity of the section profile on the open support interval."""
    lo, hi = support_interval(poly, angle)
    t = np.linspace(lo, hi, samples + 2)[1:-1]
    return is_log_concave(section_profile(poly, angle, t), tol)


def frame_constant(aniso: Anisotropy, axis_angle: float, grid: DirectionGrid) -> float:
    """
    M = max{H°(e1), H°(-e1)} with e1 = direction(axis_angle), the constant a
    piece of length d_i along its axis contributes: d_i * M <= D_H(piece) + O(eps).
    """
    e1 = direction(axis_angle)
    closed = polar_closed(aniso, np.stack([e1, -e1]))
    vals = closed if closed is not None else polar(aniso, np.stack([e1, -e1]), grid)
    return float(np.max(vals))
