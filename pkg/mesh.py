"""
Triangle meshes of convex polygons and piecewise-linear fields on them.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import Delaunay

from .config import Settings, resolve
from .errors import BudgetError, InvalidInputError, InvariantViolationError
from .geometry import ConvexPolygon
from .helpers import validate_positive

log = logging.getLogger("poincare-bound")

SMOOTHING_PASSES = 3
BOUNDARY_GAP = 0.7


@dataclass(frozen=True, eq=False)
class TriMesh:
    points: np.ndarray
    triangles: np.ndarray
    h: float

    @cached_property
    def signed_double_areas(self) -> np.ndarray:
        p = self.points[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]

    @property
    def areas(self) -> np.ndarray:
        return 0.5 * self.signed_double_areas

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def centroids(self) -> np.ndarray:
        return self.points[self.triangles].mean(axis=1)

    @cached_property
    def node_masses(self) -> np.ndarray:
        """Lumped masses: a third of each adjacent triangle's area."""
        return np.bincount(
            self.triangles.ravel(),
            weights=np.repeat(self.areas / 3.0, 3),
            minlength=len(self.points),
        )

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """(T, 3, 2): gradient of each vertex's hat function on each triangle."""
        d = self.signed_double_areas
        if np.any(d <= 1e-14 * self.h * self.h):
            bad = int(np.argmin(d))
            raise InvariantViolationError(f"degenerate or inverted triangle {bad} (2*area={d[bad]:.3e})")
        p = self.points[self.triangles]
        x, y = p[..., 0], p[..., 1]
        gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        return np.stack([gx, gy], axis=2) / d[:, None, None]

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.points[self.triangles]
        worst = math.pi
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            cos = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            worst = min(worst, float(np.arccos(np.clip(cos, -1.0, 1.0)).min()))
        return math.degrees(worst)


@dataclass(frozen=True, eq=False)
class Field2D:
    mesh: TriMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.mesh.points),):
            raise InvalidInputError(f"field needs {len(self.mesh.points)} nodal values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("field has non-finite values")
        object.__setattr__(self, "values", v)

    @staticmethod
    def from_function(mesh: TriMesh, f: Callable[[np.ndarray], np.ndarray]) -> "Field2D":
        return Field2D(mesh, np.asarray(f(mesh.points), dtype=float))


def gradient_pw(field: Field2D) -> np.ndarray:
    """Constant gradient of the linear interpolant on each triangle, (T, 2)."""
    b = field.mesh.shape_gradients
    u = field.values[field.mesh.triangles]
    return np.einsum("tk,tkd->td", u, b)


def _boundary_points(poly: ConvexPolygon, h: float) -> np.ndarray:
    v = poly.vertices
    out = []
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / h)))
        s = np.arange(k)[:, None] / k
        out.append(a + s * (b - a))
    return np.vstack(out)


def _inward_distance(poly: ConvexPolygon, pts: np.ndarray) -> np.ndarray:
    v = poly.vertices
    edge = np.roll(v, -1, axis=0) - v
    inward = np.stack([-edge[:, 1], edge[:, 0]], axis=1)
    inward /= np.linalg.norm(inward, axis=1)[:, None]
    rel = pts[:, None, :] - v[None, :, :]
    return np.einsum("nkd,kd->nk", rel, inward).min(axis=1)


def _interior_lattice(poly: ConvexPolygon, h: float) -> np.ndarray:
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    dy = h * math.sqrt(3.0) / 2.0
    rows = np.arange(lo[1], hi[1] + dy, dy)
    pts = []
    for i, y in enumerate(rows):
        shift = 0.5 * h if i % 2 else 0.0
        xs = np.arange(lo[0] + shift, hi[0] + h, h)
        pts.append(np.column_stack([xs, np.full_like(xs, y)]))
    lattice = np.vstack(pts)
    return lattice[_inward_distance(poly, lattice) >= BOUNDARY_GAP * h]


def _delaunay(points: np.ndarray, h: float) -> np.ndarray:
    tri = Delaunay(points).simplices
    p = points[tri]
    d = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tri = np.where((d < 0.0)[:, None], tri[:, [0, 2, 1]], tri)
    return tri[np.abs(d) > 1e-12 * h * h]


def _smooth(points: np.ndarray, tri: np.ndarray, n_boundary: int) -> np.ndarray:
    edges = np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    n = len(points)
    total = np.zeros_like(points)
    count = np.zeros(n)
    for a, b in ((edges[:, 0], edges[:, 1]), (edges[:, 1], edges[:, 0])):
        np.add.at(total, a, points[b])
        np.add.at(count, a, 1.0)
    moved = points.copy()
    inner = np.arange(n) >= n_boundary
    moved[inner] = total[inner] / count[inner, None]
    return moved


def triangulate(poly: ConvexPolygon, h: float, settings: Settings | None = None) -> TriMesh:
    """
    Boundary nodes every <= h along each edge, a hexagonal lattice of spacing
    h inside (kept at least 0.7 h away from the boundary), Delaunay, then a few
    Laplacian passes on the interior nodes.
    """
    ok, err = validate_positive(h, "mesh h")
    if not ok:
        raise InvalidInputError(err)
    s = resolve(settings)
    h = float(h)
    estimate = 4.0 * poly.area / (math.sqrt(3.0) * h * h)
    if estimate > s.max_triangles:
        raise BudgetError(
            f"h={h:g} would need about {estimate:.3g} triangles, budget is {s.max_triangles}"
        )

    boundary = _boundary_points(poly, h)
    points = np.vstack([boundary, _interior_lattice(poly, h)])
    tri = _delaunay(points, h)
    for _ in range(SMOOTHING_PASSES):
        points = _smooth(points, tri, len(boundary))
        tri = _delaunay(points, h)

    mesh = TriMesh(points, tri, h)
    covered = mesh.total_area
    if abs(covered - poly.area) > s.area_tol * poly.area + 1e-12:
        log.warning("mesh covers %.12g of area %.12g", covered, poly.area)
    log.debug("mesh: %d nodes, %d triangles, min angle %.1f deg", len(points), len(tri), mesh.min_angle())
    return mesh
