"""
Recursive zero-mean bisection of a convex polygon into thin convex pieces.

A rotating area-bisecting line sweeps half a turn; the difference between the
weighted p-means of the two halves changes sign over that sweep, so bisection
on the angle finds a cut that splits the residual evenly. p-means are measured
with adaptive quadrature cut along the zero set of the function. Pieces
are cut until each fits in a slab of half-width eps around its diameter chord.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import pdist, squareform

from .anisotropy import Anisotropy, DirectionGrid
from .config import Settings, resolve
from .errors import DomainError, PreconditionError, SlicingError
from .geometry import (
    ConvexPolygon,
    Line,
    Weight,
    adaptive_integrate,
    clip_halfplane,
    clipped_area,
    frame_constant,
    quadrature_nodes,
    section_profile,
    support_interval,
)
from .helpers import direction, validate_exponent
from .wirtinger import Grid1D, Weight1D, minimize_1d, shift_root

log = logging.getLogger("poincare-bound")

ANGLE_STEPS = 100
OFFSET_STEPS = 200
# share of mean_tol spent on quadrature error
QUAD_FRACTION = 0.05

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SlicePiece:
    polygon: ConvexPolygon
    axis_angle: float
    d_i: float
    half_width: float
    p_mean_residual: float
    depth: int = 0

    def to_dict(self) -> dict:
        return {
            "vertices": self.polygon.to_list(),
            "axis_angle": self.axis_angle,
            "d_i": self.d_i,
            "half_width": self.half_width,
            "p_mean_residual": self.p_mean_residual,
            "depth": self.depth,
        }


def area_bisecting_line(
    poly: ConvexPolygon,
    angle: float,
    settings: Settings | None = None,
    reference_area: float | None = None,
) -> Line:
    """
    The line {<x, n> = s}, n = direction(angle), with equal area on both sides.
    Bisection on s until |area - total/2| <= area_tol * reference_area.
    """
    s = resolve(settings)
    n = direction(angle)
    total = poly.area
    tol = s.area_tol * (reference_area if reference_area is not None else total)
    lo, hi = support_interval(poly, angle)
    mid = 0.5 * (lo + hi)
    for _ in range(OFFSET_STEPS):
        mid = 0.5 * (lo + hi)
        below = clipped_area(poly, Line(mid * n, n))
        if abs(below - 0.5 * total) <= tol:
            break
        if below < 0.5 * total:
            lo = mid
        else:
            hi = mid
    return Line(mid * n, n)


def p_mean_density(u: Field, weight: Weight, p: float) -> Field:
    def density(x: np.ndarray) -> np.ndarray:
        val = np.asarray(u(x), dtype=float)
        return np.sign(val) * np.abs(val) ** (p - 1.0) * weight(x)

    return density


def _integral(poly: ConvexPolygon, density: Field, s: Settings) -> float:
    pts, w = quadrature_nodes(poly, s.quadrature_order, s.quadrature_refine)
    return float(np.dot(w, density(pts)))


def _p_integral(poly: ConvexPolygon | None, u: Field, weight: Weight, p: float, s: Settings, mass: float) -> float:
    if poly is None:
        return 0.0
    return adaptive_integrate(
        poly,
        p_mean_density(u, weight, p),
        QUAD_FRACTION * s.mean_tol * mass,
        s.quadrature_order,
        level_set=None if p == 2.0 else u,
    )


def weighted_mass(poly: ConvexPolygon, weight: Weight, settings: Settings | None = None) -> float:
    return _integral(poly, weight, resolve(settings))


def p_mean(
    poly: ConvexPolygon,
    u: Field,
    weight: Weight,
    p: float,
    settings: Settings | None = None,
    reference_mass: float | None = None,
) -> float:
    """
    ∫_poly |u|^{p-2} u ω, accurate to QUAD_FRACTION * mean_tol * mass with
    mass = ∫_poly ω unless reference_mass is given.
    """
    s = resolve(settings)
    mass = reference_mass if reference_mass is not None else _integral(poly, weight, s)
    return _p_integral(poly, u, weight, p, s, mass)


def zero_mean_field(
    poly: ConvexPolygon, f: Field, weight: Weight, p: float, settings: Settings | None = None
) -> Field:
    """f - t with t chosen so the p-mean over poly vanishes."""
    s = resolve(settings)
    mass = _integral(poly, weight, s)
    pts, w = quadrature_nodes(poly, s.quadrature_order, s.quadrature_refine)
    values = np.asarray(f(pts), dtype=float)
    t0 = shift_root(values, w * weight(pts), p)

    def residual(t: float) -> float:
        return _p_integral(poly, lambda x: np.asarray(f(x), dtype=float) - t, weight, p, s, mass)

    # residual is decreasing in t; widen around the node estimate until it changes sign
    step = 1e-6 * (1.0 + float(np.ptp(values)))
    lo, hi = t0 - step, t0 + step
    while residual(lo) < 0.0:
        lo -= 10.0 * (t0 - lo)
    while residual(hi) > 0.0:
        hi += 10.0 * (hi - t0)
    t = brentq(residual, lo, hi, xtol=1e-15 * (1.0 + abs(t0)), maxiter=200)

    def shifted(x: np.ndarray) -> np.ndarray:
        return np.asarray(f(x), dtype=float) - t

    return shifted


def _halves(poly: ConvexPolygon, theta: float, s: Settings, reference_area: float):
    line = area_bisecting_line(poly, theta, s, reference_area)
    a = clip_halfplane(poly, Line(line.point, -line.normal))
    b = clip_halfplane(poly, line)
    return a, b


def zero_mean_bisection(
    poly: ConvexPolygon,
    u: Field,
    weight: Weight,
    p: float,
    settings: Settings | None = None,
    reference_mass: float | None = None,
    reference_area: float | None = None,
) -> tuple[float, ConvexPolygon, ConvexPolygon, float, float]:
    """
    Returns (theta*, piece A, piece B, residual A, residual B).

    A(theta) is the half of poly on the side direction(theta) points to and
    B(theta) the other half. h(theta) = (∫_A - ∫_B) |u|^{p-2} u ω / 2 satisfies
    h(theta + pi) = -h(theta), so a root lies in [0, pi]. Both residuals are
    measured on the pieces themselves.
    """
    ok, err = validate_exponent(p)
    if not ok:
        raise DomainError(err)
    s = resolve(settings)
    mass = reference_mass if reference_mass is not None else _integral(poly, weight, s)
    ref_area = reference_area if reference_area is not None else poly.area
    tol = s.mean_tol * mass

    r = _p_integral(poly, u, weight, p, s, mass)
    if abs(r) > tol:
        raise PreconditionError(f"p-mean {r:.3e} exceeds mean_tol * mass = {tol:.3e}")

    def imbalance(theta: float):
        a, b = _halves(poly, theta, s, ref_area)
        ga = _p_integral(a, u, weight, p, s, mass)
        gb = _p_integral(b, u, weight, p, s, mass)
        return 0.5 * (ga - gb), a, b, ga, gb

    # |r| <= tol and |h| <= tol / 4 keep each half within 3 tol / 4 plus quadrature error
    root_tol = 0.25 * tol
    h0, a0, b0, ga0, gb0 = imbalance(0.0)
    if abs(h0) <= root_tol:
        return 0.0, a0, b0, ga0, gb0

    lo, hi, h_lo = 0.0, math.pi, h0
    best = (abs(h0), 0.0, a0, b0, ga0, gb0)
    for _ in range(ANGLE_STEPS):
        mid = 0.5 * (lo + hi)
        h, a, b, ga, gb = imbalance(mid)
        if abs(h) < best[0]:
            best = (abs(h), mid, a, b, ga, gb)
        if abs(h) <= root_tol:
            break
        if np.sign(h) == np.sign(h_lo):
            lo, h_lo = mid, h
        else:
            hi = mid

    err_h, theta, a, b, ga, gb = best
    if err_h > root_tol:
        log.warning("zero-mean bisection stopped with imbalance %.3e > %.3e", err_h, root_tol)
    return theta, a, b, ga, gb


def diameter_frame(poly: ConvexPolygon) -> tuple[float, float, float]:
    """(axis_angle, d_i, half_width) for the Euclidean-diameter chord of poly."""
    v = poly.vertices
    dist = squareform(pdist(v))
    i, j = np.unravel_index(int(np.argmax(dist)), dist.shape)
    chord = v[j] - v[i]
    axis = math.atan2(chord[1], chord[0])
    e = direction(axis)
    normal = np.array([-e[1], e[0]])
    along = v @ e
    across = v @ normal
    return axis, float(along.max() - along.min()), 0.5 * float(across.max() - across.min())


def slice_decomposition(
    poly: ConvexPolygon,
    u: Field,
    weight: Weight,
    p: float,
    eps: float,
    max_depth: int = 12,
    settings: Settings | None = None,
) -> list[SlicePiece]:
    """
    Cut poly with zero-mean bisections until every piece lies in a slab
    0 <= x1 <= d_i, |x2| <= eps of its own diameter frame.
    """
    ok, err = validate_exponent(p)
    if not ok:
        raise DomainError(err)
    s = resolve(settings)
    mass = _integral(poly, weight, s)
    root_area = poly.area
    slack = s.mesh_tol * poly.scale
    tol = s.mean_tol * mass
    r0 = _p_integral(poly, u, weight, p, s, mass)
    if abs(r0) > tol:
        raise PreconditionError(f"p-mean {r0:.3e} exceeds mean_tol * mass = {tol:.3e}")

    pieces: list[SlicePiece] = []
    offending: list[SlicePiece] = []
    stack = [(poly, r0, 0)]
    while stack:
        piece, residual, depth = stack.pop()
        axis, d_i, half_width = diameter_frame(piece)
        done = SlicePiece(piece, axis, d_i, half_width, residual, depth)
        if abs(residual) > tol:
            log.warning("piece at depth %d has p-mean %.3e > %.3e", depth, residual, tol)
            pieces.append(done)
            offending.append(done)
            continue
        if half_width <= eps + slack:
            pieces.append(done)
            continue
        if depth >= max_depth:
            pieces.append(done)
            offending.append(done)
            continue

        _, a, b, ra, rb = zero_mean_bisection(
            piece, u, weight, p, s, reference_mass=mass, reference_area=root_area
        )
        # depth-first, A before B
        for child, res in ((b, rb), (a, ra)):
            if child is not None:
                stack.append((child, res, depth + 1))

    log.info(
        "slicing produced %d pieces (max depth %d, eps %.3g)",
        len(pieces),
        max((pc.depth for pc in pieces), default=0),
        eps,
    )
    if offending:
        raise SlicingError(
            f"{len(offending)} pieces thicker than eps={eps} at max_depth={max_depth} or off zero p-mean",
            pieces,
            offending,
        )
    return pieces


def reduce_piece(
    piece: SlicePiece, weight: Weight, p: float, n: int = 400
) -> tuple[Grid1D, Weight1D]:
    """
    One-dimensional reduction of a piece along its axis: f(t) = g(t) ω(x(t))
    on [0, d_i], with g the section length and x(t) the axis point at t.
    """
    ok, err = validate_exponent(p)
    if not ok:
        raise DomainError(err)
    e = direction(piece.axis_angle)
    lo, _ = support_interval(piece.polygon, piece.axis_angle)
    grid = Grid1D(piece.d_i, n)
    t = grid.nodes
    g = section_profile(piece.polygon, piece.axis_angle, lo + t)

    # axis through the middle of the slab
    normal = np.array([-e[1], e[0]])
    across = piece.polygon.vertices @ normal
    offset = 0.5 * (across.max() + across.min())
    points = (lo + t)[:, None] * e[None, :] + offset * normal[None, :]
    return grid, Weight1D.section_induced(grid, g, weight(points))


@dataclass(frozen=True)
class PieceEstimate:
    """
    The two per-piece steps of the diameter bound: the chord of a piece along
    its axis has H°-length d_i * M <= D_H(Ω), and the reduced 1-D problem on
    [0, d_i] sits above pi_p^p / d_i^p.
    """

    depth: int
    d_i: float
    frame_constant: float
    chord_polar: float
    mu_1d: float
    bound_1d: float

    @property
    def ratio_1d(self) -> float:
        return self.mu_1d / self.bound_1d

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "d_i": self.d_i,
            "frame_constant": self.frame_constant,
            "chord_polar": self.chord_polar,
            "mu_1d": self.mu_1d,
            "bound_1d": self.bound_1d,
            "ratio_1d": self.ratio_1d,
        }


def piece_estimates(
    pieces: list[SlicePiece],
    aniso: Anisotropy,
    weight: Weight,
    p: float,
    grid: DirectionGrid,
    n: int = 200,
    settings: Settings | None = None,
) -> list[PieceEstimate]:
    s = resolve(settings)
    out = []
    for pc in pieces:
        m = frame_constant(aniso, pc.axis_angle, grid)
        _, f = reduce_piece(pc, weight, p, n)
        res = minimize_1d(f, p, settings=s)
        out.append(PieceEstimate(pc.depth, pc.d_i, m, pc.d_i * m, res.mu_hat, res.bound))
        log.debug(
            "piece depth %d: d_i %.4g, d_i*M %.6g, 1-D ratio %.4f",
            pc.depth,
            pc.d_i,
            pc.d_i * m,
            res.mu_hat / res.bound,
        )
    return out
