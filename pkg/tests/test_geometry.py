import importlib
import math
from typing import Any

import numpy as np
import pytest


def import_geometry() -> Any:
	return importlib.import_module("poincare_bound.geometry")


def import_anisotropy() -> Any:
	return importlib.import_module("poincare_bound.anisotropy")


def import_errors() -> Any:
	return importlib.import_module("poincare_bound.errors")


@pytest.fixture(scope="module")
def grid():
	return import_anisotropy().DirectionGrid()


def unit_square():
	return import_geometry().ConvexPolygon.rectangle(1.0, 1.0)


def test_polygon_basics():
	geo = import_geometry()
	sq = unit_square()
	assert sq.area == pytest.approx(1.0)
	np.testing.assert_allclose(sq.centroid, [0.5, 0.5])
	assert geo.euclidean_diameter(sq) == pytest.approx(math.sqrt(2.0))


def test_clockwise_input_is_reoriented():
	geo = import_geometry()
	poly = geo.ConvexPolygon.from_points([[0, 0], [0, 1], [1, 1], [1, 0]])
	assert poly.area == pytest.approx(1.0)


@pytest.mark.parametrize(
	"vertices",
	[
		[[0, 0], [1, 0]],
		[[0, 0], [2, 0], [1, 0.2], [1, 1]],
		[[0, 0], [1, 0], [2, 0]],
		[[0, 0], [1, 0], [math.nan, 1]],
	],
)
def test_invalid_polygons_rejected(vertices):
	geo = import_geometry()
	errors = import_errors()
	with pytest.raises(errors.InvalidInputError):
		geo.ConvexPolygon(vertices)


def test_rigid_motions_and_scaling(grid):
	geo = import_geometry()
	an = import_anisotropy()
	tri = geo.ConvexPolygon([[0, 0], [1, 0], [0.3, 0.8]])
	moved = tri.rotated(0.9).translated([2.0, -1.0])
	assert moved.area == pytest.approx(tri.area)
	assert geo.euclidean_diameter(moved) == pytest.approx(geo.euclidean_diameter(tri))
	assert tri.scaled(3.0).area == pytest.approx(9.0 * tri.area)

	ellipse = an.Anisotropy("ellipse", {"a": 1, "b": 2})
	d = geo.anisotropic_diameter(tri, ellipse, grid)
	assert geo.anisotropic_diameter(tri.scaled(2.5), ellipse, grid) == pytest.approx(2.5 * d, rel=1e-6)
	assert geo.anisotropic_diameter(tri.translated([5, 5]), ellipse, grid) == pytest.approx(d, rel=1e-6)


def test_euclidean_gauge_diameter_matches_euclidean(grid):
	geo = import_geometry()
	an = import_anisotropy()
	tri = geo.ConvexPolygon([[0, 0], [1, 0], [0.3, 0.8]])
	for poly in (unit_square(), tri):
		d_h = geo.anisotropic_diameter(poly, an.Anisotropy("euclidean"), grid)
		assert d_h == pytest.approx(geo.euclidean_diameter(poly), abs=1e-6)


def test_half_space_gauge_on_square(grid):
	geo = import_geometry()
	an = import_anisotropy()
	value, i, j = geo.anisotropic_diameter_pair(unit_square(), an.Anisotropy("half_space_gauge", {"c": 2}), grid)
	assert value == pytest.approx(math.sqrt(2.0), abs=1e-6)
	v = unit_square().vertices
	np.testing.assert_allclose(v[j] - v[i], [1.0, 1.0])


def test_diameter_pair_realizes_value(grid):
	geo = import_geometry()
	an = import_anisotropy()
	tri = geo.ConvexPolygon([[0, 0], [1, 0], [0.3, 0.8]])
	aniso = an.Anisotropy("lq_norm", {"q": 3})
	value, i, j = geo.anisotropic_diameter_pair(tri, aniso, grid)
	v = tri.vertices
	assert an.polar(aniso, v[j] - v[i], grid) == pytest.approx(value, abs=1e-6)


def test_euclidean_wulff_is_disk():
	geo = import_geometry()
	an = import_anisotropy()
	disk = geo.wulff_shape(an.Anisotropy("euclidean"), 1.0, 512)
	assert disk.area == pytest.approx(math.pi, rel=1e-3)
	assert geo.euclidean_diameter(disk) == pytest.approx(2.0, abs=1e-9)


def test_ellipse_wulff(grid):
	geo = import_geometry()
	an = import_anisotropy()
	ellipse = an.Anisotropy("ellipse", {"a": 1, "b": 2})
	shape = geo.wulff_shape(ellipse, 1.0, 512, grid)
	assert shape.area == pytest.approx(2.0 * math.pi, rel=1e-3)
	assert geo.euclidean_diameter(shape) == pytest.approx(4.0, abs=1e-9)
	assert geo.anisotropic_diameter(shape, ellipse, grid) == pytest.approx(2.0, abs=1e-6)


def test_wulff_of_non_convex_gauge_uses_envelope(grid):
	geo = import_geometry()
	an = import_anisotropy()
	astroid = geo.wulff_shape(an.Anisotropy("lq_norm", {"q": 0.5}), 1.0, 64, grid)
	diamond = geo.wulff_shape(an.Anisotropy("lq_norm", {"q": 1}), 1.0, 64, grid)
	np.testing.assert_allclose(astroid.vertices, diamond.vertices, atol=1e-6)


def test_wulff_needs_enough_vertices():
	geo = import_geometry()
	an = import_anisotropy()
	errors = import_errors()
	with pytest.raises(errors.InvalidInputError):
		geo.wulff_shape(an.Anisotropy("euclidean"), 1.0, 8)
	with pytest.raises(errors.InvalidInputError):
		geo.wulff_shape(an.Anisotropy("euclidean"), -1.0, 64)


def test_clip_halfplane():
	geo = import_geometry()
	sq = unit_square()
	half = geo.clip_halfplane(sq, geo.Line(np.array([0.5, 0.0]), np.array([1.0, 0.0])))
	assert half.area == pytest.approx(0.5)
	assert geo.clip_halfplane(sq, geo.Line(np.array([2.0, 0.0]), np.array([1.0, 0.0]))) is sq
	assert geo.clip_halfplane(sq, geo.Line(np.array([-1.0, 0.0]), np.array([1.0, 0.0]))) is None

	diag = geo.Line(np.array([0.5, 0.5]), np.array([1.0, 1.0]) / math.sqrt(2.0))
	corner = geo.clip_halfplane(sq, diag)
	assert len(corner.vertices) == 3
	assert corner.area == pytest.approx(0.5)
	assert geo.clipped_area(sq, diag) == pytest.approx(0.5)


def test_clip_pieces_cover_polygon():
	geo = import_geometry()
	tri = geo.ConvexPolygon([[0, 0], [1, 0], [0.3, 0.8]])
	n = np.array([math.cos(0.4), math.sin(0.4)])
	line = geo.Line(np.array([0.4, 0.3]), n)
	a = geo.clip_halfplane(tri, line)
	b = geo.clip_halfplane(tri, geo.Line(line.point, -n))
	assert a.area + b.area == pytest.approx(tri.area, rel=1e-12)


def test_integrate_exact_for_polynomials():
	geo = import_geometry()
	sq = unit_square()
	assert geo.integrate(sq, lambda x: x[:, 0] ** 2 * x[:, 1] ** 3) == pytest.approx(1.0 / 12.0, rel=1e-12)
	assert geo.integrate(sq, lambda x: x[:, 0], order=1) == pytest.approx(0.5, rel=1e-12)
	assert geo.integrate(sq, lambda x: x[:, 0] * x[:, 1], order=2) == pytest.approx(0.25, rel=1e-12)
	assert geo.integrate(sq, lambda x: np.ones(len(x)), order=5, refine=2) == pytest.approx(1.0, rel=1e-12)


def test_integrate_refinement_converges():
	geo = import_geometry()
	sq = unit_square()
	exact = (math.sqrt(math.pi) / 2.0 * math.erf(1.0)) ** 2

	def f(x):
		return np.exp(-np.sum(x * x, axis=1))

	assert geo.integrate(sq, f, refine=3) == pytest.approx(exact, rel=1e-7)
	assert abs(geo.integrate(sq, f, refine=3) - exact) < abs(geo.integrate(sq, f, refine=0) - exact)


def test_unsupported_quadrature_order():
	geo = import_geometry()
	errors = import_errors()
	with pytest.raises(errors.ConfigurationError):
		geo.integrate(unit_square(), lambda x: x[:, 0], order=3)


def test_section_profile():
	geo = import_geometry()
	sq = unit_square()
	assert geo.section_profile(sq, 0.0, 0.5) == pytest.approx(1.0)
	assert geo.section_profile(sq, 0.0, 2.0) == 0.0
	assert geo.section_profile(sq, math.pi / 4, math.sqrt(2.0) / 2) == pytest.approx(math.sqrt(2.0))
	t = np.linspace(0.0, math.sqrt(2.0), 9)
	np.testing.assert_allclose(
		geo.section_profile(sq, math.pi / 4, t), np.minimum(2 * t, 2 * (math.sqrt(2.0) - t)), atol=1e-12
	)
	assert geo.profile_is_log_concave(sq, math.pi / 4)


def test_weights():
	geo = import_geometry()
	errors = import_errors()
	gaussian = geo.Weight("gaussian", {"c": 0.5, "center": [0.5, 0.3]})
	assert gaussian(np.array([[0.5, 0.3]]))[0] == pytest.approx(1.0)
	a = np.random.default_rng(0).normal(size=(100, 2))
	b = np.random.default_rng(1).normal(size=(100, 2))
	assert gaussian.log_concavity_check(a, b)
	assert geo.Weight("exp_linear", {"c": [1.0, -2.0]}).log_concavity_check(a, b)
	assert geo.Weight.from_dict(gaussian.to_dict()).to_dict() == gaussian.to_dict()
	with pytest.raises(errors.ConfigurationError):
		geo.Weight("gaussian", {"c": -1.0})
	with pytest.raises(errors.ConfigurationError):
		geo.Weight("cubic", {})


@pytest.mark.parametrize(
	"kind,params,axis,expected",
	[
		("ellipse", {"a": 1, "b": 2}, 0.0, 1.0),
		("ellipse", {"a": 1, "b": 2}, math.pi / 2, 0.5),
		("half_space_gauge", {"c": 2}, 0.0, 1.0),
		("euclidean", {}, 1.2, 1.0),
	],
)
def test_frame_constant(grid, kind, params, axis, expected):
	geo = import_geometry()
	an = import_anisotropy()
	assert geo.frame_constant(an.Anisotropy(kind, params), axis, grid) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize(
	"kind,params",
	[("ellipse", {"a": 1, "b": 2}), ("lq_norm", {"q": 3}), ("lq_norm", {"q": 1.5})],
)
@pytest.mark.parametrize("angle", [0.4, 2.1, -1.3])
def test_rotated_gauge_on_counter_rotated_domain_keeps_diameter(grid, kind, params, angle):
	geo = import_geometry()
	an = import_anisotropy()
	poly = geo.ConvexPolygon([[0, 0], [1.5, 0.2], [1.1, 0.9], [0.1, 0.7]])
	aniso = an.Anisotropy(kind, params)
	d = geo.anisotropic_diameter(poly, aniso, grid)
	turned = geo.anisotropic_diameter(poly.rotated(-angle), an.rotate(aniso, angle), grid)
	assert turned == pytest.approx(d, rel=1e-6)


def test_adaptive_integrate_exact_across_linear_kink():
	geo = import_geometry()

	def level(x):
		return x[:, 0] - 0.3

	value = geo.adaptive_integrate(unit_square(), lambda x: level(x) * np.abs(level(x)), 1e-12, level_set=level)
	assert value == pytest.approx((0.7**3 - 0.3**3) / 3.0, abs=1e-11)


def test_adaptive_integrate_square_root_singularity():
	geo = import_geometry()

	def level(x):
		return x[:, 0] - 0.3

	def f(x):
		s = level(x)
		return np.sign(s) * np.sqrt(np.abs(s))

	value = geo.adaptive_integrate(unit_square(), f, 1e-10, level_set=level)
	assert value == pytest.approx((0.7**1.5 - 0.3**1.5) / 1.5, abs=1e-9)


def test_adaptive_integrate_curved_zero_set():
	geo = import_geometry()
	disk = geo.wulff_shape(import_anisotropy().Anisotropy("euclidean"), 1.0, 256)

	def level(x):
		return np.sum(x * x, axis=1) - 0.25

	def f(x):
		return level(x) * np.abs(level(x))

	value = geo.adaptive_integrate(disk, f, 1e-10, level_set=level)
	assert value == pytest.approx(geo.adaptive_integrate(disk, f, 1e-12, level_set=level), abs=2e-10)
	# pi * integral of s|s| over [-1/4, 3/4] on the round disk
	assert value == pytest.approx(math.pi * (0.75**3 - 0.25**3) / 3.0, abs=1e-3)


def test_adaptive_integrate_budget():
	geo = import_geometry()
	errors = import_errors()
	with pytest.raises(errors.AccuracyError):
		geo.adaptive_integrate(unit_square(), lambda x: np.sqrt(np.abs(x[:, 0] - 0.3)), 1e-14, max_triangles=64)
