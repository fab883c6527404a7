import importlib
import math
from typing import Any

import numpy as np
import pytest


def import_mesh() -> Any:
	return importlib.import_module("poincare_bound.mesh")


def import_geometry() -> Any:
	return importlib.import_module("poincare_bound.geometry")


def import_errors() -> Any:
	return importlib.import_module("poincare_bound.errors")


def jittered_polygon(n: int, seed: int):
	"""A regular n-gon of radius 1 with a little radial and angular noise."""
	rng = np.random.default_rng(seed)
	theta = 2.0 * math.pi * (np.arange(n) + rng.uniform(-0.05, 0.05, n)) / n
	radius = 1.0 + rng.uniform(-0.05, 0.05, n)
	return import_geometry().ConvexPolygon(np.column_stack([radius * np.cos(theta), radius * np.sin(theta)]))


def test_unit_square_area():
	mesh_mod = import_mesh()
	sq = import_geometry().ConvexPolygon.rectangle(1.0, 1.0)
	mesh = mesh_mod.triangulate(sq, 0.1)
	assert mesh.total_area == pytest.approx(1.0, abs=1e-9)
	assert np.all(mesh.signed_double_areas > 0.0)
	assert mesh.node_masses.sum() == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_min_angle_on_jittered_polygons(seed):
	mesh_mod = import_mesh()
	poly = jittered_polygon(5 + seed % 2, seed)
	mesh = mesh_mod.triangulate(poly, 0.1)
	assert mesh.total_area == pytest.approx(poly.area, rel=1e-9)
	assert mesh.min_angle() >= 20.0


def test_min_angle_on_square():
	mesh_mod = import_mesh()
	mesh = mesh_mod.triangulate(import_geometry().ConvexPolygon.rectangle(1.0, 1.0), 0.05)
	assert mesh.min_angle() >= 20.0


def test_halving_h_quadruples_triangles():
	mesh_mod = import_mesh()
	sq = import_geometry().ConvexPolygon.rectangle(1.0, 1.0)
	coarse = mesh_mod.triangulate(sq, 0.05)
	fine = mesh_mod.triangulate(sq, 0.025)
	assert 3.5 <= len(fine.triangles) / len(coarse.triangles) <= 4.5


def test_budget_exceeded():
	mesh_mod = import_mesh()
	errors = import_errors()
	with pytest.raises(errors.BudgetError):
		mesh_mod.triangulate(import_geometry().ConvexPolygon.rectangle(1.0, 1.0), 1e-4)
	with pytest.raises(errors.InvalidInputError):
		mesh_mod.triangulate(import_geometry().ConvexPolygon.rectangle(1.0, 1.0), 0.0)


def test_gradient_of_linear_field_is_exact():
	mesh_mod = import_mesh()
	mesh = mesh_mod.triangulate(jittered_polygon(6, 3), 0.1)
	field = mesh_mod.Field2D.from_function(mesh, lambda x: 3.0 * x[:, 0] - 2.0 * x[:, 1])
	grads = mesh_mod.gradient_pw(field)
	np.testing.assert_allclose(grads, np.tile([3.0, -2.0], (len(mesh.triangles), 1)), atol=1e-9)


def test_gradient_of_quadratic_is_first_order():
	mesh_mod = import_mesh()
	h = 0.05
	mesh = mesh_mod.triangulate(import_geometry().ConvexPolygon.rectangle(1.0, 1.0), h)
	field = mesh_mod.Field2D.from_function(mesh, lambda x: x[:, 0] ** 2)
	grads = mesh_mod.gradient_pw(field)
	assert np.max(np.abs(grads[:, 0] - 2.0 * mesh.centroids[:, 0])) <= 5.0 * h
	assert np.max(np.abs(grads[:, 1])) <= 5.0 * h


def test_degenerate_triangle_detected():
	mesh_mod = import_mesh()
	errors = import_errors()
	flat = mesh_mod.TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), np.array([[0, 1, 2]]), 1.0)
	field = mesh_mod.Field2D(flat, np.array([0.0, 1.0, 2.0]))
	with pytest.raises(errors.InvariantViolationError):
		mesh_mod.gradient_pw(field)


def test_field_shape_checked():
	mesh_mod = import_mesh()
	errors = import_errors()
	mesh = mesh_mod.triangulate(import_geometry().ConvexPolygon.rectangle(1.0, 1.0), 0.2)
	with pytest.raises(errors.InvalidInputError):
		mesh_mod.Field2D(mesh, np.zeros(len(mesh.points) + 1))
