import importlib
import math
from typing import Any

import numpy as np
import pytest


def import_wirtinger() -> Any:
	return importlib.import_module("poincare_bound.wirtinger")


def import_errors() -> Any:
	return importlib.import_module("poincare_bound.errors")


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0, 4.0])
def test_pi_p_closed_form_matches_quadrature(p):
	wirt = import_wirtinger()
	assert abs(wirt.pi_p_closed(p) - wirt.pi_p_quadrature(p, 1e-10)) <= 1e-8


def test_pi_p_known_values():
	wirt = import_wirtinger()
	assert wirt.pi_p_closed(2.0) == pytest.approx(math.pi, rel=1e-15)
	assert wirt.pi_p_closed(3.0) == pytest.approx(3.046992, abs=1e-6)
	assert wirt.pi_p_quadrature(2.0) == pytest.approx(math.pi, abs=1e-9)


@pytest.mark.parametrize("p", [1.2, 1.5, 3.0, 7.0])
def test_pi_p_conjugate_symmetry(p):
	wirt = import_wirtinger()
	q = p / (p - 1.0)
	assert wirt.pi_p_closed(p) == pytest.approx(wirt.pi_p_closed(q), rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0, math.inf, math.nan])
def test_exponent_out_of_domain(p):
	wirt = import_wirtinger()
	errors = import_errors()
	with pytest.raises(errors.DomainError):
		wirt.pi_p_closed(p)
	with pytest.raises(errors.DomainError):
		wirt.pi_p_quadrature(p)


def test_grid_and_weight_validation():
	wirt = import_wirtinger()
	errors = import_errors()
	with pytest.raises(errors.InvalidInputError):
		wirt.Grid1D(1.0, 8)
	with pytest.raises(errors.InvalidInputError):
		wirt.Grid1D(0.0, 100)
	grid = wirt.Grid1D(1.0, 64)
	assert grid.trapezoid_weights.sum() == pytest.approx(1.0)
	bumpy = np.where(np.arange(64) % 2 == 0, 1.0, 2.0)
	with pytest.raises(errors.InvalidInputError):
		wirt.Weight1D(grid, bumpy, "section_induced")
	with pytest.raises(errors.InvalidInputError):
		wirt.Weight1D(grid, np.zeros(64), "constant")


def test_section_induced_weight_clamps_end_zeros():
	wirt = import_wirtinger()
	grid = wirt.Grid1D(1.0, 65)
	t = grid.nodes
	f = wirt.Weight1D.section_induced(grid, np.minimum(t, 1.0 - t), np.ones_like(t))
	assert np.all(f.values > 0.0)
	assert f.values[32] == pytest.approx(0.5)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_constraint_shift_zeroes_the_p_mean(p):
	wirt = import_wirtinger()
	grid = wirt.Grid1D(2.0, 200)
	f = wirt.Weight1D.gaussian(grid, 1.0, 0.7)
	u = wirt.Profile1D(grid, np.exp(grid.nodes))
	t = wirt.constraint_shift(u, f, p)
	w = u.values - t
	residual = np.sum(grid.trapezoid_weights * f.values * np.sign(w) * np.abs(w) ** (p - 1.0))
	assert abs(residual) <= 1e-9
	if p == 2.0:
		masses = grid.trapezoid_weights * f.values
		assert t == pytest.approx(np.dot(masses, u.values) / masses.sum())


def test_rayleigh_of_cosine():
	wirt = import_wirtinger()
	grid = wirt.Grid1D(1.0, 2000)
	f = wirt.Weight1D.constant(grid)
	u = wirt.Profile1D(grid, np.cos(math.pi * grid.nodes) + 3.0)
	assert wirt.rayleigh_1d(u, f, 2.0) == pytest.approx(math.pi**2, rel=1e-3)


def test_rayleigh_of_constant_is_degenerate():
	wirt = import_wirtinger()
	errors = import_errors()
	grid = wirt.Grid1D(1.0, 100)
	with pytest.raises(errors.DegenerateInputError):
		wirt.rayleigh_1d(wirt.Profile1D(grid, np.ones(100)), wirt.Weight1D.constant(grid), 2.0)


def discrete_neumann(n: int) -> float:
	h = 1.0 / (n - 1)
	return 4.0 / h**2 * math.sin(math.pi * h / 2.0) ** 2


@pytest.mark.parametrize("n", [200, 400])
def test_minimize_matches_discrete_eigenvalue(n):
	wirt = import_wirtinger()
	f = wirt.Weight1D.constant(wirt.Grid1D(1.0, n))
	res = wirt.minimize_1d(f, 2.0, seed=0, seeds=2)
	assert res.mu_hat == pytest.approx(discrete_neumann(n), rel=1e-5)
	assert res.bound == pytest.approx(math.pi**2)
	assert res.mu_hat / res.bound >= 0.98
	assert not res.best_effort
	assert len(res.start_values) == 2


def test_minimize_converges_at_second_order():
	wirt = import_wirtinger()
	errs = []
	for n in (101, 201):
		res = wirt.minimize_1d(wirt.Weight1D.constant(wirt.Grid1D(1.0, n)), 2.0, seed=0, seeds=1)
		errs.append(abs(res.mu_hat - math.pi**2))
	assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_minimizer_satisfies_constraint():
	wirt = import_wirtinger()
	f = wirt.Weight1D.exp_linear(wirt.Grid1D(1.0, 300), 1.5)
	res = wirt.minimize_1d(f, 3.0, seed=1, seeds=2)
	u = res.minimizer
	masses = u.grid.trapezoid_weights * f.values
	assert abs(np.dot(masses, np.sign(u.values) * np.abs(u.values) ** 2.0)) <= 1e-9 * np.max(np.abs(u.values)) ** 2


def test_exp_linear_weight_shifts_spectrum():
	wirt = import_wirtinger()
	f = wirt.Weight1D.exp_linear(wirt.Grid1D(1.0, 400), 2.0)
	res = wirt.minimize_1d(f, 2.0, seed=0, seeds=2)
	assert res.mu_hat == pytest.approx(math.pi**2 + 1.0, rel=1e-3)
	assert res.slack > 0.0


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_unweighted_minimum_is_pi_p(p):
	wirt = import_wirtinger()
	f = wirt.Weight1D.constant(wirt.Grid1D(1.0, 400))
	res = wirt.minimize_1d(f, p, seed=0, seeds=2)
	assert res.mu_hat == pytest.approx(wirt.pi_p_closed(p) ** p, rel=2e-2)


def test_log_concave_weights_respect_bound():
	wirt = import_wirtinger()
	grid = wirt.Grid1D(2.0, 300)
	for f in (wirt.Weight1D.gaussian(grid, 2.0, 0.5), wirt.Weight1D.exp_linear(grid, -3.0)):
		res = wirt.minimize_1d(f, 2.0, seed=0, seeds=2)
		assert res.mu_hat >= res.bound * 0.98


def test_unconverged_start_marks_best_effort(monkeypatch):
	wirt = import_wirtinger()
	real = wirt.minimize
	calls = []

	def second_start_stalls(*args, **kwargs):
		res = real(*args, **kwargs)
		calls.append(res)
		if len(calls) == 2:
			res.success = False
			res.nit = kwargs["options"]["maxiter"]
			res.fun = res.fun + 1.0
		return res

	monkeypatch.setattr(wirt, "minimize", second_start_stalls)
	res = wirt.minimize_1d(wirt.Weight1D.constant(wirt.Grid1D(1.0, 100)), 2.0, seeds=3)
	assert len(calls) == 3
	assert not res.converged
	assert res.best_effort
	assert res.mu_hat == pytest.approx(math.pi**2, rel=1e-2)
