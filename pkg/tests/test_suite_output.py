import csv
import importlib
import json
import math
import os
from typing import Any

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SQUARE = {"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
ELLIPSE = {"kind": "ellipse", "params": {"a": 1, "b": 2}}


def import_suite() -> Any:
	return importlib.import_module("poincare_bound.suite")


def import_output() -> Any:
	return importlib.import_module("poincare_bound.output")


def import_models() -> Any:
	return importlib.import_module("poincare_bound.models")


def import_errors() -> Any:
	return importlib.import_module("poincare_bound.errors")


def cheap_scenarios(n: int = 2) -> list:
	models = import_models()
	doc = [
		{"id": f"sq-{k}", "domain": SQUARE, "anisotropy": ELLIPSE, "p": 2, "mesh": {"h": 0.1}, "solver": {"seeds": 1}, "seed": k}
		for k in range(n)
	]
	return models.parse_config(json.dumps(doc))


def report(scenario_id: str = "sq", passed: bool = True) -> Any:
	return import_models().VerificationReport(
		scenario_id=scenario_id,
		mu_hat=9.9,
		pi_p=math.pi,
		d_h=1.118,
		d_euclid=1.414,
		h_polar_max=1.0,
		sharp_bound=7.9,
		naive_bound=4.9,
		ratio=1.25 if passed else 0.5,
		passed=passed,
		h=0.02,
		iterations=120,
		seed=0,
		slack=2.0,
	)


def test_empty_suite_passes():
	outcome = import_suite().run_suite([])
	assert outcome.reports == []
	assert outcome.exit_code == 0


def test_suite_keeps_config_order():
	suite = import_suite()
	scenarios = cheap_scenarios(3)
	outcome = suite.run_suite(scenarios, parallelism=3)
	assert [r.scenario_id for r in outcome.reports] == ["sq-0", "sq-1", "sq-2"]
	assert outcome.passed == 3
	assert outcome.exit_code == 0


def test_suite_is_deterministic():
	suite = import_suite()
	first = suite.run_suite(cheap_scenarios(1), parallelism=1)
	second = suite.run_suite(cheap_scenarios(1), parallelism=1)
	assert first.reports[0].mu_hat == second.reports[0].mu_hat


def test_failure_is_recorded_not_raised():
	suite = import_suite()
	conf = importlib.import_module("poincare_bound.config")
	outcome = suite.run_suite(cheap_scenarios(2), parallelism=2, settings=conf.Settings(max_triangles=10))
	assert outcome.reports == []
	assert [sid for sid, _ in outcome.failures] == ["sq-0", "sq-1"]
	assert all("BudgetError" in msg for _, msg in outcome.failures)
	assert outcome.exit_code == 1


def test_unexpected_exception_is_recorded(monkeypatch):
	suite = import_suite()

	def verify(scenario, settings):
		if scenario.scenario_id == "sq-0":
			raise FloatingPointError("overflow in exp")
		return report(scenario.scenario_id)

	monkeypatch.setattr(suite, "verify_bound", verify)
	outcome = suite.run_suite(cheap_scenarios(3), parallelism=2)
	assert [r.scenario_id for r in outcome.reports] == ["sq-1", "sq-2"]
	assert outcome.failures == [("sq-0", "FloatingPointError: overflow in exp")]
	assert outcome.exit_code == 1


def test_failing_report_sets_exit_code():
	suite = import_suite()
	outcome = suite.SuiteOutcome(reports=[report("a"), report("b", passed=False)])
	assert outcome.passed == 1
	assert outcome.exit_code == 1


def test_json_round_trip(tmp_path):
	output = import_output()
	reports = [report("a"), report("b", passed=False)]
	path = output.emit(reports, "json", str(tmp_path / "out" / "reports.json"))
	with open(path, encoding="utf-8") as f:
		assert output.reports_from_json(f.read()) == reports


def test_csv_layout(tmp_path):
	output = import_output()
	models = import_models()
	path = output.emit([report()], "csv", str(tmp_path / "reports.csv"))
	with open(path, encoding="utf-8") as f:
		lines = f.read().splitlines()
	assert len(lines) == 2
	header, row = list(csv.reader(lines))
	assert header == list(models.REPORT_FIELDS)
	assert row[header.index("pass")] == "true"
	assert float(row[header.index("mu_hat")]) == 9.9


def test_svg_figure_is_reproducible(tmp_path):
	output = import_output()
	models = import_models()
	doc = {"id": "wulff", "domain": {"type": "wulff", "anisotropy": ELLIPSE, "m": 64}, "anisotropy": ELLIPSE, "p": 2}
	scenarios = models.parse_config(json.dumps(doc))
	reports = [report("wulff")]
	a = output.emit(reports, "svg", str(tmp_path / "a.svg"), scenarios)
	b = output.emit(reports, "svg", str(tmp_path / "b.svg"), scenarios)
	with open(a, encoding="utf-8") as fa, open(b, encoding="utf-8") as fb:
		text = fa.read()
		assert text == fb.read()
	assert "D_E = 4.000" in text
	assert "D_H = 2.000" in text


def test_unknown_format_and_bad_path(tmp_path):
	output = import_output()
	errors = import_errors()
	with pytest.raises(errors.InvalidInputError):
		output.emit([report()], "xml", str(tmp_path / "r.xml"))
	with pytest.raises(errors.OutputError):
		output.emit([report()], "json", str(tmp_path))


def test_field_and_profile_writers(tmp_path):
	output = import_output()
	mesh_mod = importlib.import_module("poincare_bound.mesh")
	geo = importlib.import_module("poincare_bound.geometry")
	wirt = importlib.import_module("poincare_bound.wirtinger")
	mesh = mesh_mod.triangulate(geo.ConvexPolygon.rectangle(1.0, 1.0), 0.2)
	field = mesh_mod.Field2D.from_function(mesh, lambda x: x[:, 0])
	with open(output.write_field_csv(field, str(tmp_path / "u.csv")), encoding="utf-8") as f:
		assert len(f.read().splitlines()) == len(mesh.points) + 1
	assert output.write_field_svg(field, str(tmp_path / "u.svg"), "u").endswith("u.svg")

	grid = wirt.Grid1D(1.0, 32)
	profile = wirt.Profile1D(grid, grid.nodes)
	with open(output.write_profile_csv(profile, str(tmp_path / "p.csv")), encoding="utf-8") as f:
		assert f.readline().strip() == "t,u"


@pytest.mark.slow
def test_gallery_passes():
	suite = import_suite()
	models = import_models()
	with open(os.path.join(ROOT, "scenarios", "gallery.json"), encoding="utf-8") as f:
		scenarios = models.parse_config(f.read())
	assert len(scenarios) == 12
	outcome = suite.run_suite(scenarios, parallelism=4)
	assert outcome.failures == []
	assert len(outcome.reports) == 12
	for r in outcome.reports:
		assert r.naive_bound <= r.sharp_bound
		assert r.ratio >= 0.98
		assert r.passed
	assert outcome.exit_code == 0
