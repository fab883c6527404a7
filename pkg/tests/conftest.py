import importlib.util
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# The repository root is the package; register it under its import name so
# tests can run from a checkout whatever the directory is called.
if "poincare_bound" not in sys.modules:
	spec = importlib.util.spec_from_file_location(
		"poincare_bound",
		os.path.join(ROOT, "__init__.py"),
		submodule_search_locations=[ROOT],
	)
	assert spec and spec.loader
	module = importlib.util.module_from_spec(spec)
	sys.modules["poincare_bound"] = module
	spec.loader.exec_module(module)

os.environ.setdefault("APP_ENV", "test")
os.environ.setdefault("MPLBACKEND", "Agg")
