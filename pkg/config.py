import os
from dataclasses import dataclass


def _get_env(name: str, default: str) -> str:
    val = os.getenv(name)
    return val if val is not None and val != "" else default


def _parse_int(name: str, default: int) -> int:
    val = _get_env(name, str(default))
    try:
        return int(val)
    except Exception:
        return default


def _parse_float(name: str, default: float) -> float:
    val = _get_env(name, str(default))
    try:
        return float(val)
    except Exception:
        return default


@dataclass(frozen=True)
class Settings:
    app_env: str = "production"

    # Polar / direction grid
    polar_grid_size: int = 4096
    polar_refinements: int = 3
    polar_tol: float = 1e-6

    # Geometry tolerances (area and mesh tolerances are relative to the domain)
    area_tol: float = 1e-10
    mean_tol: float = 1e-8
    mesh_tol: float = 1e-9
    quadrature_order: int = 5
    quadrature_refine: int = 3
    wulff_vertices: int = 512

    # Solvers
    solver_slack: float = 0.02
    max_iter: int = 5000
    solver_tol: float = 1e-12
    seeds: int = 5
    seed: int = 0
    mesh_factor: float = 0.02
    max_triangles: int = 1_000_000
    grid_1d: int = 2000
    smoothing: float = 1e-6
    jobs: int = 1


def load() -> Settings:
    return Settings(
        app_env=_get_env("APP_ENV", "production"),
        polar_grid_size=_parse_int("POINCARE_POLAR_GRID", 4096),
        polar_refinements=_parse_int("POINCARE_POLAR_REFINEMENTS", 3),
        polar_tol=_parse_float("POINCARE_POLAR_TOL", 1e-6),
        area_tol=_parse_float("POINCARE_AREA_TOL", 1e-10),
        mean_tol=_parse_float("POINCARE_MEAN_TOL", 1e-8),
        mesh_tol=_parse_float("POINCARE_MESH_TOL", 1e-9),
        quadrature_order=_parse_int("POINCARE_QUAD_ORDER", 5),
        quadrature_refine=_parse_int("POINCARE_QUAD_REFINE", 3),
        wulff_vertices=_parse_int("POINCARE_WULFF_VERTICES", 512),
        solver_slack=_parse_float("POINCARE_SOLVER_SLACK", 0.02),
        max_iter=_parse_int("POINCARE_MAX_ITER", 5000),
        solver_tol=_parse_float("POINCARE_SOLVER_TOL", 1e-12),
        seeds=_parse_int("POINCARE_SEEDS", 5),
        seed=_parse_int("POINCARE_SEED", 0),
        mesh_factor=_parse_float("POINCARE_MESH_FACTOR", 0.02),
        max_triangles=_parse_int("POINCARE_MAX_TRIANGLES", 1_000_000),
        grid_1d=_parse_int("POINCARE_GRID_1D", 2000),
        smoothing=_parse_float("POINCARE_SMOOTHING", 1e-6),
        jobs=_parse_int("POINCARE_JOBS", 1),
    )


# Singleton settings for library usage (tests build their own via load())
settings: Settings = load()


def resolve(custom: Settings | None) -> Settings:
    return custom if custom is not None else settings
