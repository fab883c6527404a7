import argparse
import json
import logging
import math
import os
from dataclasses import replace
from typing import Any, Callable

import numpy as np

from .anisotropy import Anisotropy, DirectionGrid, bipolar, max_polar, polar, polar_closed
from .config import Settings
from .eigensolver import minimize_nd
from .errors import InvalidInputError
from .geometry import (
    ConvexPolygon,
    Weight,
    anisotropic_diameter,
    anisotropic_diameter_pair,
    euclidean_diameter,
    wulff_shape,
)
from .models import Scenario, parse_config
from .output import (
    FORMATS,
    emit,
    write_field_csv,
    write_field_svg,
    write_pieces_json,
    write_pieces_svg,
    write_polygon_json,
    write_profile_csv,
)
from .slicing import piece_estimates, slice_decomposition, zero_mean_field
from .suite import run_suite
from .wirtinger import Grid1D, Weight1D, minimize_1d, pi_p_closed, pi_p_quadrature

log = logging.getLogger("poincare-bound")

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")
GALLERY = os.path.join(SCENARIO_DIR, "gallery.json")
EXAMPLE = os.path.join(SCENARIO_DIR, "example_paper.json")

SLICE_FIELDS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda x: x[..., 0],
    "diagonal": lambda x: x[..., 0] + 0.5 * x[..., 1],
    "cosine": lambda x: np.cos(math.pi * x[..., 0]) + 0.3 * np.sin(math.pi * x[..., 1]),
}


def _json_arg(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e}") from e


def _scenarios(path: str | None, settings: Settings, seed: int | None) -> list[Scenario]:
    scenarios = parse_config(_read(path or GALLERY), settings)
    if seed is not None:
        scenarios = [replace(sc, seed=seed) for sc in scenarios]
    return scenarios


def _print(obj: Any) -> None:
    print(json.dumps(obj, indent=2))


def create_commands(subparsers: Any, settings: Settings) -> None:
    """Register every verb on an argparse subparsers object; handlers return exit codes."""

    def with_seed(args: argparse.Namespace) -> Settings:
        return replace(settings, seed=args.seed) if getattr(args, "seed", None) is not None else settings

    # pi-p
    def pi_p(args: argparse.Namespace) -> int:
        closed = pi_p_closed(args.p)
        quad = pi_p_quadrature(args.p, args.tol)
        _print({"p": args.p, "closed": closed, "quadrature": quad, "difference": abs(closed - quad)})
        return 0

    sp = subparsers.add_parser("pi-p", help="pi_p by closed form and by quadrature")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(handler=pi_p)

    # polar
    def polar_cmd(args: argparse.Namespace) -> int:
        aniso = Anisotropy.from_dict(args.anisotropy)
        grid = DirectionGrid.from_settings(settings)
        eta = np.array(args.eta, dtype=float)
        closed = polar_closed(aniso, eta)
        _print(
            {
                "anisotropy": aniso.to_dict(),
                "eta": eta.tolist(),
                "polar": polar(aniso, eta, grid),
                "polar_closed": closed,
                "bipolar": bipolar(aniso, eta, grid),
                "max_polar": max_polar(aniso, grid),
            }
        )
        return 0

    sp = subparsers.add_parser("polar", help="polar and bipolar of a gauge at a vector")
    sp.add_argument("--anisotropy", type=_json_arg, required=True, help='e.g. {"kind": "ellipse", "params": {"a": 1, "b": 2}}')
    sp.add_argument("--eta", type=float, nargs=2, required=True)
    sp.set_defaults(handler=polar_cmd)

    # diameter
    def diameter(args: argparse.Namespace) -> int:
        grid = DirectionGrid.from_settings(settings)
        rows = []
        for sc in _scenarios(args.config, settings, None):
            d_h, i, j = anisotropic_diameter_pair(sc.polygon, sc.anisotropy, grid)
            rows.append(
                {
                    "scenario_id": sc.scenario_id,
                    "d_euclid": euclidean_diameter(sc.polygon),
                    "d_h": d_h,
                    "pair": [i, j],
                    "h_polar_max": max_polar(sc.anisotropy, grid),
                }
            )
        _print(rows)
        return 0

    sp = subparsers.add_parser("diameter", help="Euclidean and anisotropic diameters of configured domains")
    sp.add_argument("--config", help="scenario document (default: bundled gallery)")
    sp.set_defaults(handler=diameter)

    # wulff
    def wulff(args: argparse.Namespace) -> int:
        aniso = Anisotropy.from_dict(args.anisotropy)
        grid = DirectionGrid.from_settings(settings)
        poly = wulff_shape(aniso, args.R, args.m, grid)
        d_h, _, _ = anisotropic_diameter_pair(poly, aniso, grid)
        _print({"area": poly.area, "d_euclid": euclidean_diameter(poly), "d_h": d_h, "vertices": len(poly.vertices)})
        if args.out:
            write_polygon_json(poly.to_list(), args.out)
        return 0

    sp = subparsers.add_parser("wulff", help="Wulff polygon {H° < R}")
    sp.add_argument("--anisotropy", type=_json_arg, required=True)
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=settings.wulff_vertices)
    sp.add_argument("--out", help="write vertices as JSON")
    sp.set_defaults(handler=wulff)

    # slice
    def slice_cmd(args: argparse.Namespace) -> int:
        poly = ConvexPolygon.from_points(args.vertices) if args.vertices else ConvexPolygon.rectangle(1.0, 1.0)
        weight = Weight.from_dict(args.weight) if args.weight else Weight()
        aniso = Anisotropy.from_dict(args.anisotropy) if args.anisotropy else Anisotropy("euclidean")
        grid = DirectionGrid.from_settings(settings)
        u = zero_mean_field(poly, SLICE_FIELDS[args.field], weight, args.p, settings)
        pieces = slice_decomposition(poly, u, weight, args.p, args.eps, args.max_depth, settings)
        d_h = anisotropic_diameter(poly, aniso, grid)
        estimates = piece_estimates(pieces, aniso, weight, args.p, grid, args.n, settings)
        _print(
            {
                "pieces": len(pieces),
                "max_depth": max(pc.depth for pc in pieces),
                "max_half_width": max(pc.half_width for pc in pieces),
                "max_residual": max(abs(pc.p_mean_residual) for pc in pieces),
                "area": sum(pc.polygon.area for pc in pieces),
                "d_h": d_h,
                "max_chord_polar": max(e.chord_polar for e in estimates),
                "min_ratio_1d": min(e.ratio_1d for e in estimates),
                "per_piece": [e.to_dict() for e in estimates],
            }
        )
        if args.out:
            (write_pieces_svg if args.format == "svg" else write_pieces_json)(pieces, args.out)
        return 0

    sp = subparsers.add_parser("slice", help="zero-mean slicing of a polygon into thin pieces")
    sp.add_argument("--vertices", type=_json_arg, help="polygon as [[x, y], ...] (default: unit square)")
    sp.add_argument("--weight", type=_json_arg)
    sp.add_argument("--anisotropy", type=_json_arg, help="gauge for the per-piece chord check (default: euclidean)")
    sp.add_argument("--field", choices=sorted(SLICE_FIELDS), default="cosine")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--max-depth", type=int, default=12, dest="max_depth")
    sp.add_argument("--n", type=int, default=200, help="grid points of each reduced 1-D problem")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=["json", "svg"], default="json")
    sp.set_defaults(handler=slice_cmd)

    # solve-1d
    def solve_1d(args: argparse.Namespace) -> int:
        grid = Grid1D(args.L, args.n or settings.grid_1d)
        if args.weight == "exp_linear":
            f = Weight1D.exp_linear(grid, args.c)
        elif args.weight == "gaussian":
            f = Weight1D.gaussian(grid, args.c, args.center)
        else:
            f = Weight1D.constant(grid)
        res = minimize_1d(f, args.p, seed=args.seed, settings=settings)
        _print(
            {
                "mu_hat": res.mu_hat,
                "bound": res.bound,
                "ratio": res.mu_hat / res.bound,
                "slack": res.slack,
                "iterations": res.iterations,
                "best_effort": res.best_effort,
            }
        )
        if args.out:
            write_profile_csv(res.minimizer, args.out)
        return 0

    sp = subparsers.add_parser("solve-1d", help="weighted 1-D p-Wirtinger constant")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--L", type=float, default=1.0)
    sp.add_argument("--n", type=int)
    sp.add_argument("--weight", choices=["constant", "exp_linear", "gaussian"], default="constant")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--center", type=float, default=0.0)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="minimizer profile CSV (t, u)")
    sp.set_defaults(handler=solve_1d)

    # solve-2d
    def solve_2d(args: argparse.Namespace) -> int:
        s = with_seed(args)
        rows = []
        for sc in _scenarios(args.config, s, args.seed):
            res = minimize_nd(sc, s)
            rows.append(
                {
                    "scenario_id": sc.scenario_id,
                    "mu_hat": res.mu_hat,
                    "iterations": res.iterations,
                    "slack": res.slack,
                    "best_effort": res.best_effort,
                }
            )
            if args.out:
                stem, _ = os.path.splitext(args.out)
                target = f"{stem}-{sc.scenario_id}.{args.format}"
                if args.format == "svg":
                    write_field_svg(res.minimizer, target, sc.scenario_id)
                else:
                    write_field_csv(res.minimizer, target)
        _print(rows)
        return 0

    sp = subparsers.add_parser("solve-2d", help="minimize the anisotropic Rayleigh quotient")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="minimizer path stem; one file per scenario")
    sp.add_argument("--format", choices=["csv", "svg"], default="csv")
    sp.set_defaults(handler=solve_2d)

    # verify
    def verify(args: argparse.Namespace) -> int:
        s = with_seed(args)
        scenarios = _scenarios(args.config, s, args.seed)
        outcome = run_suite(scenarios, args.jobs, s)
        if args.out:
            emit(outcome.reports, args.format, args.out, scenarios, s)
        else:
            _print([r.to_dict() for r in outcome.reports])
        for sid, msg in outcome.failures:
            log.error("scenario %s did not run: %s", sid, msg)
        return outcome.exit_code

    sp = subparsers.add_parser("verify", help="check mu >= (pi_p / D_H)^p on configured scenarios")
    sp.add_argument("--config", help="scenario document (default: bundled gallery)")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=list(FORMATS), default="json")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int, default=settings.jobs)
    sp.set_defaults(handler=verify)

    # example-paper
    def example(args: argparse.Namespace) -> int:
        s = with_seed(args)
        scenarios = _scenarios(EXAMPLE, s, args.seed)
        outcome = run_suite(scenarios, 1, s)
        for r in outcome.reports:
            _print(
                {
                    "scenario_id": r.scenario_id,
                    "d_euclid": r.d_euclid,
                    "d_h": r.d_h,
                    "h_polar_max": r.h_polar_max,
                    "naive_product": r.d_euclid * r.h_polar_max,
                    "sharp_bound": r.sharp_bound,
                    "naive_bound": r.naive_bound,
                    "mu_hat": r.mu_hat,
                    "ratio": r.ratio,
                    "pass": r.passed,
                }
            )
        if args.out:
            emit(outcome.reports, args.format, args.out, scenarios, s)
        return outcome.exit_code

    sp = subparsers.add_parser("example-paper", help="Wulff shape of an ellipse gauge, end to end")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=list(FORMATS), default="svg")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(handler=example)
