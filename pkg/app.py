import argparse
import logging
import os
import sys

from .commands import create_commands
from .config import settings
from .errors import PoincareError

logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s %(levelname)s %(message)s",
)
log = logging.getLogger("poincare-bound")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poincare-bound",
        description="Weighted anisotropic Poincare constants on convex polygons and the diameter lower bound.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    create_commands(subparsers, settings)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    log.debug(
        "settings: polar_m=%d refinements=%d solver_slack=%g mesh_factor=%g",
        settings.polar_grid_size,
        settings.polar_refinements,
        settings.solver_slack,
        settings.mesh_factor,
    )
    try:
        return int(args.handler(args))
    except PoincareError as e:
        log.error("%s failed: %s", args.command, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
