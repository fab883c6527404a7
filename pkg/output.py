"""
Report and artifact writers: JSON, CSV and SVG figures.

Figures use the Agg backend with text kept as SVG text and no timestamp, so
repeated runs write identical files.
"""

import csv
import json
import logging
import os
from typing import Any, Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402
from scipy.spatial.distance import pdist, squareform  # noqa: E402

from .anisotropy import DirectionGrid  # noqa: E402
from .config import Settings, resolve  # noqa: E402
from .errors import InvalidInputError, OutputError  # noqa: E402
from .geometry import anisotropic_diameter_pair  # noqa: E402
from .mesh import Field2D  # noqa: E402
from .models import REPORT_FIELDS, Scenario, VerificationReport  # noqa: E402
from .slicing import SlicePiece  # noqa: E402
from .wirtinger import Profile1D  # noqa: E402

log = logging.getLogger("poincare-bound")

FORMATS = ("json", "csv", "svg")

plt.rcParams.update({"svg.fonttype": "none", "svg.hashsalt": "poincare-bound", "font.size": 9})


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _save(fig: Any, path: str) -> None:
    try:
        _ensure_parent(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    finally:
        plt.close(fig)


def _write_text(path: str, text: str) -> None:
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def _write_rows(path: str, header: list[str], rows: Iterable[Iterable[Any]]) -> None:
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, delimiter=",", lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(list(row))
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


# --- reports --------------------------------------------------------------------


def reports_to_json(reports: list[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def reports_from_json(text: str) -> list[VerificationReport]:
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise InvalidInputError("report document must be a JSON array")
    return [VerificationReport.from_dict(d) for d in doc]


def _csv_cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def _chords_axis(ax: Any, scenario: Scenario, grid: DirectionGrid) -> None:
    v = scenario.polygon.vertices
    closed = np.vstack([v, v[:1]])
    ax.plot(closed[:, 0], closed[:, 1], color="black", linewidth=0.8)

    dist = squareform(pdist(v))
    i, j = np.unravel_index(int(np.argmax(dist)), dist.shape)
    d_e = float(dist[i, j])
    ax.plot(*zip(v[i], v[j]), color="tab:blue", linewidth=1.2, label=f"D_E = {d_e:.3f}")

    d_h, a, b = anisotropic_diameter_pair(scenario.polygon, scenario.anisotropy, grid)
    ax.plot(*zip(v[a], v[b]), color="tab:red", linewidth=1.2, linestyle="--", label=f"D_H = {d_h:.3f}")
    ax.set_aspect("equal")
    ax.set_title(scenario.scenario_id)
    ax.legend(loc="upper right", frameon=False)


def reports_figure(
    reports: list[VerificationReport],
    scenarios: list[Scenario] | None = None,
    settings: Settings | None = None,
) -> Any:
    """Bar chart of mu_hat / sharp bound, plus domain and chords for Wulff scenarios."""
    wulff = [sc for sc in scenarios or [] if sc.domain.get("type") == "wulff"]
    fig, axes = plt.subplots(1, 1 + len(wulff), figsize=(6 + 4 * len(wulff), 4), squeeze=False)
    ax = axes[0, 0]
    ids = [r.scenario_id for r in reports]
    colors = ["tab:green" if r.passed else "tab:red" for r in reports]
    ax.bar(np.arange(len(reports)), [r.ratio for r in reports], color=colors)
    ax.axhline(1.0, color="black", linewidth=0.8)
    ax.set_xticks(np.arange(len(reports)))
    ax.set_xticklabels(ids, rotation=60, ha="right")
    ax.set_ylabel("mu_hat / (pi_p / D_H)^p")

    grid = DirectionGrid.from_settings(settings)
    for k, sc in enumerate(wulff):
        _chords_axis(axes[0, k + 1], sc, grid)
    fig.tight_layout()
    return fig


def emit(
    reports: list[VerificationReport],
    fmt: str,
    path: str,
    scenarios: list[Scenario] | None = None,
    settings: Settings | None = None,
) -> str:
    if fmt not in FORMATS:
        raise InvalidInputError(f"unknown output format '{fmt}', expected one of: {', '.join(FORMATS)}")
    if fmt == "json":
        _write_text(path, reports_to_json(reports))
    elif fmt == "csv":
        rows = ([_csv_cell(r.to_dict()[k]) for k in REPORT_FIELDS] for r in reports)
        _write_rows(path, list(REPORT_FIELDS), rows)
    else:
        _save(reports_figure(reports, scenarios, resolve(settings)), path)
    log.info("wrote %d reports as %s to %s", len(reports), fmt, path)
    return path


# --- fields, profiles, slices ---------------------------------------------------


def write_field_csv(field: Field2D, path: str) -> str:
    pts = field.mesh.points
    _write_rows(path, ["x", "y", "u"], ((repr(float(x)), repr(float(y)), repr(float(u))) for (x, y), u in zip(pts, field.values)))
    return path


def write_field_svg(field: Field2D, path: str, title: str = "") -> str:
    mesh = field.mesh
    tri = Triangulation(mesh.points[:, 0], mesh.points[:, 1], mesh.triangles)
    fig, ax = plt.subplots(figsize=(5, 4))
    art = ax.tripcolor(tri, field.values, shading="gouraud", cmap="coolwarm")
    fig.colorbar(art, ax=ax)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    _save(fig, path)
    return path


def write_profile_csv(profile: Profile1D, path: str) -> str:
    rows = ((repr(float(t)), repr(float(u))) for t, u in zip(profile.grid.nodes, profile.values))
    _write_rows(path, ["t", "u"], rows)
    return path


def write_pieces_json(pieces: list[SlicePiece], path: str) -> str:
    _write_text(path, json.dumps([pc.to_dict() for pc in pieces], indent=2) + "\n")
    return path


def write_pieces_svg(pieces: list[SlicePiece], path: str) -> str:
    """One outline per piece, stroke colored by depth."""
    fig, ax = plt.subplots(figsize=(5, 5))
    depths = np.array([pc.depth for pc in pieces], dtype=float)
    cmap = plt.get_cmap("viridis")
    top = max(depths.max(), 1.0) if len(depths) else 1.0
    coll = PolyCollection(
        [pc.polygon.vertices for pc in pieces],
        facecolors="none",
        edgecolors=[cmap(d / top) for d in depths],
        linewidths=0.8,
    )
    ax.add_collection(coll)
    ax.autoscale_view()
    ax.set_aspect("equal")
    ax.set_title(f"{len(pieces)} pieces")
    _save(fig, path)
    return path


def write_polygon_json(vertices: list[list[float]], path: str) -> str:
    _write_text(path, json.dumps(vertices) + "\n")
    return path
