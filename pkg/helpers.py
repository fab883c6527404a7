import logging
import math
from typing import Any, Iterable

import numpy as np

log = logging.getLogger("poincare-bound")


def validate_exponent(p: float | str | None) -> tuple[bool, str | None]:
    """
    Validate the Lebesgue exponent p is a finite number strictly above 1.
    Returns (is_valid, error_message).
    """
    if p is None:
        return False, "Exponent p cannot be None"

    try:
        p_float = float(p)
    except (ValueError, TypeError):
        return False, f"Exponent p must be a valid number, got: {p}"

    if not math.isfinite(p_float) or p_float <= 1.0:
        return False, f"Exponent p must be a finite number > 1, got: {p_float}"

    return True, None


def validate_positive(
    value: float | str | None, field_name: str = "value"
) -> tuple[bool, str | None]:
    if value is None:
        return False, f"{field_name} cannot be None"

    try:
        value_float = float(value)
    except (ValueError, TypeError):
        return False, f"{field_name} must be a valid number, got: {value}"

    if not math.isfinite(value_float) or value_float <= 0.0:
        return False, f"{field_name} must be a finite positive number, got: {value_float}"

    return True, None


def validate_finite_vector(
    xi: Any, field_name: str = "vector"
) -> tuple[bool, str | None]:
    try:
        arr = np.asarray(xi, dtype=float)
    except (ValueError, TypeError):
        return False, f"{field_name} must be numeric, got: {xi!r}"

    if arr.ndim == 0 or arr.shape[-1] != 2:
        return False, f"{field_name} must have trailing dimension 2, got shape {arr.shape}"

    if not np.all(np.isfinite(arr)):
        return False, f"{field_name} has non-finite components"

    return True, None


def validate_polygon_vertices(vertices: Any) -> tuple[bool, str | None]:
    """
    Validate a counterclockwise convex vertex list:
    - at least 3 finite 2-D points
    - every turn is left (cross products > -1e-12 * scale^2)
    - nonzero area
    Returns (is_valid, error_message).
    """
    ok, err = validate_finite_vector(vertices, "vertices")
    if not ok:
        return False, err

    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or len(v) < 3:
        return False, f"polygon needs at least 3 vertices, got: {len(v) if v.ndim == 2 else 0}"

    scale = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
    if scale == 0.0:
        return False, "polygon vertices are all identical"

    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if np.any(cross < -1e-12 * scale * scale):
        worst = int(np.argmin(cross))
        return False, f"polygon is not convex counterclockwise at vertex {(worst + 1) % len(v)}"

    area = 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
    if area <= 1e-14 * scale * scale:
        return False, f"polygon has zero or negative area: {area}"

    return True, None


def validate_kind(
    kind: Any, allowed: Iterable[str], field_name: str = "kind"
) -> tuple[bool, str | None]:
    allowed = tuple(allowed)
    if not isinstance(kind, str) or kind == "":
        return False, f"{field_name} must be a non-empty string"

    if kind not in allowed:
        return False, f"unknown {field_name} '{kind}', expected one of: {', '.join(allowed)}"

    return True, None


def direction(angle: float | np.ndarray) -> np.ndarray:
    """Unit vector(s) (cos, sin) for the given angle(s); trailing axis has length 2."""
    angle = np.asarray(angle, dtype=float)
    return np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def is_log_concave(values: np.ndarray, tol: float = 1e-10) -> bool:
    """
    Midpoint test on consecutive triples of an equispaced sample:
    log v[i] >= (log v[i-1] + log v[i+1]) / 2 - tol. Non-positive samples fail.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return True
    if np.any(values <= 0.0):
        return False
    logs = np.log(values)
    return bool(np.all(logs[1:-1] >= 0.5 * (logs[:-2] + logs[2:]) - tol))
