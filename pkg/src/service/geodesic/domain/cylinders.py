"""Maximal cylinders swept out around a closed regular geodesic."""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import TracingError
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment, trace_ray

logger = logging.getLogger(__name__)


class CylinderData(BaseModel):
    """Maximal flat cylinder containing a closed regular geodesic.

    `offset` is the signed normal distance from the swept line to the middle of the
    cylinder. Boundary lengths list the saddle connections on each boundary component
    in the order they are met along the core.
    """

    model_config = ConfigDict(frozen=True)

    width: float
    circumference: float
    offset: float
    top_lengths: tuple[float, ...]
    bottom_lengths: tuple[float, ...]


def rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


def rot270(v: np.ndarray) -> np.ndarray:
    return np.array([v[1], -v[0]])


def trace_closed(
    surface: HalfTranslationSurface, start: SurfacePoint, direction: np.ndarray, length: float
) -> TracedSegment:
    """Trace a line that must close up after `length` without meeting a cone point."""
    trace = trace_ray(surface, start, direction, length)
    eps = 1e3 * settings.GEOMETRY_EPSILON * max(1.0, length)
    if trace.hit is not None:
        error_msg = f"Closed line from {start} meets cone point {trace.hit.vertex}"
        raise TracingError(error_msg)
    end = trace.end
    if end.triangle != start.triangle or np.hypot(end.x - start.x, end.y - start.y) > eps:
        # the closing point may sit on an edge and be reported in the neighbouring chart
        pos = start.as_array()
        matched = False
        for e in range(3):
            u, _, sigma, c = surface.transition(start.triangle, e)
            if u == end.triangle and np.hypot(*(sigma * pos + c - end.as_array())) <= eps:
                matched = True
        if not matched:
            error_msg = f"Line from {start} of length {length:.9g} does not close up"
            raise TracingError(error_msg)
    return trace


def _boundary_lengths(along: list[float], circumference: float) -> tuple[float, ...]:
    marks = sorted({round(a % circumference, 9) % round(circumference, 9) for a in along})
    if len(marks) <= 1:
        return (circumference,)
    gaps = [b - a for a, b in zip(marks, marks[1:], strict=False)]
    gaps.append(circumference - marks[-1] + marks[0])
    return tuple(float(g) for g in gaps)


def sweep_cylinder(
    surface: HalfTranslationSurface,
    start: SurfacePoint,
    direction: np.ndarray,
    circumference: float,
) -> tuple[CylinderData, TracedSegment]:
    """Sweep the closed line through `start` sideways until cone points stop it.

    Every cone point on the boundary of the cylinder is a corner of some triangle the
    line crosses, so the nearest corners on both sides of the developed line give the
    width.

    Args:
        surface (HalfTranslationSurface): Surface to sweep on.
        start (SurfacePoint): Point of a closed regular geodesic.
        direction (np.ndarray): Direction of the geodesic in the chart of `start`.
        circumference (float): Length of the closed geodesic.

    Returns:
        tuple: The cylinder record and the closed geodesic through its middle.
    """
    u = np.asarray(direction, dtype=float)
    u = u / np.hypot(*u)
    n = rot90(u)
    core = trace_closed(surface, start, u, circumference)
    origin = start.as_array()
    eps = 100.0 * settings.GEOMETRY_EPSILON * max(1.0, circumference)
    above: list[tuple[float, float]] = []
    below: list[tuple[float, float]] = []
    for piece in core.pieces:
        step = piece.end - piece.start
        if np.hypot(*step) <= settings.GEOMETRY_EPSILON:
            continue
        sigma = 1 if float(step @ u) > 0.0 else -1
        shift = origin + piece.s0 * u - sigma * piece.start
        for corner in surface.positions[piece.triangle]:
            rel = sigma * corner + shift - origin
            along, offset = float(rel @ u), float(rel @ n)
            if abs(offset) <= eps:
                error_msg = f"Line from {start} passes through a cone point"
                raise TracingError(error_msg)
            (above if offset > 0.0 else below).append((along, offset))
    if not above or not below:
        error_msg = "Swept line is not bounded by cone points on both sides"
        raise TracingError(error_msg)
    top = min(offset for _, offset in above)
    bottom = max(offset for _, offset in below)
    top_along = [a for a, offset in above if offset - top <= eps]
    bottom_along = [a for a, offset in below if bottom - offset <= eps]
    middle = 0.5 * (top + bottom)
    if abs(middle) <= eps:
        representative, middle = core, 0.0
    else:
        normal = n if middle > 0.0 else -n
        shift_trace = trace_ray(surface, start, normal, abs(middle))
        if shift_trace.hit is not None:  # pragma: no cover - the cylinder is vertex free
            error_msg = "Normal shift to the middle of the cylinder met a cone point"
            raise TracingError(error_msg)
        end_normal = np.array(shift_trace.end_direction)
        u_end = rot270(end_normal) if middle > 0.0 else rot90(end_normal)
        representative = trace_closed(surface, shift_trace.end, u_end, circumference)
    data = CylinderData(
        width=top - bottom,
        circumference=circumference,
        offset=middle,
        top_lengths=_boundary_lengths(top_along, circumference),
        bottom_lengths=_boundary_lengths(bottom_along, circumference),
    )
    logger.debug(
        "Cylinder of circumference %.9g and width %.9g (shift %.3g)",
        circumference,
        data.width,
        middle,
    )
    return data, representative
