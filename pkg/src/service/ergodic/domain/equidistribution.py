"""Equidistribution of long horizontal segments against bump functions."""

import logging
import math

import numpy as np
from pydantic import BaseModel

from src.core.config import settings
from src.service.collar.domain.bump import BumpFunction
from src.service.collar.domain.quadrature import integrate_segment, integrate_surface
from src.service.exceptions import PreconditionError
from src.service.surface.domain.surface_core import HalfTranslationSurface, cross
from src.service.surface.domain.tracing import SurfacePoint, trace_ray

logger = logging.getLogger(__name__)

AREA_TOLERANCE = 1e-6


class EquidistributionReport(BaseModel):
    """|integral of phi along gamma - A e^T integral of phi dA| for one segment."""

    horizon: float
    scale: float
    length: float
    segment_integral: float
    area_integral: float
    error: float
    normalized_error: float


def check_unit_area(surface: HalfTranslationSurface) -> None:
    if abs(surface.area - 1.0) > AREA_TOLERANCE:
        error_msg = f"Surface {surface.name} has area {surface.area:.9g}, not 1"
        raise PreconditionError(error_msg)


def random_points(
    surface: HalfTranslationSurface, count: int, seed: int | None = None
) -> list[SurfacePoint]:
    """Points distributed uniformly for the flat area, away from the triangle boundaries."""
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
    areas = np.abs([cross(e[0], e[1]) for e in surface.edges])
    triangles = rng.choice(surface.n_triangles, size=count, p=areas / areas.sum())
    points = []
    for t in triangles:
        a, b = rng.uniform(0.02, 0.98, size=2)
        root = math.sqrt(a)
        weights = np.array([1.0 - root, root * (1.0 - b), root * b])
        x, y = weights @ surface.positions[t]
        points.append(SurfacePoint(triangle=int(t), x=float(x), y=float(y)))
    return points


def equidistribution_error(
    surface: HalfTranslationSurface,
    start: SurfacePoint,
    horizon: float,
    scale: float,
    bump: BumpFunction,
    area_integral: float | None = None,
) -> EquidistributionReport:
    """Compare phi along the horizontal segment of length A e^T from `start` with its mean.

    Args:
        surface (HalfTranslationSurface): Unit-area surface carrying the bump's collar.
        start (SurfacePoint): Start of the segment.
        horizon (float): T.
        scale (float): A, zero or positive.
        bump (BumpFunction): Bump function on `surface`.
        area_integral (float | None): Integral of phi over the surface, computed when
            omitted.

    Raises:
        PreconditionError: If the area is not 1, A is negative, the bump lives on another
            surface or the segment runs into a cone point.

    Returns:
        EquidistributionReport: Both integrals with the absolute and normalized error.
    """
    check_unit_area(surface)
    if bump.collar.surface is not surface:
        error_msg = "The bump function belongs to another surface"
        raise PreconditionError(error_msg)
    if scale < 0.0:
        error_msg = f"Segment scale A must be non-negative, got {scale}"
        raise PreconditionError(error_msg)
    length = scale * math.exp(horizon)
    if area_integral is None:
        area_integral = integrate_surface(bump).value
    if length == 0.0:
        return EquidistributionReport(
            horizon=horizon,
            scale=scale,
            length=0.0,
            segment_integral=0.0,
            area_integral=area_integral,
            error=0.0,
            normalized_error=0.0,
        )
    segment = trace_ray(surface, start, (1.0, 0.0), length)
    if not segment.complete:
        error_msg = (
            f"Horizontal segment from {start} meets cone point {segment.hit.vertex} "
            f"after {segment.traveled:.6g}"
        )
        raise PreconditionError(error_msg)
    segment_integral = integrate_segment(bump, segment).value
    error = abs(segment_integral - length * area_integral)
    logger.debug("T=%.4g length=%.6g error=%.6g", horizon, length, error)
    return EquidistributionReport(
        horizon=horizon,
        scale=scale,
        length=length,
        segment_integral=segment_integral,
        area_integral=area_integral,
        error=error,
        normalized_error=error / length,
    )
