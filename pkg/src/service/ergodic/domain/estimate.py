"""Comparison of the flow-transported intersection estimate with certified intervals."""

import logging
import math

from pydantic import BaseModel

from src.core.config import settings
from src.service.ergodic.domain.equidistribution import check_unit_area
from src.service.exceptions import PreconditionError
from src.service.geodesic.domain.curves import CurveClass
from src.service.geodesic.domain.intersection import intersection_bounds
from src.service.geodesic.domain.stats import geodesic_stats
from src.service.geodesic.domain.tighten import tighten
from src.service.surface.domain.linear_action import flow
from src.service.surface.domain.surface_core import HalfTranslationSurface

logger = logging.getLogger(__name__)


class EstimateReport(BaseModel):
    """Predicted i(alpha, Re q_s) i(beta, Im q_e) e^r against the interval on q_e.

    `residual` is the distance from the prediction to [actual_lo, actual_hi].
    """

    r: float
    alpha_re: float
    beta_im: float
    predicted: float
    actual_lo: int
    actual_hi: int
    residual: float
    normalized_residual: float


def main_estimate(
    start_surface: HalfTranslationSurface,
    r: float,
    alpha: CurveClass,
    beta: CurveClass,
) -> EstimateReport:
    """Predict the intersection number of two curves from their measures at both ends.

    alpha is measured against the vertical foliation of q_s and beta against the
    horizontal foliation of q_e = a_r q_s; the actual count is bracketed on q_e.

    Args:
        start_surface (HalfTranslationSurface): q_s, of unit area.
        r (float): Flow time, positive.
        alpha (CurveClass): First curve.
        beta (CurveClass): Second curve.

    Raises:
        PreconditionError: If r <= 0, the area is not 1 or beta is horizontal on q_e.

    Returns:
        EstimateReport: Prediction, interval and residuals.
    """
    if r <= 0.0:
        error_msg = f"Flow time must be positive, got {r}"
        raise PreconditionError(error_msg)
    check_unit_area(start_surface)
    end_surface = flow(start_surface, r)
    alpha_start = tighten(start_surface, alpha)
    alpha_end = tighten(end_surface, alpha)
    beta_end = tighten(end_surface, beta)
    alpha_re = geodesic_stats(alpha_start).re_measure
    beta_stats = geodesic_stats(beta_end)
    if beta_stats.im_measure <= settings.GEOMETRY_EPSILON * max(1.0, beta_stats.length):
        error_msg = "beta is horizontal on the flowed surface"
        raise PreconditionError(error_msg)
    predicted = alpha_re * beta_stats.im_measure * math.exp(r)
    bounds = intersection_bounds(alpha_end, beta_end)
    residual = max(0.0, bounds.lower - predicted, predicted - bounds.upper)
    logger.debug(
        "r=%.4g predicted=%.9g interval=[%d, %d]", r, predicted, bounds.lower, bounds.upper
    )
    return EstimateReport(
        r=r,
        alpha_re=alpha_re,
        beta_im=beta_stats.im_measure,
        predicted=predicted,
        actual_lo=bounds.lower,
        actual_hi=bounds.upper,
        residual=residual,
        normalized_residual=residual / math.exp(r),
    )
