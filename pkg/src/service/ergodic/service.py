"""Defines the application service for the ergodic experiments."""

import logging
from collections.abc import Sequence

from src.service.collar.domain.bump import BumpFunction
from src.service.collar.domain.quadrature import integrate_surface
from src.service.ergodic.domain.equidistribution import (
    EquidistributionReport,
    equidistribution_error,
    random_points,
)
from src.service.ergodic.domain.estimate import EstimateReport, main_estimate
from src.service.ergodic.domain.greedy import GreedyPartition, Number, greedy_partition
from src.service.ergodic.domain.itinerary import (
    FalsificationReport,
    Itinerary,
    ItineraryValidation,
    SummabilityCheck,
    falsify_sampler_failure,
    sample_itinerary,
    summability_check,
    validate_itinerary,
)
from src.service.ergodic.domain.membership import (
    MembershipTrace,
    orbit_membership,
    recurrence_fraction,
    synthetic_traces,
)
from src.service.exceptions import (
    CollarServiceError,
    ErgodicServiceError,
    GeodesicServiceError,
    SurfaceServiceError,
)
from src.service.geodesic.domain.curves import CurveClass
from src.service.surface.domain.surface_core import HalfTranslationSurface, normalize_area
from src.service.surface.domain.tracing import SurfacePoint

logger = logging.getLogger(__name__)


class ErgodicService:
    """Defines the application service for the ergodic experiments."""

    @staticmethod
    def partition(length: Number, thresholds: Sequence[Number]) -> GreedyPartition:
        """Greedy decomposition of a length by increasing thresholds.

        Raises:
            BadThresholdsError: If the thresholds are not positive and increasing.
        """
        logger.info("Entering...")
        try:
            partition = greedy_partition(length, list(thresholds))
        except ErgodicServiceError:
            logger.exception("The thresholds %s do not define a partition.", thresholds)
            raise
        logger.info("Exiting...")
        return partition

    @staticmethod
    def membership(
        surface: HalfTranslationSurface,
        horizon: float,
        *,
        dt: float | None = None,
        delta: float = 0.1,
        s: float = 0.0,
    ) -> MembershipTrace:
        """Sampled orbit of a surface against K_delta = {ell_min >= delta} and its enlargement.

        Raises:
            ErgodicServiceError: If the orbit cannot be sampled.
        """
        logger.info("Entering...")
        try:
            trace = orbit_membership(surface, horizon, dt, delta, s)
        except (ErgodicServiceError, SurfaceServiceError):
            logger.exception("The orbit of '%s' could not be sampled.", surface.name)
            raise
        except Exception as error:
            error_msg = f"An error occurred while sampling the orbit of '{surface.name}'"
            logger.exception(error_msg)
            raise ErgodicServiceError(error_msg) from error
        logger.info("Exiting...")
        return trace

    @staticmethod
    def recurrence(trace: MembershipTrace, horizon: float | None = None) -> float:
        logger.info("Entering...")
        fraction = recurrence_fraction(trace, horizon)
        logger.info("Exiting...")
        return fraction

    @staticmethod
    def itinerary(
        trace: MembershipTrace, horizon: float, rho: float, epsilon: float, s: float
    ) -> tuple[Itinerary, ItineraryValidation]:
        """Sample an itinerary from a trace and validate it condition by condition.

        Raises:
            PreconditionError: If rho is outside (0, 1) or s is not positive.
        """
        logger.info("Entering...")
        try:
            itinerary = sample_itinerary(trace, horizon, rho, s)
        except ErgodicServiceError:
            logger.exception("No itinerary can be sampled with these parameters.")
            raise
        validation = validate_itinerary(itinerary, trace, epsilon)
        if not validation.valid:
            logger.info("Itinerary fails conditions %s", sorted(validation.conditions))
        logger.info("Exiting...")
        return itinerary, validation

    @staticmethod
    def synthetic(
        count: int,
        horizon: float,
        dt: float,
        s: float,
        max_outside: float,
        seed: int | None = None,
    ) -> list[MembershipTrace]:
        """Random traces spending at most `max_outside` outside K, enlarged by s."""
        logger.info("Entering...")
        try:
            traces = synthetic_traces(count, horizon, dt, s, max_outside, seed)
        except ErgodicServiceError:
            logger.exception("The synthetic traces could not be generated.")
            raise
        logger.debug("Generated %d traces with seed %s", count, seed)
        logger.info("Exiting...")
        return traces

    @staticmethod
    def falsify(
        traces: list[MembershipTrace], horizon: float, rho: float, epsilon: float, s: float
    ) -> FalsificationReport:
        """Contrapositive check of the sampler over a corpus of traces.

        Raises:
            PreconditionError: Unless rho (1 + epsilon) < 1 and T >= s / (rho epsilon).
        """
        logger.info("Entering...")
        try:
            report = falsify_sampler_failure(traces, horizon, rho, epsilon, s)
        except ErgodicServiceError:
            logger.exception("The sampler cannot be checked with these parameters.")
            raise
        logger.info(
            "%d of %d itineraries validate, %d failures confirmed",
            report.validated,
            report.traces,
            report.confirmed,
        )
        logger.info("Exiting...")
        return report

    @staticmethod
    def summability(itinerary: Itinerary, lams: Sequence[float]) -> list[SummabilityCheck]:
        logger.info("Entering...")
        checks = [summability_check(itinerary, lam) for lam in lams]
        logger.info("Exiting...")
        return checks

    @staticmethod
    def equidistribution(
        surface: HalfTranslationSurface,
        bump: BumpFunction,
        horizons: Sequence[float],
        *,
        scale: float = 1.0,
        starts: Sequence[SurfacePoint] | None = None,
        n_starts: int = 1,
        seed: int | None = None,
    ) -> list[EquidistributionReport]:
        """Equidistribution error for every horizon and start point.

        The bump's surface integral is computed once. When no start points are given,
        `n_starts` of them are drawn uniformly with `seed`.

        Raises:
            PreconditionError: If the surface is not of unit area or a segment meets a
                cone point.
            QuadratureBudgetError: If a segment is too long to integrate.
            ErgodicServiceError: If anything else goes wrong.
        """
        logger.info("Entering...")
        starts = list(starts) if starts is not None else random_points(surface, n_starts, seed)
        try:
            area_integral = integrate_surface(bump).value
            reports = [
                equidistribution_error(surface, start, horizon, scale, bump, area_integral)
                for horizon in horizons
                for start in starts
            ]
        except (ErgodicServiceError, CollarServiceError):
            logger.exception("The equidistribution error could not be measured.")
            raise
        except Exception as error:
            error_msg = "An error occurred while measuring an equidistribution error"
            logger.exception(error_msg)
            raise ErgodicServiceError(error_msg) from error
        logger.info("Exiting...")
        return reports

    @staticmethod
    def estimate(
        surface: HalfTranslationSurface,
        r: float,
        alpha: CurveClass,
        beta: CurveClass,
        *,
        normalize: bool = True,
    ) -> EstimateReport:
        """Transported intersection estimate between q_s and q_e = a_r q_s.

        Args:
            surface (HalfTranslationSurface): q_s.
            r (float): Flow time.
            alpha (CurveClass): First curve.
            beta (CurveClass): Second curve.
            normalize (bool): Rescale q_s to unit area first.

        Raises:
            PreconditionError: If r <= 0 or beta is horizontal on q_e.
            ErgodicServiceError: If anything else goes wrong.

        Returns:
            EstimateReport: Prediction, certified interval and residuals.
        """
        logger.info("Entering...")
        start = normalize_area(surface) if normalize else surface
        try:
            report = main_estimate(start, r, alpha, beta)
        except (ErgodicServiceError, GeodesicServiceError, SurfaceServiceError):
            logger.exception("The estimate at r=%.6g could not be assembled.", r)
            raise
        except Exception as error:
            error_msg = f"An error occurred while assembling the estimate at r={r}"
            logger.exception(error_msg)
            raise ErgodicServiceError(error_msg) from error
        logger.info("Exiting...")
        return report
