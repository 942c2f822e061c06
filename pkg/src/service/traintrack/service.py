"""Defines the application service for train tracks."""

import logging

from src.service.exceptions import (
    GeodesicServiceError,
    SurfaceServiceError,
    TrainTrackServiceError,
)
from src.service.geodesic.domain.curves import CurveClass
from src.service.geodesic.domain.tighten import FlatGeodesic
from src.service.surface.domain.delaunay import Triangulation
from src.service.surface.domain.periods import LipschitzProbe
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.traintrack.domain.probes import (
    ConvexityReport,
    convexity_lipschitz_probe,
    hbeta_lipschitz_probe,
    random_measure_pairs,
)
from src.service.traintrack.domain.track import (
    CountingMeasure,
    TrainTrack,
    carried_multicurve,
    check_switch_conditions,
    dual_train_track,
    vertical_counting_measure,
)

logger = logging.getLogger(__name__)


class TrainTrackService:
    """Defines the application service for train tracks."""

    @staticmethod
    def dual_track(
        surface: HalfTranslationSurface, triangulation: Triangulation | None = None
    ) -> tuple[TrainTrack, CountingMeasure]:
        """Dual train track of a triangulation with its vertical counting measure.

        Raises:
            SwitchConditionError: If the vertical measure is off balance, which only
                happens on a corrupt triangulation.
        """
        logger.info("Entering...")
        try:
            track = dual_train_track(surface, triangulation)
            measure = vertical_counting_measure(track)
            check_switch_conditions(track, measure)
        except TrainTrackServiceError:
            logger.exception("The dual train track of '%s' is inconsistent.", surface.name)
            raise
        except Exception as error:
            error_msg = f"An error occurred while building the dual track of '{surface.name}'"
            logger.exception(error_msg)
            raise TrainTrackServiceError(error_msg) from error
        if track.n_ties:
            logger.info("%d triangles have a vertical edge and two labelings", track.n_ties)
        logger.info("Exiting...")
        return track, measure

    @staticmethod
    def carried(track: TrainTrack, measure: CountingMeasure) -> list[CurveClass]:
        """Components of the multicurve carried with integer weights.

        Raises:
            NonIntegerWeightsError: If a weight is not a non-negative integer.
            SwitchConditionError: If the weights do not balance at every switch.
        """
        logger.info("Entering...")
        try:
            curves = carried_multicurve(track, measure)
        except (TrainTrackServiceError, GeodesicServiceError):
            logger.exception("The weights do not carry a multicurve.")
            raise
        logger.info("Exiting...")
        return curves

    @staticmethod
    def convexity(
        alpha: FlatGeodesic,
        track: TrainTrack,
        pairs: list[tuple[CountingMeasure, CountingMeasure]] | None = None,
        *,
        count: int = 10,
        seed: int | None = None,
    ) -> ConvexityReport:
        """Interval-arithmetic convexity and Lipschitz probe of v -> i(alpha, mu_v).

        Random carried measures are drawn with `seed` when no pairs are given.
        """
        logger.info("Entering...")
        pairs = random_measure_pairs(track, count, seed) if pairs is None else pairs
        try:
            report = convexity_lipschitz_probe(alpha, track, pairs)
        except (TrainTrackServiceError, GeodesicServiceError):
            logger.exception("The convexity probe failed.")
            raise
        except Exception as error:
            error_msg = "An error occurred while probing convexity"
            logger.exception(error_msg)
            raise TrainTrackServiceError(error_msg) from error
        logger.info("Exiting...")
        return report

    @staticmethod
    def hbeta_probe(
        triangulation: Triangulation,
        beta: CurveClass,
        *,
        scales: tuple[float, ...] = (1e-4, 1e-5),
        samples: int = 20,
        seed: int | None = None,
    ) -> LipschitzProbe:
        logger.info("Entering...")
        try:
            probe = hbeta_lipschitz_probe(
                triangulation, beta, scales=scales, samples=samples, seed=seed
            )
        except (GeodesicServiceError, SurfaceServiceError):
            logger.exception("h_beta could not be followed along the perturbations.")
            raise
        logger.debug("h_beta probe constants %s", probe.constants)
        logger.info("Exiting...")
        return probe
