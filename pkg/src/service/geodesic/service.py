"""Defines the application service for the geodesic domain."""

import logging
from collections.abc import Sequence

from src.repository.files import load_curve
from src.service.exceptions import GeodesicServiceError, SurfaceServiceError
from src.service.geodesic.domain.curves import CurveClass, validate_curve, word_of_path
from src.service.geodesic.domain.intersection import (
    IntersectionBounds,
    IntersectionCount,
    count_crossings,
    intersection_bounds,
    transverse_count,
)
from src.service.geodesic.domain.rectdecomp import (
    RectangleRecord,
    RectangularDecomposition,
    TransportedEstimate,
    build_rect_decomposition,
    embedded_rectangle,
    transported_crossing_estimate,
)
from src.service.geodesic.domain.stats import GeodesicStats, geodesic_stats
from src.service.geodesic.domain.tighten import FlatGeodesic, tighten
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment

logger = logging.getLogger(__name__)


class GeodesicService:
    """Defines the application service for the geodesic domain."""

    @staticmethod
    def curve(surface: HalfTranslationSurface, crossings: Sequence[Sequence[int]]) -> CurveClass:
        """Validate a crossing word and reduce it.

        Args:
            surface (HalfTranslationSurface): Surface whose triangulation the word refers to.
            crossings (Sequence[Sequence[int]]): `(triangle, edge)` pairs.

        Raises:
            MalformedCurveError: If the word is not a closed walk through adjacent triangles.
            NullHomotopicError: If the word cancels completely.

        Returns:
            CurveClass: The reduced cyclic word.
        """
        logger.info("Entering...")
        try:
            curve = validate_curve(surface, crossings)
        except GeodesicServiceError:
            logger.exception("The crossing word is not a valid curve on '%s'.", surface.name)
            raise
        logger.info("Exiting...")
        return curve

    @staticmethod
    def load_curve(surface: HalfTranslationSurface, name: str) -> CurveClass:
        """Read a curve file, or a shipped fixture by name, and validate it on `surface`."""
        logger.info("Entering...")
        curve_file = load_curve(name)
        if curve_file.surface and surface.name and curve_file.surface != surface.name:
            logger.warning(
                "Curve '%s' was written for '%s' but is read on '%s'",
                name,
                curve_file.surface,
                surface.name,
            )
        curve = GeodesicService.curve(surface, curve_file.curve)
        logger.info("Exiting...")
        return curve

    @staticmethod
    def curve_of_path(
        surface: HalfTranslationSurface,
        start: SurfacePoint,
        displacements: Sequence[Sequence[float]],
    ) -> CurveClass:
        logger.info("Entering...")
        try:
            curve = word_of_path(surface, start, displacements)
        except (GeodesicServiceError, SurfaceServiceError):
            logger.exception("The polygonal path does not define a curve.")
            raise
        logger.info("Exiting...")
        return curve

    @staticmethod
    def tighten(surface: HalfTranslationSurface, curve: CurveClass) -> FlatGeodesic:
        """Flat geodesic representative of a curve class.

        Args:
            surface (HalfTranslationSurface): The surface.
            curve (CurveClass): Reduced crossing word.

        Raises:
            NullHomotopicError: If the curve tightens to a point.
            BudgetExceededError: If rerouting does not settle.
            GeodesicServiceError: If anything else goes wrong.

        Returns:
            FlatGeodesic: Cylinder or singular representative.
        """
        logger.info("Entering...")
        try:
            geodesic = tighten(surface, curve)
            logger.debug(
                "Tightened a word of %d crossings to a %s geodesic of length %.9g",
                len(curve),
                geodesic.kind.value,
                geodesic.length,
            )
        except (GeodesicServiceError, SurfaceServiceError):
            logger.exception("The curve could not be tightened.")
            raise
        except Exception as error:
            error_msg = f"An error occurred while tightening a curve on '{surface.name}'"
            logger.exception(error_msg)
            raise GeodesicServiceError(error_msg) from error
        logger.info("Exiting...")
        return geodesic

    @staticmethod
    def stats(geodesic: FlatGeodesic) -> GeodesicStats:
        logger.info("Entering...")
        result = geodesic_stats(geodesic)
        logger.info("Exiting...")
        return result

    @staticmethod
    def count(alpha: FlatGeodesic, beta: FlatGeodesic) -> IntersectionCount:
        """Transverse crossings and non-transverse incidences of two geodesics.

        Raises:
            SharedArcUnresolvedError: If the linking along a shared arc is ambiguous.
        """
        logger.info("Entering...")
        try:
            count = transverse_count(alpha, beta)
        except GeodesicServiceError:
            logger.exception("The intersection of the two geodesics could not be counted.")
            raise
        logger.info("Exiting...")
        return count

    @staticmethod
    def bounds(alpha: FlatGeodesic, beta: FlatGeodesic) -> IntersectionBounds:
        """Certified interval [I, I + n * m] for the geometric intersection number.

        Raises:
            SharedArcUnresolvedError: If the linking along a shared arc is ambiguous.
        """
        logger.info("Entering...")
        try:
            bounds = intersection_bounds(alpha, beta)
        except GeodesicServiceError:
            logger.exception("The intersection bounds could not be computed.")
            raise
        logger.info("I=%d n=%d m=%d", bounds.transverse, bounds.n, bounds.m)
        logger.info("Exiting...")
        return bounds

    @staticmethod
    def transversal_crossings(geodesic: FlatGeodesic, segment: TracedSegment) -> int:
        logger.info("Entering...")
        crossings = count_crossings(geodesic, segment)
        logger.info("Exiting...")
        return crossings

    @staticmethod
    def rectangle(
        geodesic: FlatGeodesic,
        index: int,
        t0: float,
        t1: float,
        shortest: float | None = None,
    ) -> RectangleRecord:
        """Embedded rectangle around a window of one piece of the geodesic.

        Raises:
            WidthViolationError: If the window is too long or cone points crowd both sides.
            DegenerateDirectionError: If the piece is horizontal or vertical.
        """
        logger.info("Entering...")
        if not 0 <= index < max(1, geodesic.n_connections):
            error_msg = f"Piece {index} does not exist on a geodesic of {geodesic.n_connections}"
            logger.error(error_msg)
            raise GeodesicServiceError(error_msg)
        try:
            record = embedded_rectangle(geodesic, index, t0, t1, shortest)
        except GeodesicServiceError:
            logger.exception("No rectangle fits around [%.6g, %.6g].", t0, t1)
            raise
        logger.info("Exiting...")
        return record

    @staticmethod
    def decompose(
        geodesic: FlatGeodesic,
        shortest: float | None = None,
        *,
        check_embedding: bool = False,
    ) -> RectangularDecomposition:
        """Rectangular decomposition of a flat geodesic.

        Raises:
            WidthViolationError: If a staircase or rectangle meets a cone point.
            GeodesicServiceError: If anything else goes wrong.
        """
        logger.info("Entering...")
        try:
            decomposition = build_rect_decomposition(
                geodesic, shortest, check_embedding=check_embedding
            )
        except (GeodesicServiceError, SurfaceServiceError):
            logger.exception("The geodesic could not be decomposed.")
            raise
        except Exception as error:
            error_msg = "An error occurred while decomposing the geodesic"
            logger.exception(error_msg)
            raise GeodesicServiceError(error_msg) from error
        logger.debug(
            "Decomposition: %d segments, horizontal total %.12g",
            len(decomposition.segments),
            decomposition.horizontal_total,
        )
        logger.info("Exiting...")
        return decomposition

    @staticmethod
    def transported_estimate(
        surface: HalfTranslationSurface,
        t: float,
        decomposition: RectangularDecomposition,
        beta: FlatGeodesic,
    ) -> TransportedEstimate:
        """Crossings of the flowed horizontal segments of a decomposition with beta.

        Raises:
            HorizontalPieceError: If beta has a horizontal piece.
            GeodesicServiceError: If t is negative.
        """
        logger.info("Entering...")
        if t < 0.0:
            error_msg = f"Flow time must be non-negative, got {t}"
            logger.error(error_msg)
            raise GeodesicServiceError(error_msg)
        try:
            estimate = transported_crossing_estimate(surface, t, decomposition, beta)
        except GeodesicServiceError:
            logger.exception("The transported estimate could not be computed.")
            raise
        logger.info("Exiting...")
        return estimate
