"""Defines the application service for collars and bump functions."""

import logging

from src.service.collar.domain.bump import BumpFunction, bump_function
from src.service.collar.domain.collar import Collar, build_collar
from src.service.collar.domain.quadrature import (
    QuadratureResult,
    SandwichReport,
    SobolevNorm,
    integrate_segment,
    integrate_surface,
    sandwich_report,
    sobolev_norm,
)
from src.service.exceptions import CollarServiceError, GeodesicServiceError
from src.service.geodesic.domain.stats import geodesic_stats
from src.service.geodesic.domain.tighten import FlatGeodesic
from src.service.surface.domain.surface_core import orientation_double_cover
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment

logger = logging.getLogger(__name__)


class CollarService:
    """Defines the application service for collars and bump functions."""

    @staticmethod
    def build(
        geodesic: FlatGeodesic,
        shortest: float | None = None,
        *,
        check_multiplicity: bool = False,
    ) -> Collar:
        """Immersed collar of a non-horizontal flat geodesic.

        Args:
            geodesic (FlatGeodesic): Cylinder or singular geodesic.
            shortest (float | None): ell_min of the surface, computed when omitted.
            check_multiplicity (bool): Sample the immersion for its preimage counts.

        Raises:
            HorizontalGeodesicError: If a piece of the geodesic is horizontal.
            HigherOrderZeroError: If a saddle connection ends at a zero of order >= 2.
            CollarServiceError: If anything else goes wrong.

        Returns:
            Collar: The collar with its shear anchors and side panels.
        """
        logger.info("Entering...")
        try:
            collar = build_collar(geodesic, shortest, check_multiplicity=check_multiplicity)
        except (CollarServiceError, GeodesicServiceError):
            logger.exception("No collar could be built around the geodesic.")
            raise
        except Exception as error:
            error_msg = "An error occurred while building a collar"
            logger.exception(error_msg)
            raise CollarServiceError(error_msg) from error
        logger.info("Exiting...")
        return collar

    @staticmethod
    def bump(
        collar: Collar, delta: float | None = None, side: int | None = None
    ) -> BumpFunction:
        """Bump function phi, or phi_{side, delta} for collars with saddle connections.

        Raises:
            DeltaOutOfRangeError: If delta or side are not admissible.
        """
        logger.info("Entering...")
        try:
            bump = bump_function(collar, delta, side)
        except CollarServiceError:
            logger.exception("The bump function parameters are not admissible.")
            raise
        logger.info("Exiting...")
        return bump

    @staticmethod
    def integrate(
        bump: BumpFunction, segment: TracedSegment | None = None
    ) -> QuadratureResult:
        """Integral of a bump over the surface, or along a horizontal segment when given.

        Raises:
            QuadratureBudgetError: If the quadrature grid is too large.
            CollarServiceError: If the segment is not horizontal or anything else fails.
        """
        logger.info("Entering...")
        try:
            if segment is None:
                result = integrate_surface(bump)
            else:
                result = integrate_segment(bump, segment)
        except CollarServiceError:
            logger.exception("The bump function could not be integrated.")
            raise
        except Exception as error:
            error_msg = "An error occurred while integrating a bump function"
            logger.exception(error_msg)
            raise CollarServiceError(error_msg) from error
        logger.info("Exiting...")
        return result

    @staticmethod
    def evaluate(bump: BumpFunction, point: SurfacePoint) -> float:
        logger.info("Entering...")
        value = bump.evaluate(point)
        logger.info("Exiting...")
        return value

    @staticmethod
    def sobolev_norm(bump: BumpFunction) -> SobolevNorm:
        """Weighted Sobolev norm of a bump lifted to the orientation double cover.

        Raises:
            QuadratureBudgetError: If the quadrature grid is too large.
        """
        logger.info("Entering...")
        cover = orientation_double_cover(bump.collar.surface)
        if cover.trivial:
            logger.info("The double cover is trivial; the norm is taken on one copy, doubled")
        try:
            norm = sobolev_norm(bump, cover_trivial=cover.trivial)
        except CollarServiceError:
            logger.exception("The Sobolev norm could not be computed.")
            raise
        logger.info("Exiting...")
        return norm

    @staticmethod
    def sandwich(collar: Collar, delta: float | None = None) -> SandwichReport:
        """Integrals of phi, or of phi_{0,delta} and phi_{1,delta}, against i(beta, Im q).

        Raises:
            DeltaOutOfRangeError: If delta is not admissible for a collar with connections.
        """
        logger.info("Entering...")
        if collar.has_connections:
            bumps = [CollarService.bump(collar, delta, side) for side in (0, 1)]
        else:
            bumps = [CollarService.bump(collar)]
        target = geodesic_stats(collar.geodesic).im_measure
        trivial = orientation_double_cover(collar.surface).trivial
        try:
            report = sandwich_report(bumps, target, cover_trivial=trivial)
        except CollarServiceError:
            logger.exception("The sandwich report could not be computed.")
            raise
        logger.info(
            "target=%.9g lower=%.9g upper=%.9g", report.target, report.lower, report.upper
        )
        logger.info("Exiting...")
        return report
