"""Defines the application service for the surface domain."""

import logging
import math

from src.repository.files import load_surface
from src.repository.models.files import SurfaceFile
from src.service.exceptions import SurfaceServiceError
from src.service.surface.domain.complexes import (
    Complex,
    Completion,
    complete_to_triangulation,
    extend_complex,
    make_complex,
)
from src.service.surface.domain.delaunay import Triangulation, delaunay_triangulation
from src.service.surface.domain.linear_action import (
    PlanarMatrix,
    apply_matrix,
    flow,
    negate_differential,
    rotation_matrix,
)
from src.service.surface.domain.metrics import surface_metrics
from src.service.surface.domain.periods import (
    LipschitzProbe,
    default_basis,
    ell_min_lipschitz_probe,
    period_vector,
    rebuild_from_periods,
)
from src.service.surface.domain.saddle import (
    SaddleConnection,
    ShortestLengths,
    enumerate_saddle_connections,
    shortest_lengths,
)
from src.service.surface.domain.surface_core import (
    DoubleCover,
    HalfTranslationSurface,
    SurfaceMetrics,
    normalize_area,
    orientation_double_cover,
    stratum_signature,
)
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment, trace_ray

logger = logging.getLogger(__name__)


class SurfaceService:
    """Defines the application service for the surface domain."""

    @staticmethod
    def build_surface(surface_file: SurfaceFile) -> HalfTranslationSurface:
        """Build and validate a surface from its file representation.

        Args:
            surface_file (SurfaceFile): Parsed triangles and gluings.

        Raises:
            UnglueableEdgeError: If the gluings do not pair edges of equal vectors.
            DegenerateTriangleError: If a triangle does not close or is not positive.
            BadConeAngleError: If a cone angle is not a multiple of pi.
            SurfaceServiceError: If anything else goes wrong.

        Returns:
            HalfTranslationSurface: The surface with its vertices and cone angles.
        """
        logger.info("Entering...")
        try:
            surface = HalfTranslationSurface.from_gluing_list(
                [[list(v) for v in triangle] for triangle in surface_file.triangles],
                [((a[0], a[1]), (b[0], b[1]), flip) for a, b, flip in surface_file.gluings],
                name=surface_file.name,
            )
            logger.debug(
                "Surface '%s': %d triangles, %d vertices, genus %d",
                surface.name,
                surface.n_triangles,
                surface.n_vertices,
                surface.genus,
            )
        except SurfaceServiceError:
            logger.exception("The surface description is not valid.")
            raise
        except Exception as error:
            error_msg = f"An error occurred while building the surface '{surface_file.name}'"
            logger.exception(error_msg)
            raise SurfaceServiceError(error_msg) from error
        logger.info("Exiting...")
        return surface

    @staticmethod
    def load(name: str) -> HalfTranslationSurface:
        """Read a surface file, or a shipped fixture by name, and build it."""
        logger.info("Entering...")
        surface_file = load_surface(name)
        if not surface_file.name:
            surface_file = surface_file.model_copy(update={"name": str(name)})
        surface = SurfaceService.build_surface(surface_file)
        logger.info("Exiting...")
        return surface

    @staticmethod
    def describe(
        surface: HalfTranslationSurface,
    ) -> tuple[SurfaceMetrics, list[int], ShortestLengths]:
        """Area, genus, diameter interval, zero orders and shortest lengths of a surface.

        Args:
            surface (HalfTranslationSurface): Surface to measure.

        Raises:
            SurfaceServiceError: If the measurements fail.

        Returns:
            tuple[SurfaceMetrics, list[int], ShortestLengths]: Metrics, stratum signature
                and (ell_min, ell_min dagger, systole).
        """
        logger.info("Entering...")
        try:
            metrics = surface_metrics(surface)
            signature = stratum_signature(surface)
            lengths = shortest_lengths(surface)
        except SurfaceServiceError:
            logger.exception("The surface '%s' could not be measured.", surface.name)
            raise
        except Exception as error:
            error_msg = f"An error occurred while measuring the surface '{surface.name}'"
            logger.exception(error_msg)
            raise SurfaceServiceError(error_msg) from error
        logger.info("Exiting...")
        return metrics, signature, lengths

    @staticmethod
    def normalize(surface: HalfTranslationSurface) -> HalfTranslationSurface:
        logger.info("Entering...")
        normalized = normalize_area(surface)
        logger.debug("Scaled '%s' by %.9g", surface.name, 1.0 / math.sqrt(surface.area))
        logger.info("Exiting...")
        return normalized

    @staticmethod
    def double_cover(surface: HalfTranslationSurface) -> DoubleCover:
        logger.info("Entering...")
        cover = orientation_double_cover(surface)
        logger.info("Exiting...")
        return cover

    @staticmethod
    def transform(
        surface: HalfTranslationSurface,
        *,
        t: float = 0.0,
        theta: float = 0.0,
        matrix: PlanarMatrix | None = None,
        negate: bool = False,
    ) -> HalfTranslationSurface:
        """Rotate by theta, then apply `matrix`, then flow for time t.

        Args:
            surface (HalfTranslationSurface): Surface to deform.
            t (float): Teichmueller flow time.
            theta (float): Rotation angle in radians.
            matrix (PlanarMatrix | None): Extra matrix with positive determinant.
            negate (bool): Replace q by -q first, which rotates the charts by pi / 2.

        Raises:
            SingularMatrixError: If `matrix` has non-positive determinant.

        Returns:
            HalfTranslationSurface: The deformed surface, same combinatorics.
        """
        logger.info("Entering...")
        result = negate_differential(surface) if negate else surface
        if theta != 0.0:
            result = apply_matrix(result, rotation_matrix(theta))
        if matrix is not None:
            result = apply_matrix(result, matrix)
        if t != 0.0:
            result = flow(result, t)
        logger.debug("Transformed '%s' with t=%.6g theta=%.6g", surface.name, t, theta)
        logger.info("Exiting...")
        return result

    @staticmethod
    def trace(
        surface: HalfTranslationSurface,
        start: SurfacePoint,
        direction: tuple[float, float],
        length: float,
    ) -> TracedSegment:
        logger.info("Entering...")
        try:
            segment = trace_ray(surface, start, direction, length)
        except SurfaceServiceError:
            logger.exception("The ray from %s could not be traced.", start)
            raise
        logger.info("Exiting...")
        return segment

    @staticmethod
    def saddle_connections(
        surface: HalfTranslationSurface, max_length: float, budget: int | None = None
    ) -> list[SaddleConnection]:
        """Saddle connections of length at most `max_length`, sorted by length.

        Raises:
            BudgetExceededError: If the developed search exceeds the node budget.
            SurfaceServiceError: If `max_length` is not positive.
        """
        logger.info("Entering...")
        if max_length <= 0.0:
            error_msg = f"Length bound must be positive, got {max_length}"
            logger.error(error_msg)
            raise SurfaceServiceError(error_msg)
        try:
            connections = enumerate_saddle_connections(surface, max_length, budget)
        except SurfaceServiceError:
            logger.exception("Enumeration on '%s' stopped.", surface.name)
            raise
        logger.info("Found %d saddle connections up to %.6g", len(connections), max_length)
        logger.info("Exiting...")
        return connections

    @staticmethod
    def delaunay(surface: HalfTranslationSurface) -> Triangulation:
        logger.info("Entering...")
        triangulation = delaunay_triangulation(surface)
        logger.info("Exiting...")
        return triangulation

    @staticmethod
    def grow_complex(
        surface: HalfTranslationSurface,
        seed: list[SaddleConnection],
        connection: SaddleConnection | None = None,
    ) -> Complex | Completion:
        """Enlarge the complex spanned by `seed`.

        With a connection, perform one enlargement step; without, complete the complex to a
        triangulation using Delaunay edges.

        Raises:
            NotApplicableError: If the complex cannot be enlarged by the connection.
        """
        logger.info("Entering...")
        complex_ = make_complex(surface, seed)
        try:
            if connection is not None:
                result: Complex | Completion = extend_complex(surface, complex_, connection)
            else:
                result = complete_to_triangulation(surface, complex_)
        except SurfaceServiceError:
            logger.exception("The complex of %d connections cannot be enlarged.", len(seed))
            raise
        logger.info("Exiting...")
        return result

    @staticmethod
    def periods(
        triangulation: Triangulation, basis: list[int] | None = None
    ) -> tuple[list[int], list[tuple[float, float]]]:
        """Basis edge ids and their holonomies.

        Raises:
            RankDeficientError: If the basis edges do not determine the triangulation.
        """
        logger.info("Entering...")
        basis = default_basis(triangulation) if basis is None else basis
        vector = period_vector(triangulation, basis)
        logger.info("Exiting...")
        return basis, vector

    @staticmethod
    def rebuild(
        triangulation: Triangulation,
        basis: list[int],
        periods: list[tuple[float, float]],
    ) -> HalfTranslationSurface:
        logger.info("Entering...")
        surface = rebuild_from_periods(triangulation, basis, periods)
        logger.info("Exiting...")
        return surface

    @staticmethod
    def ell_min_probe(
        surface: HalfTranslationSurface,
        *,
        scales: tuple[float, ...] = (1e-4, 1e-5),
        samples: int = 100,
        seed: int | None = None,
    ) -> LipschitzProbe:
        """Fitted Lipschitz constants of ell_min along random period perturbations."""
        logger.info("Entering...")
        probe = ell_min_lipschitz_probe(
            delaunay_triangulation(surface), scales=scales, samples=samples, seed=seed
        )
        logger.debug("ell_min probe constants %s", probe.constants)
        logger.info("Exiting...")
        return probe
