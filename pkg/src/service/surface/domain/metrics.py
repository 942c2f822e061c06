"""Area, genus and a diameter interval read off the Delaunay triangulation."""

import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from src.service.surface.domain.delaunay import (
    Triangulation,
    circumradius,
    delaunay_triangulation,
)
from src.service.surface.domain.surface_core import HalfTranslationSurface, SurfaceMetrics

logger = logging.getLogger(__name__)


def diameter_interval(triangulation: Triangulation) -> tuple[float, float]:
    """Bracket the diameter of the surface.

    Every point lies within the circumradius of a vertex of its Delaunay triangle, so the
    largest vertex-graph distance plus twice the largest circumradius bounds the
    diameter from above. The circumcenter of an acute or right Delaunay triangle lies in
    the triangle and has no vertex closer than the circumradius, which gives the lower
    bound.
    """
    surface = triangulation.surface
    n = surface.n_vertices
    weights = np.full((n, n), np.inf)
    for connection in triangulation.connections:
        a, b = connection.start_vertex, connection.end_vertex
        weights[a, b] = weights[b, a] = min(weights[a, b], connection.length)
    np.fill_diagonal(weights, 0.0)
    graph = csr_matrix(np.where(np.isfinite(weights), weights, 0.0))
    distances = shortest_path(graph, method="D", directed=False)
    finite = distances[np.isfinite(distances)]
    radii = [circumradius(surface.edges[t]) for t in range(surface.n_triangles)]
    lower = 0.0
    for t, radius in enumerate(radii):
        lengths = sorted(float(np.hypot(*v)) for v in surface.edges[t])
        if lengths[2] ** 2 <= lengths[0] ** 2 + lengths[1] ** 2 + 1e-9 * lengths[2] ** 2:
            lower = max(lower, radius)
    upper = float(finite.max()) + 2.0 * max(radii)
    return lower, upper


def surface_metrics(surface: HalfTranslationSurface) -> SurfaceMetrics:
    """Area, diameter interval and genus of a surface.

    Args:
        surface (HalfTranslationSurface): Any valid surface.

    Returns:
        SurfaceMetrics: Area, genus and the bracket from `diameter_interval`.
    """
    lower, upper = diameter_interval(delaunay_triangulation(surface))
    logger.debug("Diameter of %s in [%.6g, %.6g]", surface.name, lower, upper)
    return SurfaceMetrics(
        area=surface.area,
        diameter_lower=lower,
        diameter_upper=upper,
        genus=surface.genus,
    )
