"""Saddle connections: enumeration by developed wedges, ell_min and the systole."""

import logging
import math
from collections.abc import Iterator
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from src.core.config import settings
from src.service.exceptions import BudgetExceededError, TracingError
from src.service.surface.domain.surface_core import (
    HalfTranslationSurface,
    ccw_angle,
    cross,
    rotate,
)
from src.service.surface.domain.tracing import TracedSegment, trace_from_corner

logger = logging.getLogger(__name__)


class SaddleConnection(BaseModel):
    """Straight segment between two cone points with no cone point inside.

    `holonomy` is expressed in the chart of `start_triangle`; `end_sign` is the chart
    sign of `end_triangle` relative to it along the connection. Germs identify the
    outgoing direction at each endpoint, so `key` does not depend on the triangle
    used to find the connection nor on its orientation.
    """

    model_config = ConfigDict(frozen=True)

    start_vertex: int
    start_triangle: int
    start_corner: int
    start_germ: float
    end_vertex: int
    end_triangle: int
    end_corner: int
    end_germ: float
    holonomy: tuple[float, float]
    end_sign: int = 1
    length: float

    @property
    def direction(self) -> np.ndarray:
        return np.array(self.holonomy) / self.length

    @property
    def start_key(self) -> tuple[int, float]:
        return self.start_vertex, round(self.start_germ, settings.GERM_ROUND_DECIMALS) + 0.0

    @property
    def end_key(self) -> tuple[int, float]:
        return self.end_vertex, round(self.end_germ, settings.GERM_ROUND_DECIMALS) + 0.0

    @property
    def key(self) -> tuple[tuple[int, float], tuple[int, float]]:
        """Orientation independent identifier."""
        a, b = self.start_key, self.end_key
        return (a, b) if a <= b else (b, a)

    def reversed(self) -> "SaddleConnection":
        hx, hy = self.holonomy
        return SaddleConnection(
            start_vertex=self.end_vertex,
            start_triangle=self.end_triangle,
            start_corner=self.end_corner,
            start_germ=self.end_germ,
            end_vertex=self.start_vertex,
            end_triangle=self.start_triangle,
            end_corner=self.start_corner,
            end_germ=self.start_germ,
            holonomy=(-self.end_sign * hx, -self.end_sign * hy),
            end_sign=self.end_sign,
            length=self.length,
        )


class VisibleVertex(NamedTuple):
    """Cone point seen from a corner: developed position and the corner it lands in."""

    position: np.ndarray
    triangle: int
    corner: int
    sign: int


class ShortestLengths(BaseModel):
    """Shortest saddle connection, its truncation at 1, and the systole."""

    ell_min: float
    ell_min_dagger: float
    systole: float
    systole_chain: list[SaddleConnection]


class NodeBudget:
    """Counter shared by the wedge explorations of one enumeration."""

    def __init__(self, limit: int | None = None) -> None:
        self.limit = settings.ENUMERATION_NODE_BUDGET if limit is None else limit
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.limit:
            error_msg = f"Developed search exceeded the node budget of {self.limit}"
            raise BudgetExceededError(error_msg)


def _segment_distance(p0: np.ndarray, p1: np.ndarray) -> float:
    """Distance from the origin to the segment [p0, p1]."""
    d = p1 - p0
    denom = float(d @ d)
    lam = 0.0 if denom == 0.0 else min(1.0, max(0.0, -float(p0 @ d) / denom))
    return float(np.hypot(*(p0 + lam * d)))


def explore_wedge(
    surface: HalfTranslationSurface,
    t: int,
    k: int,
    bound: float,
    budget: NodeBudget,
    *,
    right: np.ndarray | None = None,
    left: np.ndarray | None = None,
) -> Iterator[VisibleVertex]:
    """Yield cone points visible from corner (t, k) strictly inside a wedge.

    The wedge defaults to the whole corner. Positions are developed into the chart of
    triangle t with the cone point at the origin. Cone points on the wedge boundary are
    not reported, and neither are the two other vertices of triangle t.
    """
    pos = surface.positions
    eps = settings.ANGLE_EPSILON
    r0 = surface.edges[t, k] if right is None else right
    l0 = -surface.edges[t, (k - 1) % 3] if left is None else left
    r0 = r0 / np.hypot(*r0)
    l0 = l0 / np.hypot(*l0)
    stack = [(t, (k + 1) % 3, 1, -pos[t, k], r0, l0)]
    while stack:
        tt, e, m, c, wr, wl = stack.pop()
        budget.spend()
        p0 = m * pos[tt, e] + c
        p1 = m * pos[tt, (e + 1) % 3] + c
        if _segment_distance(p0, p1) > bound + settings.GEOMETRY_EPSILON:
            continue
        u, j, sigma = surface.glue(tt, e)
        m2 = m * sigma
        c2 = p0 - m2 * pos[u, (j + 1) % 3]
        apex = m2 * pos[u, (j + 2) % 3] + c2
        norm = float(np.hypot(*apex))
        on_right = cross(wr, apex) / norm
        on_left = cross(apex, wl) / norm
        if on_right > eps and on_left > eps:
            yield VisibleVertex(apex, u, (j + 2) % 3, m2)
            direction = apex / norm
            stack.append((u, (j + 1) % 3, m2, c2, wr, direction))
            stack.append((u, (j + 2) % 3, m2, c2, direction, wl))
        elif on_right <= eps:
            stack.append((u, (j + 2) % 3, m2, c2, wr, wl))
        else:
            stack.append((u, (j + 1) % 3, m2, c2, wr, wl))


def _wrap_germ(germ: float, total: float) -> float:
    return 0.0 if total - germ < settings.ANGLE_EPSILON * 10.0 else germ


def make_connection(
    surface: HalfTranslationSurface,
    t: int,
    k: int,
    holonomy: np.ndarray,
    end_triangle: int,
    end_corner: int,
    sign: int,
) -> SaddleConnection:
    """Connection from corner (t, k) with developed holonomy ending at a given corner.

    Raises:
        TracingError: If the holonomy is zero or not finite.
    """
    length = float(np.hypot(*holonomy))
    if not math.isfinite(length) or length <= settings.GEOMETRY_EPSILON:
        error_msg = f"Saddle connection from corner ({t}, {k}) has no length"
        raise TracingError(error_msg)
    unit = holonomy / length
    start_vertex = int(surface.vertex_of_corner[t, k])
    end_vertex = int(surface.vertex_of_corner[end_triangle, end_corner])
    start_germ = _wrap_germ(surface.germ(t, k, unit), surface.vertex_angles[start_vertex])
    end_germ = _wrap_germ(
        surface.germ(end_triangle, end_corner, -sign * unit), surface.vertex_angles[end_vertex]
    )
    return SaddleConnection(
        start_vertex=start_vertex,
        start_triangle=t,
        start_corner=k,
        start_germ=start_germ,
        end_vertex=end_vertex,
        end_triangle=end_triangle,
        end_corner=end_corner,
        end_germ=end_germ,
        holonomy=(float(holonomy[0]), float(holonomy[1])),
        end_sign=sign,
        length=length,
    )


def edge_connection(surface: HalfTranslationSurface, t: int, k: int) -> SaddleConnection:
    """The triangulation edge (t, k) read as a saddle connection from its start vertex."""
    return make_connection(surface, t, k, surface.edges[t, k].copy(), t, (k + 1) % 3, 1)


def enumerate_saddle_connections(
    surface: HalfTranslationSurface,
    max_length: float,
    budget: int | None = None,
) -> list[SaddleConnection]:
    """List every saddle connection of length at most `max_length`.

    Args:
        surface (HalfTranslationSurface): Surface to search.
        max_length (float): Length bound L > 0.
        budget (int | None): Node budget, ENUMERATION_NODE_BUDGET by default.

    Returns:
        list[SaddleConnection]: Connections deduplicated up to reversal, sorted by length.

    Raises:
        BudgetExceededError: If the developed search visits too many triangles.
    """
    counter = NodeBudget(budget)
    bound = max_length + settings.GEOMETRY_EPSILON
    found: dict[tuple, SaddleConnection] = {}

    def keep(connection: SaddleConnection) -> None:
        if connection.key not in found:
            found[connection.key] = connection

    for t in range(surface.n_triangles):
        for k in range(3):
            if np.hypot(*surface.edges[t, k]) <= bound:
                keep(edge_connection(surface, t, k))
            for visible in explore_wedge(surface, t, k, bound, counter):
                if np.hypot(*visible.position) <= bound:
                    keep(
                        make_connection(
                            surface, t, k, visible.position, visible.triangle, visible.corner,
                            visible.sign,
                        )
                    )
    logger.debug(
        "Enumerated %d connections up to %.6g with %d nodes", len(found), max_length, counter.used
    )
    return sorted(found.values(), key=lambda c: (round(c.length, 9), c.key))


def connections_from(
    surface: HalfTranslationSurface,
    vertex: int,
    germ_lo: float,
    germ_hi: float,
    bound: float,
    budget: NodeBudget | None = None,
) -> list[tuple[float, float, VisibleVertex, int, int]]:
    """Cone points visible from `vertex` with germ strictly between two germs.

    The germ interval may wrap past the cone angle. Returns tuples
    `(germ offset from germ_lo, distance, visible, t, k)` where (t, k) is the corner the
    direction leaves from.
    """
    budget = NodeBudget() if budget is None else budget
    total = surface.vertex_angles[vertex]
    span = (germ_hi - germ_lo) % total
    if span == 0.0:
        span = total
    eps = settings.ANGLE_EPSILON
    result = []
    for t, k in surface.vertex_corners[vertex]:
        angle = surface.corner_angles[t, k]
        start = (surface.germ_offsets[t, k] - germ_lo) % total
        if start > total - eps or start + angle > total + eps:
            start -= total
        lo, hi = max(start, 0.0), min(start + angle, span)
        if hi - lo <= eps:
            continue
        unit = surface.edges[t, k] / np.hypot(*surface.edges[t, k])
        if 0.0 < start < span - eps and np.hypot(*surface.edges[t, k]) <= bound:
            visible = VisibleVertex(surface.edges[t, k].copy(), t, (k + 1) % 3, 1)
            result.append((start, float(np.hypot(*surface.edges[t, k])), visible, t, k))
        right = rotate(unit, lo - start)
        left = rotate(unit, hi - start)
        for visible in explore_wedge(surface, t, k, bound, budget, right=right, left=left):
            distance = float(np.hypot(*visible.position))
            if distance <= bound + settings.GEOMETRY_EPSILON:
                offset = start + ccw_angle(surface.edges[t, k], visible.position)
                result.append((offset, distance, visible, t, k))
    return result


@lru_cache(maxsize=8192)
def trace_connection(
    surface: HalfTranslationSurface, connection: SaddleConnection
) -> TracedSegment:
    """Crossing record of a saddle connection."""
    return trace_from_corner(
        surface,
        connection.start_triangle,
        connection.start_corner,
        connection.direction,
        connection.length,
    )


def junction_angles(
    surface: HalfTranslationSurface, incoming: SaddleConnection, outgoing: SaddleConnection
) -> tuple[float, float]:
    """Angles on the two sides where `incoming` ends and `outgoing` starts.

    The first angle is swept counterclockwise from the arriving segment to the leaving one.
    """
    vertex = incoming.end_vertex
    total = surface.vertex_angles[vertex]
    theta = (outgoing.start_germ - incoming.end_germ) % total
    return theta, total - theta


def _is_geodesic_junction(
    surface: HalfTranslationSurface, incoming: SaddleConnection, outgoing: SaddleConnection
) -> bool:
    if incoming.end_vertex != outgoing.start_vertex:
        return False
    first, second = junction_angles(surface, incoming, outgoing)
    eps = settings.ANGLE_EPSILON * 10.0
    return first >= math.pi - eps and second >= math.pi - eps


def shortest_closed_chain(
    surface: HalfTranslationSurface, connections: list[SaddleConnection]
) -> tuple[float, list[SaddleConnection]]:
    """Shortest closed chain of connections meeting at angles >= pi on both sides."""
    directed = list(connections) + [c.reversed() for c in connections]
    n = len(directed)
    if n == 0:
        return math.inf, []
    by_vertex: dict[int, list[int]] = {}
    for index, connection in enumerate(directed):
        by_vertex.setdefault(connection.start_vertex, []).append(index)
    rows, cols, weights = [], [], []
    best = (math.inf, [])
    for a, first in enumerate(directed):
        for b in by_vertex.get(first.end_vertex, []):
            if not _is_geodesic_junction(surface, first, directed[b]):
                continue
            if a == b:
                if first.length < best[0]:
                    best = (first.length, [first])
                continue
            rows.append(a)
            cols.append(b)
            weights.append(directed[b].length)
    if rows:
        graph = csr_matrix((weights, (rows, cols)), shape=(n, n))
        distances, predecessors = shortest_path(
            graph, method="D", directed=True, return_predecessors=True
        )
        for a, b in zip(rows, cols, strict=True):
            cycle = distances[b, a] + directed[b].length
            if cycle < best[0] - settings.GEOMETRY_EPSILON:
                path = [a]
                while path[-1] != b:
                    path.append(int(predecessors[b, path[-1]]))
                best = (float(cycle), [directed[i] for i in reversed(path)])
    return best


def ell_min(surface: HalfTranslationSurface) -> float:
    """Length of the shortest saddle connection.

    Every triangulation edge is a saddle connection, so searching up to the shortest edge
    is enough.
    """
    shortest_edge = float(np.hypot(surface.edges[..., 0], surface.edges[..., 1]).min())
    return enumerate_saddle_connections(surface, shortest_edge)[0].length


def shortest_lengths(surface: HalfTranslationSurface) -> ShortestLengths:
    """Compute ell_min, min(1, ell_min) and the systole.

    ell_min is certified because every triangulation edge is a saddle connection. The
    systole is the shortest closed chain of connections with geodesic junctions; a
    cylinder core is never shorter than the boundary chain of its cylinder, so chains
    cover both kinds of closed geodesics. The search radius doubles until it exceeds
    the chain it returns.

    Returns:
        ShortestLengths: The three lengths and the chain realising the systole.
    """
    shortest = ell_min(surface)
    radius = 2.0 * shortest
    for _ in range(12):
        pool = enumerate_saddle_connections(surface, radius)
        systole, chain = shortest_closed_chain(surface, pool)
        if systole <= radius + settings.GEOMETRY_EPSILON:
            break
        radius = 2.0 * radius if math.isinf(systole) else systole
    else:
        error_msg = f"No closed geodesic chain certified below radius {radius:.6g}"
        raise BudgetExceededError(error_msg)
    logger.debug("ell_min=%.9g systole=%.9g (radius %.6g)", shortest, systole, radius)
    return ShortestLengths(
        ell_min=shortest,
        ell_min_dagger=min(1.0, shortest),
        systole=systole,
        systole_chain=chain,
    )
