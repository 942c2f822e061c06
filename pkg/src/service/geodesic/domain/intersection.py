"""Transverse intersections of flat geodesics and the interval they give for i(alpha, beta)."""

import logging
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import MalformedCurveError, SharedArcUnresolvedError
from src.service.geodesic.domain.tighten import FlatGeodesic, GeodesicKind
from src.service.surface.domain.saddle import SaddleConnection
from src.service.surface.domain.surface_core import cross
from src.service.surface.domain.tracing import TracedSegment, piece_intersections

logger = logging.getLogger(__name__)


class IncidenceKind(str, Enum):
    """Non-transverse meeting of two geodesics."""

    CONE_POINT = "cone_point"
    SHARED_ARC = "shared_arc"
    COINCIDENT = "coincident"


class Incidence(BaseModel):
    """Meeting at a cone point or along common saddle connections.

    `linked` tells whether the two geodesics cross there, read off the cyclic order of
    their directions at the cone points where they part; it is unset for coincident
    geodesics.
    """

    model_config = ConfigDict(frozen=True)

    kind: IncidenceKind
    vertex: int | None = None
    linked: bool | None = None
    length: float = 0.0
    alpha_index: int | None = None
    beta_index: int | None = None


class IntersectionCount(BaseModel):
    """Transverse crossings located by arclength on each geodesic, plus incidences."""

    model_config = ConfigDict(frozen=True)

    transverse: int
    points: tuple[tuple[float, float], ...]
    incidences: tuple[Incidence, ...]


class IntersectionBounds(BaseModel):
    """Certified interval [I, I + n * m] containing the geometric intersection number."""

    lower: int
    upper: int
    transverse: int
    n: int
    m: int
    incidences: list[Incidence]


def _check_same_surface(alpha: FlatGeodesic, beta: FlatGeodesic) -> None:
    if alpha.surface is not beta.surface:
        error_msg = "Geodesics live on different surfaces"
        raise MalformedCurveError(error_msg)


def _starts(segments: list[TracedSegment]) -> list[float]:
    starts, total = [], 0.0
    for segment in segments:
        starts.append(total)
        total += segment.length
    return starts


def _crossing_points(
    alpha: FlatGeodesic, beta: FlatGeodesic
) -> list[tuple[float, float]]:
    surface = alpha.surface
    segments_a, segments_b = alpha.segments(), beta.segments()
    starts_a, starts_b = _starts(segments_a), _starts(segments_b)
    period_a = alpha.length if alpha.kind is GeodesicKind.CYLINDER else None
    period_b = beta.length if beta.kind is GeodesicKind.CYLINDER else None
    seen: dict[tuple[float, float], tuple[float, float]] = {}
    for index_a, segment_a in enumerate(segments_a):
        for index_b, segment_b in enumerate(segments_b):
            hits = piece_intersections(
                surface, segment_a, segment_b, period_a=period_a, period_b=period_b
            )
            for hit in hits:
                da, db = np.array(hit.direction_a), np.array(hit.direction_b)
                parallel = abs(cross(da, db)) <= settings.ANGLE_EPSILON * 1e3 * float(
                    np.hypot(*da) * np.hypot(*db)
                )
                if hit.overlap > 0.0 or parallel:
                    continue
                s_a = (starts_a[index_a] + hit.s_a) % alpha.length
                s_b = (starts_b[index_b] + hit.s_b) % beta.length
                key = (
                    round(s_a, 7) % round(alpha.length, 7),
                    round(s_b, 7) % round(beta.length, 7),
                )
                seen.setdefault(key, (s_a, s_b))
    return sorted(seen.values())


def _linked_at_cone_point(
    total: float, a_in: float, a_out: float, b_in: float, b_out: float
) -> bool:
    """Exactly one direction of beta lies strictly inside the sector from a_in to a_out."""
    span = (a_out - a_in) % total

    def inside(germ: float) -> bool:
        return 0.0 < (germ - a_in) % total < span

    return inside(b_in) != inside(b_out)


def _directed_key(connection: SaddleConnection) -> tuple:
    return connection.start_key, connection.end_key


def _run_length(keys_a: list[tuple], keys_b: list[tuple], j: int, k: int) -> int:
    """Length of the run of equal directed connections starting at (j, k), or 0."""
    n, m = len(keys_a), len(keys_b)
    if keys_a[j] != keys_b[k] or keys_a[(j - 1) % n] == keys_b[(k - 1) % m]:
        return 0
    run = 1
    while run < max(n, m) and keys_a[(j + run) % n] == keys_b[(k + run) % m]:
        run += 1
    return run


def _shared_runs(alpha: FlatGeodesic, beta: FlatGeodesic) -> list[Incidence]:
    """Maximal runs of common saddle connections, with the linking where they part."""
    surface = alpha.surface
    first = list(alpha.connections)
    n = len(first)
    keys_a = [_directed_key(c) for c in first]
    eps = settings.ANGLE_EPSILON * 1e3
    runs: list[Incidence] = []
    for orientation in (1, -1):
        if orientation == 1:
            second = list(beta.connections)
        else:
            second = [c.reversed() for c in reversed(beta.connections)]
        m = len(second)
        keys_b = [_directed_key(c) for c in second]
        if n == m and any(
            all(keys_a[j] == keys_b[(j + shift) % m] for j in range(n)) for shift in range(m)
        ):
            runs.append(Incidence(kind=IncidenceKind.COINCIDENT, length=alpha.length))
            break
        for j in range(n):
            for k in range(m):
                run = _run_length(keys_a, keys_b, j, k)
                if run == 0:
                    continue
                length = float(sum(first[(j + r) % n].length for r in range(run)))
                original = k if orientation == 1 else m - 1 - k
                if run >= min(n, m):
                    runs.append(
                        Incidence(
                            kind=IncidenceKind.COINCIDENT,
                            length=length,
                            alpha_index=j,
                            beta_index=original,
                        )
                    )
                    continue
                start, last = first[j], first[(j + run - 1) % n]
                total_start = surface.vertex_angles[start.start_vertex]
                total_end = surface.vertex_angles[last.end_vertex]
                theta_a = (first[(j - 1) % n].end_germ - start.start_germ) % total_start
                theta_b = (second[(k - 1) % m].end_germ - start.start_germ) % total_start
                phi_a = (first[(j + run) % n].start_germ - last.end_germ) % total_end
                phi_b = (second[(k + run) % m].start_germ - last.end_germ) % total_end
                if abs(theta_a - theta_b) <= eps or abs(phi_a - phi_b) <= eps:
                    error_msg = (
                        f"Shared arc starting at cone point {start.start_vertex} has "
                        "ambiguous linking"
                    )
                    raise SharedArcUnresolvedError(error_msg)
                runs.append(
                    Incidence(
                        kind=IncidenceKind.SHARED_ARC,
                        vertex=start.start_vertex,
                        linked=(theta_a < theta_b) == (phi_a < phi_b),
                        length=length,
                        alpha_index=j,
                        beta_index=original,
                    )
                )
    return runs


def _cone_point_incidences(
    alpha: FlatGeodesic, beta: FlatGeodesic
) -> list[Incidence]:
    surface = alpha.surface
    first, second = alpha.connections, beta.connections
    n, m = len(first), len(second)
    found = []
    decimals = settings.GERM_ROUND_DECIMALS
    for j in range(n):
        vertex = first[j].end_vertex
        total = surface.vertex_angles[vertex]
        a_in, a_out = first[j].end_germ, first[(j + 1) % n].start_germ
        for k in range(m):
            if second[k].end_vertex != vertex:
                continue
            b_in, b_out = second[k].end_germ, second[(k + 1) % m].start_germ
            germs_a = {round(a_in, decimals), round(a_out, decimals)}
            germs_b = {round(b_in, decimals), round(b_out, decimals)}
            if germs_a & germs_b:
                continue
            found.append(
                Incidence(
                    kind=IncidenceKind.CONE_POINT,
                    vertex=vertex,
                    linked=_linked_at_cone_point(total, a_in, a_out, b_in, b_out),
                    alpha_index=j,
                    beta_index=k,
                )
            )
    return found


def _coincident_cylinders(alpha: FlatGeodesic, beta: FlatGeodesic) -> bool:
    if alpha.kind is not GeodesicKind.CYLINDER or beta.kind is not GeodesicKind.CYLINDER:
        return False
    hits = piece_intersections(
        alpha.surface,
        alpha.representative,
        beta.representative,
        period_a=alpha.length,
        period_b=beta.length,
    )
    return any(hit.overlap > settings.GEOMETRY_EPSILON for hit in hits)


def transverse_count(alpha: FlatGeodesic, beta: FlatGeodesic) -> IntersectionCount:
    """Count interior transverse crossings of two flat geodesics.

    Meetings at cone points and along common saddle connections are not counted; they
    are returned as incidences with their local linking.

    Raises:
        MalformedCurveError: If the geodesics live on different surfaces.
        SharedArcUnresolvedError: If a shared arc parts in directions too close to order.
    """
    _check_same_surface(alpha, beta)
    points = _crossing_points(alpha, beta)
    incidences: list[Incidence] = []
    if _coincident_cylinders(alpha, beta):
        incidences.append(Incidence(kind=IncidenceKind.COINCIDENT, length=alpha.length))
    if alpha.kind is GeodesicKind.SINGULAR and beta.kind is GeodesicKind.SINGULAR:
        incidences.extend(_shared_runs(alpha, beta))
        incidences.extend(_cone_point_incidences(alpha, beta))
    logger.debug(
        "Counted %d transverse crossings and %d incidences", len(points), len(incidences)
    )
    return IntersectionCount(
        transverse=len(points), points=tuple(points), incidences=tuple(incidences)
    )


def intersection_bounds(alpha: FlatGeodesic, beta: FlatGeodesic) -> IntersectionBounds:
    """Interval [I, I + n * m] for the geometric intersection number.

    n and m count saddle connections, zero for cylinder geodesics.
    """
    count = transverse_count(alpha, beta)
    n, m = alpha.n_connections, beta.n_connections
    return IntersectionBounds(
        lower=count.transverse,
        upper=count.transverse + n * m,
        transverse=count.transverse,
        n=n,
        m=m,
        incidences=list(count.incidences),
    )


def count_crossings(geodesic: FlatGeodesic, segment: TracedSegment) -> int:
    """Transverse crossings of a geodesic with a straight segment, away from cone points."""
    surface = geodesic.surface
    period = geodesic.length if geodesic.kind is GeodesicKind.CYLINDER else None
    starts = _starts(geodesic.segments())
    seen: set[tuple[float, float]] = set()
    for index, piece in enumerate(geodesic.segments()):
        for hit in piece_intersections(surface, piece, segment, period_a=period):
            da, db = np.array(hit.direction_a), np.array(hit.direction_b)
            if hit.overlap > 0.0 or abs(cross(da, db)) <= settings.ANGLE_EPSILON * 1e3 * float(
                np.hypot(*da) * np.hypot(*db)
            ):
                continue
            s_a = (starts[index] + hit.s_a) % geodesic.length
            seen.add((round(s_a, 7) % round(geodesic.length, 7), round(hit.s_b, 7)))
    return len(seen)
