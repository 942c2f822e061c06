"""Straight-line tracing across the glued triangles of a surface."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import TracingError
from src.service.surface.domain.surface_core import HalfTranslationSurface, ccw_angle, cross

logger = logging.getLogger(__name__)


class SurfacePoint(BaseModel):
    """Point given by local coordinates in the chart of one triangle."""

    model_config = ConfigDict(frozen=True)

    triangle: int
    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


class Crossing(BaseModel):
    """Edge crossing: the ray leaves `triangle` through `edge` at edge parameter `parameter`."""

    model_config = ConfigDict(frozen=True)

    triangle: int
    edge: int
    parameter: float
    distance: float


class Piece(BaseModel):
    """Maximal straight piece inside one triangle, parametrised by arclength [s0, s1].

    `edge` is set when the piece runs along that edge of the triangle.
    """

    model_config = ConfigDict(frozen=True)

    triangle: int
    x0: float
    y0: float
    x1: float
    y1: float
    s0: float
    s1: float
    edge: int | None = None

    @property
    def start(self) -> np.ndarray:
        return np.array([self.x0, self.y0])

    @property
    def end(self) -> np.ndarray:
        return np.array([self.x1, self.y1])


class SingularityHit(BaseModel):
    """The ray met a cone point and stopped there."""

    model_config = ConfigDict(frozen=True)

    vertex: int
    triangle: int
    corner: int
    distance: float
    direction: tuple[float, float]


class TracedSegment(BaseModel):
    """Developed straight segment on a surface.

    `direction` is the unit direction in the start chart. `flipped` records an odd number
    of flip gluings crossed, after which the direction is only defined up to sign.
    """

    model_config = ConfigDict(frozen=True)

    start: SurfacePoint
    direction: tuple[float, float]
    length: float
    traveled: float
    end: SurfacePoint
    end_direction: tuple[float, float]
    crossings: tuple[Crossing, ...]
    pieces: tuple[Piece, ...]
    hit: SingularityHit | None = None
    flipped: bool = False
    start_vertex: int | None = None

    @property
    def complete(self) -> bool:
        return self.hit is None


def _exit_edge(
    pos: np.ndarray, p: np.ndarray, d: np.ndarray, entry: int | None, eps: float
) -> tuple[int, float, float] | None:
    best = None
    for k in range(3):
        if k == entry:
            continue
        a = pos[k]
        e = pos[(k + 1) % 3] - a
        denom = cross(d, e)
        if denom <= 0.0:
            continue
        s = cross(a - p, e) / denom
        if s < -10.0 * eps:
            continue
        lam = cross(a - p, d) / denom
        if best is None or s < best[1]:
            best = (k, s, lam)
    return best


def _vertex_on_segment(
    pos: np.ndarray, p: np.ndarray, d: np.ndarray, reach: float, skip: int | None, eps: float
) -> tuple[int, float] | None:
    found = None
    for q in range(3):
        if q == skip:
            continue
        w = pos[q] - p
        along = float(w @ d)
        if along < -eps or along > reach + eps:
            continue
        if abs(cross(d, w)) < eps and (found is None or along < found[1]):
            found = (q, max(along, 0.0))
    return found


def _walk(
    surface: HalfTranslationSurface,
    triangle: int,
    point: np.ndarray,
    direction: np.ndarray,
    length: float,
    *,
    entry: int | None = None,
    skip: int | None = None,
) -> dict:
    if not math.isfinite(length) or length < 0.0:
        error_msg = f"Length of a ray must be finite and non-negative, got {length}"
        raise TracingError(error_msg)
    eps = settings.GEOMETRY_EPSILON * max(1.0, length)
    t, p, d = triangle, np.array(point, dtype=float), np.array(direction, dtype=float)
    if length <= eps:
        return _result(t, p, d, 0.0, [], [], None, 0)
    crossings: list[Crossing] = []
    pieces: list[Piece] = []
    traveled = 0.0
    flips = 0
    for _ in range(settings.TRACE_STEP_BUDGET):
        pos = surface.positions[t]
        remaining = length - traveled
        exit_ = _exit_edge(pos, p, d, entry, settings.GEOMETRY_EPSILON)
        if exit_ is None:
            error_msg = f"Ray cannot leave triangle {t} from {p.tolist()} along {d.tolist()}"
            raise TracingError(error_msg)
        k, s_exit, lam = exit_
        s_exit = max(s_exit, 0.0)
        reach = min(s_exit, remaining)
        vertex = _vertex_on_segment(pos, p, d, reach, skip, eps)
        if vertex is not None:
            corner, along = vertex
            end = p + along * d
            pieces.append(_piece(t, p, end, traveled, traveled + along))
            hit = SingularityHit(
                vertex=int(surface.vertex_of_corner[t, corner]),
                triangle=t,
                corner=corner,
                distance=traveled + along,
                direction=(float(d[0]), float(d[1])),
            )
            return _result(t, end, d, traveled + along, crossings, pieces, hit, flips)
        if remaining <= s_exit:
            end = p + remaining * d
            pieces.append(_piece(t, p, end, traveled, length))
            return _result(t, end, d, length, crossings, pieces, None, flips)
        exit_point = p + s_exit * d
        pieces.append(_piece(t, p, exit_point, traveled, traveled + s_exit))
        traveled += s_exit
        crossings.append(Crossing(triangle=t, edge=k, parameter=lam, distance=traveled))
        u, j, sigma, c = surface.transition(t, k)
        flips += sigma == -1
        p = sigma * exit_point + c
        d = sigma * d
        t, entry, skip = u, j, None
    error_msg = f"Trace exceeded {settings.TRACE_STEP_BUDGET} steps"
    raise TracingError(error_msg)


def _piece(
    t: int, p0: np.ndarray, p1: np.ndarray, s0: float, s1: float, edge: int | None = None
) -> Piece:
    return Piece(
        triangle=t,
        x0=float(p0[0]),
        y0=float(p0[1]),
        x1=float(p1[0]),
        y1=float(p1[1]),
        s0=s0,
        s1=s1,
        edge=edge,
    )


def _result(
    t: int,
    end: np.ndarray,
    d: np.ndarray,
    traveled: float,
    crossings: list[Crossing],
    pieces: list[Piece],
    hit: SingularityHit | None,
    flips: int,
) -> dict:
    return {
        "end": SurfacePoint(triangle=t, x=float(end[0]), y=float(end[1])),
        "end_direction": (float(d[0]), float(d[1])),
        "traveled": traveled,
        "crossings": tuple(crossings),
        "pieces": tuple(pieces),
        "hit": hit,
        "flipped": flips % 2 == 1,
    }


def _unit(direction: np.ndarray | tuple[float, float]) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    norm = float(np.hypot(*d))
    if not math.isfinite(norm) or norm <= settings.GEOMETRY_EPSILON:
        error_msg = f"Direction of a ray must be finite and nonzero, got {d.tolist()}"
        raise TracingError(error_msg)
    return d / norm


def trace_ray(
    surface: HalfTranslationSurface,
    start: SurfacePoint,
    direction: np.ndarray | tuple[float, float],
    length: float,
) -> TracedSegment:
    """Trace a straight segment from a point inside a triangle or on its boundary.

    Args:
        surface (HalfTranslationSurface): Surface to trace on.
        start (SurfacePoint): Start point in local coordinates.
        direction: Nonzero direction in the start chart.
        length (float): Length to travel.

    Returns:
        TracedSegment: The traced segment. It stops early with `hit` set when the ray
        meets a cone point within GEOMETRY_EPSILON.
    """
    d = _unit(direction)
    p = start.as_array()
    pos = surface.positions[start.triangle]
    for q in range(3):
        if np.hypot(*(pos[q] - p)) < settings.GEOMETRY_EPSILON:
            return trace_from_corner(surface, start.triangle, q, d, length)
    walked = _walk(surface, start.triangle, p, d, length)
    return TracedSegment(
        start=start, direction=(float(d[0]), float(d[1])), length=length, **walked
    )


def trace_from_corner(
    surface: HalfTranslationSurface,
    triangle: int,
    corner: int,
    direction: np.ndarray | tuple[float, float],
    length: float,
) -> TracedSegment:
    """Trace a ray leaving the cone point at a triangle corner.

    The direction must point into the corner, edges included. Rays along one of the two
    edges at the corner are traced along that edge.
    """
    d = _unit(direction)
    t, k = triangle, corner
    pos = surface.positions[t]
    start = SurfacePoint(triangle=t, x=float(pos[k][0]), y=float(pos[k][1]))
    vertex = int(surface.vertex_of_corner[t, k])
    angle = ccw_angle(surface.edges[t, k], d)
    eps = settings.ANGLE_EPSILON * 10.0
    if angle < eps or angle > 2.0 * math.pi - eps:
        walked = _along_edge(surface, t, k, forward=True, length=length)
    elif abs(angle - surface.corner_angles[t, k]) < eps:
        walked = _along_edge(surface, t, (k - 1) % 3, forward=False, length=length)
    elif angle > surface.corner_angles[t, k]:
        error_msg = f"Direction {d.tolist()} does not point into corner {(t, k)}"
        raise TracingError(error_msg)
    else:
        walked = _walk(surface, t, pos[k], d, length, skip=k)
    return TracedSegment(
        start=start,
        direction=(float(d[0]), float(d[1])),
        length=length,
        start_vertex=vertex,
        **walked,
    )


def _along_edge(
    surface: HalfTranslationSurface, t: int, edge: int, *, forward: bool, length: float
) -> dict:
    pos = surface.positions[t]
    vector = surface.edges[t, edge]
    edge_length = float(np.hypot(*vector))
    unit = vector / edge_length
    origin, target_corner = (pos[edge], (edge + 1) % 3) if forward else (pos[(edge + 1) % 3], edge)
    d = unit if forward else -unit
    eps = settings.GEOMETRY_EPSILON * max(1.0, length)
    if length >= edge_length - eps:
        end = pos[target_corner]
        hit = SingularityHit(
            vertex=int(surface.vertex_of_corner[t, target_corner]),
            triangle=t,
            corner=target_corner,
            distance=edge_length,
            direction=(float(d[0]), float(d[1])),
        )
        piece = _piece(t, origin, end, 0.0, edge_length, edge)
        return _result(t, end, d, edge_length, [], [piece], hit, 0)
    end = origin + length * d
    return _result(t, end, d, length, [], [_piece(t, origin, end, 0.0, length, edge)], None, 0)


class PieceIntersection(BaseModel):
    """Common point of two traces away from cone points, located by arclength on each.

    For a collinear overlap of positive length, `overlap` holds the arclength span on
    the first trace and `s_a`, `s_b` locate the start of the overlap.
    """

    model_config = ConfigDict(frozen=True)

    s_a: float
    s_b: float
    triangle: int
    direction_a: tuple[float, float]
    direction_b: tuple[float, float]
    overlap: float = 0.0


def _chart_pieces(
    surface: HalfTranslationSurface, trace: TracedSegment
) -> dict[int, list[tuple[np.ndarray, np.ndarray, float, float]]]:
    """Pieces by triangle; pieces along an edge also appear in the neighbouring chart."""
    charts: dict[int, list] = {}
    for piece in trace.pieces:
        if piece.s1 - piece.s0 <= 0.0:
            continue
        charts.setdefault(piece.triangle, []).append((piece.start, piece.end, piece.s0, piece.s1))
        if piece.edge is not None:
            u, _, sigma, c = surface.transition(piece.triangle, piece.edge)
            charts.setdefault(u, []).append(
                (sigma * piece.start + c, sigma * piece.end + c, piece.s0, piece.s1)
            )
    return charts


def _near_corner(pos: np.ndarray, point: np.ndarray, eps: float) -> bool:
    return bool((np.hypot(*(pos - point).T) < eps).any())


def piece_intersections(
    surface: HalfTranslationSurface,
    first: TracedSegment,
    second: TracedSegment,
    *,
    period_a: float | None = None,
    period_b: float | None = None,
) -> list[PieceIntersection]:
    """Intersection points of two traces that are not cone points.

    Arclengths are reduced modulo the given periods for closed curves, and points seen
    from two charts are reported once.
    """
    eps = settings.GEOMETRY_EPSILON * 100.0
    found: dict[tuple[float, float], PieceIntersection] = {}
    charts_a = _chart_pieces(surface, first)
    charts_b = _chart_pieces(surface, second)

    def reduce(s: float, period: float | None) -> float:
        if period is None:
            return s
        s %= period
        return 0.0 if period - s < eps else s

    for t in charts_a.keys() & charts_b.keys():
        pos = surface.positions[t]
        for p0, p1, a0, a1 in charts_a[t]:
            r = p1 - p0
            for q0, q1, b0, b1 in charts_b[t]:
                q = q1 - q0
                denom = cross(r, q)
                scale = float(np.hypot(*r) * np.hypot(*q))
                if abs(denom) > eps * scale:
                    lam = cross(q0 - p0, q) / denom
                    mu = cross(q0 - p0, r) / denom
                    if not (-eps <= lam <= 1.0 + eps and -eps <= mu <= 1.0 + eps):
                        continue
                    point = p0 + lam * r
                    if _near_corner(pos, point, eps):
                        continue
                    s_a = reduce(a0 + lam * (a1 - a0), period_a)
                    s_b = reduce(b0 + mu * (b1 - b0), period_b)
                    overlap = 0.0
                elif abs(cross(q0 - p0, r)) <= eps * float(np.hypot(*r)):
                    unit = r / np.hypot(*r)
                    lo_b, hi_b = sorted((float((q0 - p0) @ unit), float((q1 - p0) @ unit)))
                    lo, hi = max(0.0, lo_b), min(float(np.hypot(*r)), hi_b)
                    if hi < lo - eps:
                        continue
                    point = p0 + lo * unit
                    if hi - lo <= eps and _near_corner(pos, point, eps):
                        continue
                    lam = lo / float(np.hypot(*r))
                    mu = float((point - q0) @ q) / float(q @ q)
                    s_a = reduce(a0 + lam * (a1 - a0), period_a)
                    s_b = reduce(b0 + mu * (b1 - b0), period_b)
                    overlap = max(0.0, hi - lo)
                else:
                    continue
                key = (round(s_a, 7) + 0.0, round(s_b, 7) + 0.0)
                if key in found and found[key].overlap >= overlap:
                    continue
                found[key] = PieceIntersection(
                    s_a=s_a,
                    s_b=s_b,
                    triangle=t,
                    direction_a=(float(r[0]), float(r[1])),
                    direction_b=(float(q[0]), float(q[1])),
                    overlap=overlap,
                )
    return sorted(found.values(), key=lambda x: (x.s_a, x.s_b))
