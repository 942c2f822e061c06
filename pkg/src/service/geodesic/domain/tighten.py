"""Flat geodesic representatives of curve classes by pulling developed sleeves taut.

The crossing word is developed several periods long into the plane. The shortest path
through the developed strip bends only at cone points; a bend whose outer angle is
below pi is rerouted to the other side of its cone point and the word is developed
again. Once every bend is geodesic, one period of the path is read off as a chain of
saddle connections, or, when the middle periods meet no cone point, as a cylinder.
"""

import logging
import math
from enum import Enum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.config import settings
from src.service.exceptions import BudgetExceededError, NullHomotopicError, TracingError
from src.service.geodesic.domain.curves import CurveClass, reduce_word
from src.service.geodesic.domain.cylinders import CylinderData, rot90, sweep_cylinder
from src.service.surface.domain.saddle import (
    SaddleConnection,
    junction_angles,
    make_connection,
    trace_connection,
)
from src.service.surface.domain.surface_core import HalfTranslationSurface, ccw_angle, cross
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment, trace_ray

logger = logging.getLogger(__name__)


class GeodesicKind(str, Enum):
    """Shape of a flat geodesic representative."""

    CYLINDER = "cylinder"
    SINGULAR = "singular"


class FlatGeodesic(BaseModel):
    """Closed flat geodesic on a surface.

    A cylinder geodesic is the closed line through the middle of its maximal cylinder.
    A singular geodesic is a cyclic chain of saddle connections; `junctions[j]` holds the
    two angles where `connections[j]` meets `connections[j + 1]`.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    surface: HalfTranslationSurface = Field(exclude=True, repr=False)
    kind: GeodesicKind
    word: CurveClass
    length: float
    connections: tuple[SaddleConnection, ...] = ()
    junctions: tuple[tuple[float, float], ...] = ()
    cylinder: CylinderData | None = None
    representative: TracedSegment | None = None
    rounds: int = 0

    @property
    def n_connections(self) -> int:
        """Number of saddle connections, zero for cylinder geodesics."""
        return len(self.connections)

    @property
    def holonomies(self) -> list[np.ndarray]:
        """Holonomy of each saddle connection, or of the core for a cylinder."""
        if self.kind is GeodesicKind.CYLINDER:
            return [np.array(self.representative.direction) * self.length]
        return [np.array(c.holonomy) for c in self.connections]

    def segments(self) -> list[TracedSegment]:
        """Traces making up the geodesic, in order."""
        if self.kind is GeodesicKind.CYLINDER:
            return [self.representative]
        return [trace_connection(self.surface, c) for c in self.connections]


class Bend(NamedTuple):
    """Vertex of the taut path: portal `portal`, its left or right endpoint."""

    portal: int
    left: bool
    position: np.ndarray


class BendAngles(NamedTuple):
    """Angles of a bend on the side swept by the developed strip."""

    inner: float
    total: float
    vertex: int
    ccw: bool
    corner_in: tuple[int, int, int]
    corner_out: tuple[int, int, int]


class Sleeve:
    """Charts of the triangles met by a word repeated `periods` times, laid out in the plane.

    A point with local coordinates z in sleeve triangle s sits at `signs[s] * z +
    offsets[s]`. Portal s is the edge crossed from sleeve triangle s into s + 1.
    """

    def __init__(self, surface: HalfTranslationSurface, word: CurveClass, periods: int) -> None:
        self.surface = surface
        self.word = word.crossings
        self.period = len(self.word)
        self.size = self.period * periods
        n = self.period
        self.triangles = [self.word[s % n][0] for s in range(self.size + 1)]
        self.signs = np.ones(self.size + 1, dtype=int)
        self.offsets = np.zeros((self.size + 1, 2))
        for s in range(self.size):
            t, e = self.word[s % n]
            _, _, sigma, c = surface.transition(t, e)
            self.signs[s + 1] = self.signs[s] * sigma
            self.offsets[s + 1] = self.offsets[s] - self.signs[s + 1] * c
        self.right = np.zeros((self.size, 2))
        self.left = np.zeros((self.size, 2))
        for s in range(self.size):
            t, e = self.word[s % n]
            self.right[s] = self.develop(s, surface.positions[t, e])
            self.left[s] = self.develop(s, surface.positions[t, (e + 1) % 3])

    def develop(self, s: int, local: np.ndarray) -> np.ndarray:
        return self.signs[s] * np.asarray(local) + self.offsets[s]

    def localize(self, s: int, point: np.ndarray) -> np.ndarray:
        return self.signs[s] * (np.asarray(point) - self.offsets[s])

    def deck(self, point: np.ndarray) -> np.ndarray:
        """Image of a developed point one period later."""
        return self.signs[self.period] * np.asarray(point) + self.offsets[self.period]

    def centroid(self, s: int) -> np.ndarray:
        return self.develop(s, self.surface.positions[self.triangles[s]].mean(axis=0))

    def corner_at(self, s: int, point: np.ndarray, eps: float) -> int | None:
        t = self.triangles[s]
        for q in range(3):
            if np.hypot(*(self.develop(s, self.surface.positions[t, q]) - point)) <= eps:
                return q
        return None

    def touches(self, portal: int, point: np.ndarray, eps: float) -> bool:
        if not 0 <= portal < self.size:
            return False
        return bool(
            np.hypot(*(self.right[portal] - point)) <= eps
            or np.hypot(*(self.left[portal] - point)) <= eps
        )


def _side(apex: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Sine of the angle from apex->a to apex->b, zero when either is degenerate."""
    u, v = a - apex, b - apex
    nu, nv = float(np.hypot(*u)), float(np.hypot(*v))
    if nu <= settings.GEOMETRY_EPSILON or nv <= settings.GEOMETRY_EPSILON:
        return 0.0
    return cross(u, v) / (nu * nv)


def pull_taut(sleeve: Sleeve, start: np.ndarray, end: np.ndarray) -> list[Bend]:
    """Bends of the shortest path from `start` to `end` through the portals of a sleeve."""
    eps = settings.ANGLE_EPSILON * 100.0
    same = settings.GEOMETRY_EPSILON * 100.0
    points = [(start, start)] + [
        (sleeve.left[s], sleeve.right[s]) for s in range(sleeve.size)
    ] + [(end, end)]
    apex = left = right = start
    apex_i = left_i = right_i = 0
    bends: list[Bend] = []
    i, steps = 1, 0
    while i < len(points):
        steps += 1
        if steps > settings.TRACE_STEP_BUDGET:
            error_msg = "Taut path through the sleeve did not settle"
            raise TracingError(error_msg)
        new_left, new_right = points[i]
        if _side(apex, right, new_right) >= -eps:
            crossing_left = _side(apex, left, new_right)
            collinear_nearer = abs(crossing_left) <= eps and np.hypot(
                *(new_right - apex)
            ) < np.hypot(*(left - apex))
            if (
                np.hypot(*(apex - right)) <= same
                or crossing_left < -eps
                or collinear_nearer
            ):
                right, right_i = new_right, i
            else:
                bends.append(Bend(portal=left_i - 1, left=True, position=left))
                apex, apex_i = left, left_i
                left, right, right_i = apex, apex, apex_i
                i = apex_i + 1
                continue
        if _side(apex, left, new_left) <= eps:
            crossing_right = _side(apex, right, new_left)
            collinear_nearer = abs(crossing_right) <= eps and np.hypot(
                *(new_left - apex)
            ) < np.hypot(*(right - apex))
            if (
                np.hypot(*(apex - left)) <= same
                or crossing_right > eps
                or collinear_nearer
            ):
                left, left_i = new_left, i
            else:
                bends.append(Bend(portal=right_i - 1, left=False, position=right))
                apex, apex_i = right, right_i
                left, right, left_i = apex, apex, apex_i
                i = apex_i + 1
                continue
        i += 1
    # the end point can be appended as an apex; it is not a bend
    return merge_bends([b for b in bends if 0 <= b.portal < sleeve.size], same)


def merge_bends(bends: list[Bend], eps: float) -> list[Bend]:
    """Keep the first of every run of bends at the same developed cone point.

    The funnel can pivot on one cone point more than once while the portals around it go
    by; the run is one junction of the taut path.
    """
    merged: list[Bend] = []
    for bend in bends:
        if merged and np.hypot(*(bend.position - merged[-1].position)) <= eps:
            continue
        merged.append(bend)
    return merged


def _fan_range(sleeve: Sleeve, portal: int, point: np.ndarray, eps: float) -> tuple[int, int]:
    first = last = portal
    while sleeve.touches(first - 1, point, eps):
        first -= 1
    while sleeve.touches(last + 1, point, eps):
        last += 1
    return first, last


def bend_angles(
    sleeve: Sleeve, bends: list[Bend], index: int, start_portal: int = -1
) -> BendAngles:
    """Angle swept through the strip between the arriving and leaving path at a bend.

    The arriving segment reaches the cone point in the first triangle of the fan it can
    enter, and the leaving segment departs from the last one it can still reach.
    """
    surface = sleeve.surface
    eps = settings.GEOMETRY_EPSILON * 100.0
    bend = bends[index]
    point = bend.position
    first, last = _fan_range(sleeve, bend.portal, point, eps)
    previous = bends[index - 1] if index > 0 else None
    following = bends[index + 1] if index + 1 < len(bends) else None
    s_in = max(first, (previous.portal if previous else start_portal) + 1)
    s_out = min(last + 1, following.portal if following else sleeve.size)
    back = (previous.position if previous else sleeve.centroid(0)) - point
    ahead = (following.position if following else sleeve.centroid(sleeve.size)) - point
    corners: dict[int, tuple[int, int, int]] = {}
    swept: dict[int, float] = {}
    cumulative = 0.0
    for s in range(first, last + 2):
        t = sleeve.triangles[s]
        q = sleeve.corner_at(s, point, eps)
        if q is None:
            error_msg = f"Sleeve triangle {s} does not touch the bend at portal {bend.portal}"
            raise TracingError(error_msg)
        corners[s] = (s, t, q)
        swept[s] = cumulative
        cumulative += float(surface.corner_angles[t, q])
    _, t0, q0 = corners[first]
    ccw = sleeve.word[first % sleeve.period][1] != q0

    def unwrapped(s: int, direction: np.ndarray) -> float:
        _, t, q = corners[s]
        angle = float(surface.corner_angles[t, q])
        local = ccw_angle(surface.edges[t, q], sleeve.signs[s] * direction)
        if local > angle + settings.ANGLE_EPSILON * 10.0:
            local = 0.0 if local > math.pi else angle
        return swept[s] + (local if ccw else angle - local)

    vertex = int(surface.vertex_of_corner[t0, q0])
    return BendAngles(
        inner=abs(unwrapped(s_out, ahead) - unwrapped(s_in, back)),
        total=float(surface.vertex_angles[vertex]),
        vertex=vertex,
        ccw=ccw,
        corner_in=corners[s_in],
        corner_out=corners[s_out],
    )


def reroute(
    surface: HalfTranslationSurface, sleeve: Sleeve, angles: BendAngles
) -> CurveClass:
    """Move the part of the word turning around a cone point to its other side."""
    s_in, t, k = angles.corner_in
    s_out = angles.corner_out[0]
    turned = s_out - s_in
    n = sleeve.period
    if turned >= n:
        error_msg = f"Curve collapses onto cone point {angles.vertex}"
        raise NullHomotopicError(error_msg)
    word = sleeve.word[s_in % n :] + sleeve.word[: s_in % n]
    n_corners = len(surface.vertex_corners[angles.vertex])
    net = turned - n_corners
    ccw = angles.ccw if net > 0 else not angles.ccw
    detour = []
    for _ in range(abs(net)):
        if ccw:
            detour.append((t, (k - 1) % 3))
            t, k = surface.next_ccw_corner(t, k)
        else:
            detour.append((t, k))
            t, k = surface.next_cw_corner(t, k)
    reduced = reduce_word(surface, detour + list(word[turned:]))
    if not reduced:
        error_msg = "Rerouted word cancels to the trivial curve"
        raise NullHomotopicError(error_msg)
    return CurveClass(crossings=tuple(reduced))


def _portal_crossing(sleeve: Sleeve, nodes: list[tuple[np.ndarray, int]], p: int) -> np.ndarray:
    """Point where the taut path meets portal p."""
    for (a, a_portal), (b, b_portal) in zip(nodes, nodes[1:], strict=False):
        if a_portal == p:
            return a
        if a_portal < p < b_portal:
            u, w = b - a, sleeve.right[p] - sleeve.left[p]
            return a + cross(sleeve.left[p] - a, w) / cross(u, w) * u
    return nodes[-1][0]


def period_length(
    sleeve: Sleeve, start: np.ndarray, bends: list[Bend], end: np.ndarray
) -> float:
    """Length of one period of the taut path, measured in the middle of the sleeve."""
    nodes = [(start, -1)] + [(b.position, b.portal) for b in bends] + [(end, sleeve.size)]
    n = sleeve.period
    first = (sleeve.size // n // 2) * n
    points = [_portal_crossing(sleeve, nodes, first)]
    points += [b.position for b in bends if first < b.portal < first + n]
    points.append(_portal_crossing(sleeve, nodes, first + n))
    return float(sum(np.hypot(*(b - a)) for a, b in zip(points, points[1:], strict=False)))


def _surface_point(sleeve: Sleeve, s: int, point: np.ndarray) -> SurfacePoint:
    local = sleeve.localize(s, point)
    return SurfacePoint(triangle=sleeve.triangles[s], x=float(local[0]), y=float(local[1]))


def _cylinder(
    surface: HalfTranslationSurface,
    sleeve: Sleeve,
    bends: list[Bend],
    word: CurveClass,
    rounds: int,
) -> FlatGeodesic:
    n = sleeve.period
    if sleeve.signs[n] != 1:
        error_msg = "Curve with half-turn holonomy meets no cone point and collapses"
        raise NullHomotopicError(error_msg)
    holonomy = sleeve.offsets[n]
    circumference = float(np.hypot(*holonomy))
    if circumference <= settings.GEOMETRY_EPSILON:
        error_msg = "Curve has zero holonomy and collapses to a point"
        raise NullHomotopicError(error_msg)
    start = sleeve.centroid(0)
    end = sleeve.centroid(sleeve.size)
    before = [b for b in bends if b.portal < 2 * n]
    after = [b for b in bends if b.portal >= 2 * n]
    a = before[-1].position if before else start
    b = after[0].position if after else end
    direction = holonomy / circumference
    for s in range(2 * n, sleeve.size - n, max(1, n // 2)):
        # point of the taut segment inside portal s
        edge = sleeve.left[s] - sleeve.right[s]
        denom = cross(b - a, edge)
        if abs(denom) <= settings.GEOMETRY_EPSILON:
            continue
        lam = cross(sleeve.right[s] - a, edge) / denom
        if not 0.0 < lam < 1.0:
            continue
        point = a + lam * (b - a)
        through = point + 1e-3 * (sleeve.centroid(s) - point)
        try:
            data, representative = sweep_cylinder(
                surface,
                _surface_point(sleeve, s, through),
                sleeve.signs[s] * direction,
                circumference,
            )
        except TracingError:
            logger.debug("Sweep from sleeve portal %d failed, trying the next one", s)
            continue
        return FlatGeodesic(
            surface=surface,
            kind=GeodesicKind.CYLINDER,
            word=word,
            length=circumference,
            cylinder=data,
            representative=representative,
            rounds=rounds,
        )
    error_msg = "Could not place a closed line inside the cylinder of the curve"
    raise TracingError(error_msg)


def _cylinder_from_boundary(
    surface: HalfTranslationSurface,
    word: CurveClass,
    chain: list[SaddleConnection],
    ccw: bool,
    rounds: int,
) -> FlatGeodesic:
    """Cylinder of a chain whose junctions are all flat on the same side."""
    first = chain[0]
    trace = trace_connection(surface, first)
    middle = 0.5 * first.length
    piece = next(p for p in trace.pieces if p.s0 <= middle <= p.s1 and p.s1 > p.s0)
    step = (piece.end - piece.start) / (piece.s1 - piece.s0)
    point = piece.start + (middle - piece.s0) * step
    normal = -rot90(step) if ccw else rot90(step)
    push = 1e3 * settings.GEOMETRY_EPSILON * max(1.0, first.length)
    start = SurfacePoint(triangle=piece.triangle, x=float(point[0]), y=float(point[1]))
    pushed = trace_ray(surface, start, normal, push)
    end_normal = np.array(pushed.end_direction)
    along = rot90(end_normal) if ccw else -rot90(end_normal)
    circumference = float(sum(c.length for c in chain))
    data, representative = sweep_cylinder(surface, pushed.end, along, circumference)
    return FlatGeodesic(
        surface=surface,
        kind=GeodesicKind.CYLINDER,
        word=word,
        length=circumference,
        cylinder=data,
        representative=representative,
        rounds=rounds,
    )


def _chain(
    surface: HalfTranslationSurface,
    sleeve: Sleeve,
    bends: list[Bend],
    word: CurveClass,
    rounds: int,
) -> FlatGeodesic:
    n = sleeve.period
    eps = settings.GEOMETRY_EPSILON * 1e3 * max(1.0, float(np.hypot(*sleeve.offsets[n])))
    first = next(i for i, b in enumerate(bends) if b.portal >= 2 * n)
    angles_first = bend_angles(sleeve, bends, first)
    image = sleeve.deck(bends[first].position)
    last = None
    for j in range(first + 1, len(bends)):
        angles_j = bend_angles(sleeve, bends, j)
        if angles_j.vertex == angles_first.vertex and np.hypot(
            *(bends[j].position - image)
        ) <= eps:
            last = j
            break
    if last is None:
        error_msg = "Taut path is not periodic over the developed periods"
        raise TracingError(error_msg)
    chain: list[SaddleConnection] = []
    all_angles = [bend_angles(sleeve, bends, j) for j in range(first, last + 1)]
    for j in range(first, last):
        s_out, t_out, k_out = all_angles[j - first].corner_out
        s_in, t_in, k_in = all_angles[j + 1 - first].corner_in
        developed = bends[j + 1].position - bends[j].position
        chain.append(
            make_connection(
                surface,
                t_out,
                k_out,
                sleeve.signs[s_out] * developed,
                t_in,
                k_in,
                int(sleeve.signs[s_in] * sleeve.signs[s_out]),
            )
        )
    inner = all_angles[1:]
    flat = settings.ANGLE_EPSILON * 1e3
    if all(abs(a.inner - math.pi) <= flat for a in inner) and len({a.ccw for a in inner}) == 1:
        return _cylinder_from_boundary(surface, word, chain, inner[0].ccw, rounds)
    junctions = tuple(
        junction_angles(surface, chain[j], chain[(j + 1) % len(chain)]) for j in range(len(chain))
    )
    return FlatGeodesic(
        surface=surface,
        kind=GeodesicKind.SINGULAR,
        word=word,
        length=float(sum(c.length for c in chain)),
        connections=tuple(chain),
        junctions=junctions,
        rounds=rounds,
    )


def tighten(surface: HalfTranslationSurface, curve: CurveClass) -> FlatGeodesic:
    """Flat geodesic representative of a curve class.

    Args:
        surface (HalfTranslationSurface): Surface the word lives on.
        curve (CurveClass): Reduced crossing word, see `validate_curve`.

    Returns:
        FlatGeodesic: The mid-cylinder line for cylinder curves, otherwise the chain of
        saddle connections with angles at least pi on both sides of every junction.

    Raises:
        NullHomotopicError: If the curve collapses to a point.
        BudgetExceededError: If rerouting does not settle within TIGHTEN_MAX_ROUNDS, or a
            round shortens the path by less than TIGHTEN_MIN_STEP.
    """
    word = curve
    periods = max(settings.TIGHTEN_PERIODS, 6)
    previous_length = math.inf
    for rounds in range(settings.TIGHTEN_MAX_ROUNDS):
        sleeve = Sleeve(surface, word, periods - 1)
        n = sleeve.period
        start, end = sleeve.centroid(0), sleeve.centroid(sleeve.size)
        bends = pull_taut(sleeve, start, end)
        length = period_length(sleeve, start, bends, end)
        stalled = rounds > 0 and previous_length - length < settings.TIGHTEN_MIN_STEP
        previous_length = length
        violation = None
        for index, bend in enumerate(bends):
            if not n <= bend.portal < sleeve.size - n:
                continue
            angles = bend_angles(sleeve, bends, index)
            if angles.total - angles.inner < math.pi - settings.ANGLE_EPSILON * 1e3:
                violation = angles
                break
        if violation is None:
            if not any(2 * n <= b.portal < sleeve.size - 2 * n for b in bends):
                return _cylinder(surface, sleeve, bends, word, rounds)
            return _chain(surface, sleeve, bends, word, rounds)
        if stalled:
            error_msg = (
                f"Tightening stalled at length {length:.12g} after {rounds} rounds with the"
                f" angle at cone point {violation.vertex} still below pi"
            )
            raise BudgetExceededError(error_msg)
        logger.debug(
            "Round %d: rerouting around cone point %d (outer angle %.6g)",
            rounds,
            violation.vertex,
            violation.total - violation.inner,
        )
        word = reroute(surface, sleeve, violation)
    error_msg = f"Tightening did not settle within {settings.TIGHTEN_MAX_ROUNDS} rounds"
    raise BudgetExceededError(error_msg)
