"""Rectangular decompositions of flat geodesics into horizontal and vertical segments.

Each saddle connection, or the core of a cylinder curve, is cut into windows of length
ell_min / 4. Around every window sits an embedded flat rectangle obtained by flowing
orthogonally from the geodesic, shifted away from nearby cone points, and inside it the
window is replaced by a staircase of one vertical and at most two horizontal segments.
"""

import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.spatial import cKDTree

from src.core.config import settings
from src.service.exceptions import (
    DegenerateDirectionError,
    HorizontalPieceError,
    MalformedCurveError,
    WidthViolationError,
)
from src.service.geodesic.domain.intersection import count_crossings
from src.service.geodesic.domain.tighten import FlatGeodesic, GeodesicKind
from src.service.surface.domain.saddle import SaddleConnection, ell_min, trace_connection
from src.service.surface.domain.surface_core import HalfTranslationSurface, cross, rotate
from src.service.surface.domain.tracing import (
    SurfacePoint,
    TracedSegment,
    trace_from_corner,
    trace_ray,
)

logger = logging.getLogger(__name__)

WINDOW_SAMPLES = 17


class SegmentKind(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class RectSegment(BaseModel):
    """One leg of a rectangular decomposition."""

    model_config = ConfigDict(frozen=True)

    kind: SegmentKind
    trace: TracedSegment
    piece: int
    window: int

    @property
    def length(self) -> float:
        return self.trace.length


class RectangleRecord(BaseModel):
    """Flat rectangle R(t, s) = p_{s + delta}(alpha(t)) around one window.

    `lower` and `upper` are the signed normal distances at which the orthogonal flow
    from the window first meets a cone point, capped at ell_min / 4.
    """

    model_config = ConfigDict(frozen=True)

    piece: int
    t0: float
    t1: float
    lower: float
    upper: float
    delta: float
    half_height: float
    zero_free: bool
    embedded: bool | None = None


class RectangularDecomposition(BaseModel):
    """Alternating horizontal and vertical segments following a flat geodesic."""

    model_config = ConfigDict(frozen=True)

    segments: tuple[RectSegment, ...]
    rectangles: tuple[RectangleRecord, ...]
    ell_min: float
    length: float
    closes: bool

    @property
    def horizontal_total(self) -> float:
        return float(
            sum(s.length for s in self.segments if s.kind is SegmentKind.HORIZONTAL)
        )

    @property
    def horizontal_segments(self) -> list[TracedSegment]:
        return [s.trace for s in self.segments if s.kind is SegmentKind.HORIZONTAL]

    @property
    def count_ratio(self) -> float:
        """Number of segments per ell_alpha / ell_min."""
        return len(self.segments) * self.ell_min / self.length


class TransportedEstimate(BaseModel):
    """Crossings of the flowed horizontal segments with a geodesic, and the error radius."""

    total: int
    radius: float
    n_segments: int


class GeodesicPiece:
    """A straight part of the geodesic with a way to start rays from any of its points."""

    def __init__(
        self,
        surface: HalfTranslationSurface,
        trace: TracedSegment,
        connection: SaddleConnection | None = None,
    ) -> None:
        self.surface = surface
        self.trace = trace
        self.connection = connection
        self.length = trace.length
        self.direction = np.array(trace.direction)

    def locate(self, t: float) -> tuple[SurfacePoint, np.ndarray]:
        """Point alpha(t) and the unit direction of alpha in its chart."""
        t = min(max(t, 0.0), self.length)
        pieces = [p for p in self.trace.pieces if p.s1 > p.s0]
        piece = next((p for p in pieces if p.s0 <= t <= p.s1), pieces[-1])
        step = (piece.end - piece.start) / (piece.s1 - piece.s0)
        point = piece.start + (t - piece.s0) * step
        return SurfacePoint(triangle=piece.triangle, x=float(point[0]), y=float(point[1])), step

    def ray(self, t: float, angle: float, length: float) -> TracedSegment:
        """Ray from alpha(t) turned by `angle` from the direction of alpha, |angle| <= pi."""
        eps = settings.GEOMETRY_EPSILON * 100.0
        if self.connection is not None and (t <= eps or t >= self.length - eps):
            c = self.connection
            if t <= eps:
                vertex, germ = c.start_vertex, c.start_germ + angle
            else:
                vertex = c.end_vertex
                # left of alpha is clockwise from the germ pointing back along it
                if angle >= 0.0:
                    germ = c.end_germ - (math.pi - angle)
                else:
                    germ = c.end_germ + math.pi + angle
            triangle, corner, direction = self.surface.locate_germ(vertex, germ)
            return trace_from_corner(self.surface, triangle, corner, direction, length)
        point, step = self.locate(t)
        return trace_ray(self.surface, point, rotate(step, angle), length)


def axis_kind(piece: GeodesicPiece) -> SegmentKind | None:
    """HORIZONTAL or VERTICAL for an axis-parallel piece, None otherwise."""
    flat = settings.ANGLE_EPSILON * 1e3
    c, s = piece.direction
    if abs(s) <= flat:
        return SegmentKind.HORIZONTAL
    if abs(c) <= flat:
        return SegmentKind.VERTICAL
    return None


def geodesic_pieces(geodesic: FlatGeodesic) -> list[GeodesicPiece]:
    surface = geodesic.surface
    if geodesic.kind is GeodesicKind.CYLINDER:
        return [GeodesicPiece(surface, geodesic.representative)]
    return [
        GeodesicPiece(surface, trace_connection(surface, c), c) for c in geodesic.connections
    ]


def _normal_reach(
    piece: GeodesicPiece, t0: float, t1: float, side: int, cap: float
) -> float:
    """Distance the window can be flowed to one side before the flow meets a cone point.

    Normal rays are sampled along the window; the corners of every triangle they cross
    are expressed in the frame of the window and the nearest one inside it is kept.
    """
    surface = piece.surface
    eps = settings.GEOMETRY_EPSILON * 100.0
    reach = cap
    for t in np.linspace(t0, t1, WINDOW_SAMPLES):
        ray = piece.ray(float(t), side * math.pi / 2.0, cap)
        for part in ray.pieces:
            if part.s1 <= part.s0:
                continue
            d_loc = (part.end - part.start) / (part.s1 - part.s0)
            # side * n points along the ray, and alpha runs a quarter turn clockwise of n
            u_loc = np.array([d_loc[1], -d_loc[0]]) * side
            for corner in surface.positions[part.triangle]:
                rel = corner - part.start
                along = float(t - t0) + float(rel @ u_loc)
                offset = part.s0 + float(rel @ d_loc)
                if -eps <= along <= t1 - t0 + eps and offset > eps:
                    reach = min(reach, offset)
        if ray.hit is not None:
            reach = min(reach, ray.hit.distance)
    return reach


def shear_offset(lower: float, upper: float, quarter: float) -> float:
    """Shift of the rectangle away from the nearer cone point."""
    eighth = quarter / 2.0
    if lower >= -eighth and upper <= eighth:
        error_msg = (
            f"Orthogonal flow meets cone points at {lower:.6g} and {upper:.6g}, both within "
            f"{eighth:.6g}"
        )
        raise WidthViolationError(error_msg)
    if lower >= -eighth:
        return lower / 2.0 + eighth
    if upper <= eighth:
        return -eighth + upper / 2.0
    return 0.0


def _location(trace: TracedSegment) -> tuple[int, float, float]:
    end = trace.end
    return end.triangle, end.x, end.y


def _check_embedding(
    piece: GeodesicPiece, t0: float, t1: float, delta: float, half_height: float, grid: int
) -> bool:
    """Sample R on a grid and look for two far apart parameters landing on one point."""
    by_triangle: dict[int, list[tuple[float, float, float, float]]] = {}
    for t in np.linspace(t0, t1, grid):
        for s in np.linspace(-half_height, half_height, grid):
            height = float(s + delta)
            if abs(height) <= settings.GEOMETRY_EPSILON:
                point, _ = piece.locate(float(t))
                location = (point.triangle, point.x, point.y)
            else:
                ray = piece.ray(float(t), math.copysign(math.pi / 2.0, height), abs(height))
                if ray.hit is not None and ray.hit.distance < abs(height) - 1e-9:
                    return False
                location = _location(ray)
            triangle, x, y = location
            by_triangle.setdefault(triangle, []).append((x, y, float(t), float(s)))
    spacing = min((t1 - t0), 2.0 * half_height) / max(grid - 1, 1)
    for samples in by_triangle.values():
        array = np.array(samples)
        tree = cKDTree(array[:, :2])
        for i, j in tree.query_pairs(r=1e-7):
            if np.hypot(*(array[i, 2:] - array[j, 2:])) > 0.5 * spacing:
                return False
    return True


def _rectangle(
    piece: GeodesicPiece,
    index: int,
    t0: float,
    t1: float,
    shortest: float,
    *,
    check_embedding: bool = True,
    grid: int = 12,
) -> RectangleRecord:
    """Rectangle around alpha([t0, t1]) with its shear and an embedding check.

    Args:
        piece: Straight part of the geodesic.
        index (int): Position of the piece along the geodesic.
        t0 (float): Window start.
        t1 (float): Window end, with 0 < t1 - t0 <= ell_min / 4.
        shortest (float): ell_min of the surface.
        check_embedding (bool): Sample the rectangle for self-overlaps.
        grid (int): Samples per side of the embedding check.

    Raises:
        WidthViolationError: If cone points sit within ell_min / 8 on both sides.
    """
    quarter = shortest / 4.0
    if not 0.0 < t1 - t0 <= quarter + settings.GEOMETRY_EPSILON:
        error_msg = f"Window [{t0:.6g}, {t1:.6g}] is not of length in (0, {quarter:.6g}]"
        raise WidthViolationError(error_msg)
    upper = _normal_reach(piece, t0, t1, 1, quarter)
    lower = -_normal_reach(piece, t0, t1, -1, quarter)
    eps = settings.GEOMETRY_EPSILON * 100.0
    at_end = piece.connection is not None and (t0 <= eps or t1 >= piece.length - eps)
    delta = 0.0 if at_end else shear_offset(lower, upper, quarter)
    half = quarter / 2.0
    zero_free = at_end or (lower < delta - half and delta + half < upper)
    embedded = (
        _check_embedding(piece, t0, t1, delta, half, grid) if check_embedding else None
    )
    return RectangleRecord(
        piece=index,
        t0=t0,
        t1=t1,
        lower=lower,
        upper=upper,
        delta=delta,
        half_height=half,
        zero_free=zero_free,
        embedded=embedded,
    )


def embedded_rectangle(
    geodesic: FlatGeodesic,
    index: int,
    t0: float,
    t1: float,
    shortest: float | None = None,
    *,
    check_embedding: bool = True,
    grid: int = 12,
) -> RectangleRecord:
    """Rectangle around the window [t0, t1] of saddle connection `index`, or of the core.

    Raises:
        DegenerateDirectionError: If the piece is exactly horizontal or vertical; such
            pieces are kept whole by the decomposition and carry no rectangle.
        WidthViolationError: If the window is too long or cone points crowd both sides.
    """
    piece = geodesic_pieces(geodesic)[index]
    kind = axis_kind(piece)
    if kind is not None:
        error_msg = f"Piece {index} is {kind.value}; it has no rectangle"
        raise DegenerateDirectionError(error_msg)
    shortest = ell_min(geodesic.surface) if shortest is None else shortest
    return _rectangle(
        piece, index, t0, t1, shortest, check_embedding=check_embedding, grid=grid
    )


def _windows(length: float, quarter: float) -> list[tuple[float, float]]:
    count = max(1, math.ceil(length / quarter - 1e-9))
    cuts = [min(i * quarter, length) for i in range(count)] + [length]
    return [(a, b) for a, b in zip(cuts, cuts[1:], strict=False) if b - a > 1e-12]


def _legs(c: float, s: float, width: float, delta: float) -> list[tuple[SegmentKind, float]]:
    """Staircase for a window: corner on the side the rectangle is shifted to."""
    horizontal, vertical = width * abs(c), width * abs(s)
    if delta == 0.0:
        share = 0.5
    elif (delta > 0.0) == (c * s < 0.0):
        share = 1.0
    else:
        share = 0.0
    legs = [
        (SegmentKind.HORIZONTAL, share * horizontal),
        (SegmentKind.VERTICAL, vertical),
        (SegmentKind.HORIZONTAL, (1.0 - share) * horizontal),
    ]
    return [(kind, length) for kind, length in legs if length > settings.GEOMETRY_EPSILON]


def _first_leg(
    piece: GeodesicPiece, t0: float, direction: np.ndarray, length: float
) -> TracedSegment:
    _, step = piece.locate(t0)
    angle = math.atan2(cross(step, direction), float(step @ direction))
    return piece.ray(t0, angle, length)


def _staircase(
    piece: GeodesicPiece, index: int, window: int, t0: float, t1: float, delta: float
) -> list[RectSegment]:
    _, step = piece.locate(t0)
    c, s = float(step[0]), float(step[1])
    legs = _legs(c, s, t1 - t0, delta)
    quarter_turn = math.pi / 2.0 if c * s > 0.0 else -math.pi / 2.0
    result: list[RectSegment] = []
    previous: TracedSegment | None = None
    for position, (kind, length) in enumerate(legs):
        if previous is None:
            sign = math.copysign(1.0, c if kind is SegmentKind.HORIZONTAL else s)
            if kind is SegmentKind.HORIZONTAL:
                direction = np.array([sign, 0.0])
            else:
                direction = np.array([0.0, sign])
            trace = _first_leg(piece, t0, direction, length)
        else:
            turn = quarter_turn if kind is SegmentKind.VERTICAL else -quarter_turn
            end_direction = rotate(np.array(previous.end_direction), turn)
            trace = trace_ray(piece.surface, previous.end, end_direction, length)
        last = position == len(legs) - 1
        if trace.hit is not None and (not last or trace.traveled < length - 1e-7):
            error_msg = (
                f"Staircase leg in window {window} of piece {index} meets cone point "
                f"{trace.hit.vertex}"
            )
            raise WidthViolationError(error_msg)
        result.append(RectSegment(kind=kind, trace=trace, piece=index, window=window))
        previous = trace
    return result


def _whole_piece(piece: GeodesicPiece, index: int, kind: SegmentKind) -> list[RectSegment]:
    return [RectSegment(kind=kind, trace=piece.trace, piece=index, window=0)]


def _same_point(surface: HalfTranslationSurface, a: SurfacePoint, b: SurfacePoint) -> bool:
    eps = 1e-6
    if a.triangle == b.triangle and math.hypot(a.x - b.x, a.y - b.y) <= eps:
        return True
    for e in range(3):
        u, _, sigma, c = surface.transition(a.triangle, e)
        image = sigma * a.as_array() + c
        if u == b.triangle and np.hypot(*(image - b.as_array())) <= eps:
            return True
    return False


def build_rect_decomposition(
    geodesic: FlatGeodesic,
    shortest: float | None = None,
    *,
    check_embedding: bool = False,
) -> RectangularDecomposition:
    """Rectangular decomposition of a flat geodesic.

    Exactly horizontal or vertical pieces are kept whole. Every other piece is cut into
    windows of length ell_min / 4, the last one possibly shorter.

    Args:
        geodesic (FlatGeodesic): Geodesic to decompose.
        shortest (float | None): ell_min of the surface, computed when omitted.
        check_embedding (bool): Run the sampled embedding check on every rectangle.

    Returns:
        RectangularDecomposition: Segments in order along the geodesic and the rectangles.
    """
    surface = geodesic.surface
    shortest = ell_min(surface) if shortest is None else shortest
    quarter = shortest / 4.0
    segments: list[RectSegment] = []
    rectangles: list[RectangleRecord] = []
    for index, piece in enumerate(geodesic_pieces(geodesic)):
        kind = axis_kind(piece)
        if kind is not None:
            segments.extend(_whole_piece(piece, index, kind))
            continue
        for window, (t0, t1) in enumerate(_windows(piece.length, quarter)):
            record = _rectangle(
                piece, index, t0, t1, shortest, check_embedding=check_embedding
            )
            rectangles.append(record)
            segments.extend(_staircase(piece, index, window, t0, t1, record.delta))
    last = segments[-1].trace
    if geodesic.kind is GeodesicKind.CYLINDER:
        closes = _same_point(surface, last.end, geodesic.representative.start) or (
            len(segments) == 1
        )
    else:
        closes = last.hit is not None and last.hit.vertex == geodesic.connections[0].start_vertex
    logger.debug(
        "Decomposed a geodesic of length %.6g into %d segments and %d rectangles",
        geodesic.length,
        len(segments),
        len(rectangles),
    )
    return RectangularDecomposition(
        segments=tuple(segments),
        rectangles=tuple(rectangles),
        ell_min=shortest,
        length=geodesic.length,
        closes=closes,
    )


def _transport(
    flowed: HalfTranslationSurface, segment: TracedSegment, t: float
) -> TracedSegment:
    """Image under a_t of a horizontal segment, traced on the flowed surface."""
    stretch = math.exp(t)
    direction = np.array([math.copysign(1.0, segment.direction[0]), 0.0])
    length = stretch * segment.length
    start = segment.start
    if segment.start_vertex is not None:
        pos = flowed.positions[start.triangle]
        image = np.array([stretch * start.x, start.y / stretch])
        corner = int(np.argmin(np.hypot(*(pos - image).T)))
        return trace_from_corner(flowed, start.triangle, corner, direction, length)
    point = SurfacePoint(triangle=start.triangle, x=stretch * start.x, y=start.y / stretch)
    return trace_ray(flowed, point, direction, length)


def transported_crossing_estimate(
    surface: HalfTranslationSurface,
    t: float,
    decomposition: RectangularDecomposition,
    beta: FlatGeodesic,
) -> TransportedEstimate:
    """Crossings of the a_t-images of the horizontal segments with beta.

    Args:
        surface (HalfTranslationSurface): Surface the decomposition was built on.
        t (float): Flow time, t >= 0.
        decomposition (RectangularDecomposition): Decomposition of alpha on `surface`.
        beta (FlatGeodesic): Geodesic on the flowed surface a_t(surface).

    Returns:
        TransportedEstimate: Total crossing count and the error radius
        ESTIMATE_CONSTANT * ell_alpha * ell_beta / (ell_min * ell_min of the flowed surface).

    Raises:
        HorizontalPieceError: If beta has a horizontal saddle connection or core.
    """
    flowed = beta.surface
    if flowed.n_triangles != surface.n_triangles or not np.array_equal(
        flowed.partners, surface.partners
    ):
        error_msg = "The second geodesic does not live on a deformation of the surface"
        raise MalformedCurveError(error_msg)
    for holonomy in beta.holonomies:
        if abs(holonomy[1]) <= settings.ANGLE_EPSILON * 1e3 * float(np.hypot(*holonomy)):
            error_msg = "The second geodesic has a horizontal piece"
            raise HorizontalPieceError(error_msg)
    total = 0
    horizontal = decomposition.horizontal_segments
    for segment in horizontal:
        total += count_crossings(beta, _transport(flowed, segment, t))
    radius = (
        settings.ESTIMATE_CONSTANT
        * decomposition.length
        * beta.length
        / (decomposition.ell_min * ell_min(flowed))
    )
    logger.debug("Transported %d horizontal segments: %d crossings", len(horizontal), total)
    return TransportedEstimate(total=total, radius=radius, n_segments=len(horizontal))
