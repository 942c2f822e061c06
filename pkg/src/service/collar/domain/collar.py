"""Immersed collars of non-horizontal flat geodesics.

Every straight piece of the geodesic, the core of a cylinder or one saddle connection,
carries a collar iota(t, s) = h_{s + shear(t)}(beta(t)) where h is the horizontal flow
towards the right of beta, t runs along the piece and |s| < ell_min / 8. The shear is
the piecewise-linear interpolation of the offsets that push the collar away from cone
points sitting within ell_min / 8 of beta along a horizontal leaf. It vanishes at the
endpoints of saddle connections, where side panels swept from the remaining vertical
prongs close the collar around the cone point.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.config import settings
from src.service.exceptions import HigherOrderZeroError, HorizontalGeodesicError
from src.service.geodesic.domain.rectdecomp import (
    GeodesicPiece,
    geodesic_pieces,
    shear_offset,
)
from src.service.geodesic.domain.tighten import FlatGeodesic
from src.service.surface.domain.saddle import SaddleConnection, ell_min
from src.service.surface.domain.surface_core import HalfTranslationSurface, ccw_angle, cross
from src.service.surface.domain.tracing import (
    SurfacePoint,
    TracedSegment,
    piece_intersections,
    trace_from_corner,
    trace_ray,
)

logger = logging.getLogger(__name__)

HORIZONTAL = (np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
VERTICAL = (np.array([0.0, 1.0]), np.array([0.0, -1.0]))
MULTIPLICITY_HEIGHTS = (-0.75, -0.25, 0.25, 0.75)


class Prong(NamedTuple):
    """Outgoing direction at a cone point, located in one of its corners."""

    vertex: int
    germ: float
    triangle: int
    corner: int
    direction: np.ndarray


class ShearAnchor(BaseModel):
    """Prescribed shear at a time where a cone point is horizontally close to beta.

    `lower` and `upper` are the signed horizontal offsets of the nearest cone points on
    either side, positive towards the flow direction, capped at ell_min / 4.
    """

    model_config = ConfigDict(frozen=True)

    t: float
    lower: float
    upper: float
    value: float


class SidePanel(BaseModel):
    """Vertical leaf leaving an endpoint of a saddle connection, swept horizontally."""

    model_config = ConfigDict(frozen=True)

    vertex: int
    endpoint: int
    germ: float
    leaf: TracedSegment


class CollarPiece(BaseModel):
    """Collar around one straight piece of a geodesic.

    `direction` is the unit direction of the piece in its start chart; the flow runs
    along the horizontal to its right, so `flow_sign` is the sign of the x-component of
    that horizontal.
    """

    model_config = ConfigDict(frozen=True)

    index: int
    trace: TracedSegment
    connection: SaddleConnection | None = None
    length: float
    direction: tuple[float, float]
    anchors: tuple[ShearAnchor, ...] = ()
    panels: tuple[SidePanel, ...] = ()

    @property
    def periodic(self) -> bool:
        return self.connection is None

    @property
    def vertical_speed(self) -> float:
        return self.direction[1]

    @property
    def flow_sign(self) -> float:
        return 1.0 if self.direction[1] > 0.0 else -1.0

    def knots(self) -> tuple[np.ndarray, np.ndarray]:
        times = [a.t for a in self.anchors]
        values = [a.value for a in self.anchors]
        if not self.periodic:
            return np.array([0.0, *times, self.length]), np.array([0.0, *values, 0.0])
        if not times:
            return np.array([0.0, self.length]), np.zeros(2)
        ell = self.length
        return (
            np.array([times[-1] - ell, *times, times[0] + ell]),
            np.array([values[-1], *values, values[0]]),
        )

    def shear(self, t: np.ndarray | float) -> np.ndarray:
        xp, fp = self.knots()
        t = np.asarray(t, dtype=float)
        return np.interp(np.mod(t, self.length) if self.periodic else t, xp, fp)

    def shear_slope(self, t: np.ndarray | float) -> np.ndarray:
        xp, fp = self.knots()
        slopes = np.diff(fp) / np.diff(xp)
        t = np.asarray(t, dtype=float)
        if self.periodic:
            t = np.mod(t, self.length)
        index = np.clip(np.searchsorted(xp, t, side="right") - 1, 0, len(slopes) - 1)
        return slopes[index]

    def breakpoints(self) -> list[float]:
        """Kinks of the shear inside (0, length)."""
        return sorted(a.t for a in self.anchors if 0.0 < a.t < self.length)


class MultiplicityRecord(BaseModel):
    """Sampled preimage counts of the collar immersion."""

    samples: int
    max_count: int
    bound: int
    within_bound: bool
    window_injective: bool


class Collar(BaseModel):
    """Immersed collar of a flat geodesic, one piece per saddle connection or the core."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    geodesic: FlatGeodesic = Field(exclude=True, repr=False)
    pieces: tuple[CollarPiece, ...]
    ell_min: float
    multiplicity: MultiplicityRecord | None = None

    @property
    def surface(self) -> HalfTranslationSurface:
        return self.geodesic.surface

    @property
    def ell_min_dagger(self) -> float:
        return min(1.0, self.ell_min)

    @property
    def half_width(self) -> float:
        """Half height eps = ell_min / 8 of the collar and width of the profile."""
        return self.ell_min / 8.0

    @property
    def max_shear(self) -> float:
        return max((abs(a.value) for p in self.pieces for a in p.anchors), default=0.0)

    @property
    def reach(self) -> float:
        """Horizontal distance from beta beyond which no point of the collar lies."""
        return self.half_width + self.max_shear + settings.GEOMETRY_EPSILON * 100.0

    @property
    def has_connections(self) -> bool:
        return any(p.connection is not None for p in self.pieces)


def prongs(
    surface: HalfTranslationSurface,
    directions: tuple[np.ndarray, ...],
    vertex: int | None = None,
) -> list[Prong]:
    """Outgoing germs at cone points pointing along any of `directions`, deduplicated."""
    eps = settings.ANGLE_EPSILON * 10.0
    found: dict[tuple[int, float], Prong] = {}
    for t in range(surface.n_triangles):
        for k in range(3):
            v = int(surface.vertex_of_corner[t, k])
            if vertex is not None and v != vertex:
                continue
            total = float(surface.vertex_angles[v])
            for d in directions:
                angle = ccw_angle(surface.edges[t, k], d)
                if angle > 2.0 * math.pi - eps:
                    angle = 0.0
                if angle > surface.corner_angles[t, k] + eps:
                    continue
                germ = surface.germ(t, k, d) % total
                key = round(germ, 6)
                if abs(germ - total) < 1e-6:
                    key = 0.0
                found.setdefault((v, key), Prong(v, germ, t, k, d))
    return sorted(found.values(), key=lambda p: (p.vertex, p.germ))


def _cyclic_distance(a: float, b: float, total: float) -> float:
    gap = (a - b) % total
    return min(gap, total - gap)


def _side_panels(
    surface: HalfTranslationSurface, connection: SaddleConnection, length: float
) -> list[SidePanel]:
    """Vertical leaves at both endpoints except the one inside the sector of beta.

    A cone angle of k pi carries k vertical prongs; one of them lies within pi / 2 of
    the connection, the other k - 1 start side panels.
    """
    panels = []
    ends = (
        (0, connection.start_vertex, connection.start_germ),
        (1, connection.end_vertex, connection.end_germ),
    )
    for endpoint, vertex, germ in ends:
        total = float(surface.vertex_angles[vertex])
        order = round(total / math.pi)
        if order > 3:
            error_msg = (
                f"Cone point {vertex} has angle {order} pi; side panels are built for "
                f"marked points and simple zeros only"
            )
            raise HigherOrderZeroError(error_msg)
        vertical = prongs(surface, VERTICAL, vertex)
        if not vertical:
            continue
        inside = min(vertical, key=lambda p: _cyclic_distance(p.germ, germ, total))
        for prong in vertical:
            if prong is inside:
                continue
            leaf = trace_from_corner(
                surface, prong.triangle, prong.corner, prong.direction, length
            )
            panels.append(
                SidePanel(vertex=vertex, endpoint=endpoint, germ=prong.germ, leaf=leaf)
            )
    return panels


def _shear_anchors(
    surface: HalfTranslationSurface,
    piece: GeodesicPiece,
    horizontal: list[Prong],
    period: float | None,
    shortest: float,
) -> list[ShearAnchor]:
    """Anchors at the times where a horizontal leaf from a cone point meets beta."""
    quarter = shortest / 4.0
    eighth = shortest / 8.0
    eps = settings.GEOMETRY_EPSILON * 100.0
    offsets: dict[float, tuple[float, list[float]]] = {}
    for prong in horizontal:
        ray = trace_from_corner(
            surface, prong.triangle, prong.corner, prong.direction, eighth * (1.0 + 1e-9)
        )
        for hit in piece_intersections(surface, ray, piece.trace, period_b=period):
            if hit.s_a <= eps:
                continue
            if period is None and (hit.s_b <= eps or hit.s_b >= piece.length - eps):
                continue
            back = -np.array(hit.direction_a)
            offset = hit.s_a if cross(np.array(hit.direction_b), back) < 0.0 else -hit.s_a
            key = round(hit.s_b, 7)
            offsets.setdefault(key, (hit.s_b, []))[1].append(offset)
    anchors = []
    for t, values in sorted(offsets.values()):
        lower = max((v for v in values if v < 0.0), default=-quarter)
        upper = min((v for v in values if v > 0.0), default=quarter)
        anchors.append(
            ShearAnchor(t=t, lower=lower, upper=upper, value=shear_offset(lower, upper, quarter))
        )
    return anchors


def _collar_piece(
    surface: HalfTranslationSurface,
    piece: GeodesicPiece,
    index: int,
    horizontal: list[Prong],
    shortest: float,
) -> CollarPiece:
    c, s = (float(v) for v in piece.direction)
    if abs(s) <= settings.ANGLE_EPSILON * 1e3:
        error_msg = f"Piece {index} of the geodesic is horizontal; it has no collar"
        raise HorizontalGeodesicError(error_msg)
    connection = piece.connection
    period = None if connection is not None else piece.length
    anchors = _shear_anchors(surface, piece, horizontal, period, shortest)
    panels = (
        _side_panels(surface, connection, shortest / 8.0) if connection is not None else []
    )
    return CollarPiece(
        index=index,
        trace=piece.trace,
        connection=connection,
        length=piece.length,
        direction=(c, s),
        anchors=tuple(anchors),
        panels=tuple(panels),
    )


class LineHit(NamedTuple):
    """Crossing of a horizontal line with a piece of beta or with a side panel leaf.

    `position` is the signed arclength along the line, `t` the parameter on the piece
    or the leaf, and `sign` is +1 when the line runs along the flow direction there.
    """

    position: float
    piece: int
    t: float
    sign: float
    panel: int | None


def _collect_hits(collar: Collar, line: TracedSegment, orientation: float) -> list[LineHit]:
    surface = collar.surface
    hits = []
    for index, piece in enumerate(collar.pieces):
        period = piece.length if piece.periodic else None
        for hit in piece_intersections(surface, line, piece.trace, period_b=period):
            along = orientation * np.array(hit.direction_a)
            sign = 1.0 if cross(np.array(hit.direction_b), along) < 0.0 else -1.0
            hits.append(LineHit(orientation * hit.s_a, index, hit.s_b, sign, None))
        for p, panel in enumerate(piece.panels):
            for hit in piece_intersections(surface, line, panel.leaf):
                hits.append(LineHit(orientation * hit.s_a, index, hit.s_b, 1.0, p))
    return hits


def _start_corner(surface: HalfTranslationSurface, segment: TracedSegment) -> int:
    pos = surface.positions[segment.start.triangle]
    return int(np.argmin(np.hypot(*(pos - segment.start.as_array()).T)))


def horizontal_hits(
    collar: Collar, segment: TracedSegment, reach: float | None = None
) -> list[LineHit]:
    """Crossings of the horizontal line carrying `segment`, extended by `reach` both ways.

    Positions are measured from the start of the segment; the backward extension is
    skipped when the segment leaves a cone point.
    """
    surface = collar.surface
    reach = collar.reach if reach is None else reach
    w = np.array(segment.direction)
    length = segment.traveled + reach
    if segment.start_vertex is not None:
        corner = _start_corner(surface, segment)
        forward = trace_from_corner(surface, segment.start.triangle, corner, w, length)
        return _collect_hits(collar, forward, 1.0)
    forward = trace_ray(surface, segment.start, w, length)
    backward = trace_ray(surface, segment.start, -w, reach)
    eps = settings.GEOMETRY_EPSILON * 100.0
    hits = _collect_hits(collar, forward, 1.0)
    hits.extend(h for h in _collect_hits(collar, backward, -1.0) if h.position < -eps)
    return hits


def point_hits(collar: Collar, point: SurfacePoint) -> list[LineHit]:
    """Crossings of the horizontal leaf through a point within the reach of the collar."""
    surface = collar.surface
    reach = collar.reach
    eps = settings.GEOMETRY_EPSILON * 100.0
    hits = _collect_hits(collar, trace_ray(surface, point, HORIZONTAL[0], reach), 1.0)
    backward = _collect_hits(collar, trace_ray(surface, point, HORIZONTAL[1], reach), -1.0)
    hits.extend(h for h in backward if h.position < -eps)
    return hits


def collar_coordinates(collar: Collar, hit: LineHit, x: np.ndarray | float) -> np.ndarray:
    """Height s in the collar of the point at arclength x on the line of `hit`.

    For a side panel the height is the horizontal offset from its leaf.
    """
    x = np.asarray(x, dtype=float)
    if hit.panel is not None:
        return x - hit.position
    piece = collar.pieces[hit.piece]
    return hit.sign * (x - hit.position) - piece.shear(hit.t)


def image_point(
    collar: Collar, piece_index: int, t: float, s: float
) -> SurfacePoint | None:
    """iota(t, s) on the surface, or None when the flow meets a cone point first."""
    piece = collar.pieces[piece_index]
    walker = GeodesicPiece(collar.surface, piece.trace, piece.connection)
    r = float(s + piece.shear(t))
    point, step = walker.locate(t)
    if abs(r) <= settings.GEOMETRY_EPSILON:
        return point
    target = np.array([math.copysign(1.0, step[1]) * math.copysign(1.0, r), 0.0])
    angle = math.atan2(cross(step, target), float(step @ target))
    ray = walker.ray(t, angle, abs(r))
    if ray.hit is not None and ray.hit.distance < abs(r) - settings.GEOMETRY_EPSILON:
        return None
    return ray.end


def _preimages(
    collar: Collar, point: SurfacePoint
) -> list[tuple[int, float, float, int | None]]:
    eighth = collar.half_width
    found = []
    for hit in point_hits(collar, point):
        s = float(collar_coordinates(collar, hit, 0.0))
        if abs(s) >= eighth:
            continue
        if hit.panel is not None and hit.t > eighth:
            continue
        found.append((hit.piece, hit.t, s, hit.panel))
    return found


def sample_multiplicity(collar: Collar, samples: int = 16) -> MultiplicityRecord:
    """Count preimages of sampled collar points.

    Points iota(t, s) are taken on a grid of `samples` times per piece and four heights.
    Besides the global count, every point must have a single preimage within ell_min / 4
    of its own time on its own piece.
    """
    eighth = collar.half_width
    quarter = collar.ell_min / 4.0
    tolerance = 1e-6 * collar.ell_min
    max_count = 0
    taken = 0
    injective = True
    for index, piece in enumerate(collar.pieces):
        for t in (np.arange(samples) + 0.5) * piece.length / samples:
            for fraction in MULTIPLICITY_HEIGHTS:
                point = image_point(collar, index, float(t), fraction * eighth)
                if point is None:
                    continue
                taken += 1
                found = _preimages(collar, point)
                max_count = max(max_count, len(found))
                near = []
                for other, u, s, panel in found:
                    if other != index or panel is not None:
                        continue
                    gap = abs(u - t)
                    if piece.periodic:
                        gap = min(gap, piece.length - gap)
                    if gap < quarter:
                        near.append((u, s))
                same = [
                    (u, s)
                    for u, s in near
                    if abs(u - t) < tolerance or abs(abs(u - t) - piece.length) < tolerance
                ]
                if len(near) != 1 or not same:
                    injective = False
    bound = math.ceil(
        settings.MULTIPLICITY_CONSTANT * collar.geodesic.length / collar.ell_min
    )
    return MultiplicityRecord(
        samples=taken,
        max_count=max_count,
        bound=bound,
        within_bound=max_count <= bound,
        window_injective=injective,
    )


def build_collar(
    geodesic: FlatGeodesic,
    shortest: float | None = None,
    *,
    check_multiplicity: bool = False,
    samples: int = 16,
) -> Collar:
    """Immersed collar of a non-horizontal flat geodesic.

    Args:
        geodesic (FlatGeodesic): Cylinder or singular geodesic.
        shortest (float | None): ell_min of the surface, computed when omitted.
        check_multiplicity (bool): Sample the immersion for its preimage counts.
        samples (int): Sample times per piece for the multiplicity check.

    Raises:
        HorizontalGeodesicError: If a piece of the geodesic is horizontal.
        HigherOrderZeroError: If a saddle connection ends at a zero of order two or more.
        WidthViolationError: If cone points crowd beta on both sides at one time.

    Returns:
        Collar: One collar piece per saddle connection, or one for the core.
    """
    surface = geodesic.surface
    shortest = ell_min(surface) if shortest is None else shortest
    horizontal = prongs(surface, HORIZONTAL)
    pieces = [
        _collar_piece(surface, piece, index, horizontal, shortest)
        for index, piece in enumerate(geodesic_pieces(geodesic))
    ]
    collar = Collar(geodesic=geodesic, pieces=tuple(pieces), ell_min=shortest)
    logger.debug(
        "Collar of a %s geodesic: %d pieces, %d anchors, %d side panels, max shear %.6g",
        geodesic.kind.value,
        len(pieces),
        sum(len(p.anchors) for p in pieces),
        sum(len(p.panels) for p in pieces),
        collar.max_shear,
    )
    if check_multiplicity:
        record = sample_multiplicity(collar, samples)
        if not record.within_bound:
            logger.warning(
                "Sampled multiplicity %d exceeds %d", record.max_count, record.bound
            )
        collar = collar.model_copy(update={"multiplicity": record})
    return collar

