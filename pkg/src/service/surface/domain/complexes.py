"""Complexes of disjoint saddle connections and their completion to triangulations."""

import logging
import math
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import NotApplicableError
from src.service.surface.domain.delaunay import (
    Triangulation,
    delaunay_triangulation,
    triangulation_of,
)
from src.service.surface.domain.metrics import diameter_interval
from src.service.surface.domain.saddle import (
    NodeBudget,
    SaddleConnection,
    connections_from,
    enumerate_saddle_connections,
    trace_connection,
)
from src.service.surface.domain.surface_core import (
    HalfTranslationSurface,
    VertexReference,
    ccw_angle,
    cross,
    rotate,
)
from src.service.surface.domain.tracing import piece_intersections

logger = logging.getLogger(__name__)

GERM_MATCH = 1e-6


class End(NamedTuple):
    """A connection seen from one of its endpoints, oriented away from it."""

    vertex: int
    germ: float
    connection: SaddleConnection


class Face(BaseModel):
    """Triangle V, A, B bounded by three connections, counterclockwise.

    `corners` holds (vertex, germ of the first side) at V, A and B; `sides` the three
    connections oriented V->A, A->B and B->V.
    """

    model_config = ConfigDict(frozen=True)

    corners: tuple[tuple[int, float], tuple[int, float], tuple[int, float]]
    sides: tuple[SaddleConnection, SaddleConnection, SaddleConnection]
    vectors: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

    @property
    def ident(self) -> tuple[int, float]:
        return min((v, round(g, 6) + 0.0) for v, g in self.corners)


class Complex(BaseModel):
    """Pairwise disjoint saddle connections plus every triangle they bound."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    surface: HalfTranslationSurface
    connections: dict[tuple, SaddleConnection]
    faces: list[Face] = []

    @property
    def size(self) -> int:
        return len(self.connections)

    @property
    def max_length(self) -> float:
        return max((c.length for c in self.connections.values()), default=0.0)

    def is_triangulation(self) -> bool:
        return self.size == full_size(self.surface)

    def __contains__(self, connection: SaddleConnection) -> bool:
        return _lookup(self, connection) is not None


def full_size(surface: HalfTranslationSurface) -> int:
    """Number of edges of any triangulation with the vertex set of `surface`."""
    return 3 * (surface.n_vertices - surface.euler_characteristic)


def _same_germ(a: float, b: float, total: float) -> bool:
    d = abs(a - b) % total
    return min(d, total - d) < GERM_MATCH


def _ends(complex_: Complex) -> dict[int, list[End]]:
    ends: dict[int, list[End]] = {}
    for connection in complex_.connections.values():
        ends.setdefault(connection.start_vertex, []).append(
            End(connection.start_vertex, connection.start_germ, connection)
        )
        back = connection.reversed()
        ends.setdefault(back.start_vertex, []).append(End(back.start_vertex, back.start_germ, back))
    for vertex in ends:
        ends[vertex].sort(key=lambda end: end.germ)
    return ends


def _lookup(complex_: Complex, connection: SaddleConnection) -> SaddleConnection | None:
    if connection.key in complex_.connections:
        return complex_.connections[connection.key]
    total_a = complex_.surface.vertex_angles[connection.start_vertex]
    total_b = complex_.surface.vertex_angles[connection.end_vertex]
    for other in complex_.connections.values():
        for candidate in (other, other.reversed()):
            if (
                candidate.start_vertex == connection.start_vertex
                and candidate.end_vertex == connection.end_vertex
                and _same_germ(candidate.start_germ, connection.start_germ, total_a)
                and _same_germ(candidate.end_germ, connection.end_germ, total_b)
            ):
                return candidate
    return None


def _find_end(ends: dict[int, list[End]], vertex: int, germ: float, total: float) -> End | None:
    for end in ends.get(vertex, []):
        if _same_germ(end.germ, germ, total):
            return end
    return None


def _triangle_is_empty(
    surface: HalfTranslationSurface, first: End, second: End, angle: float
) -> bool:
    """No cone point inside triangle V, A, B or in the interior of side AB."""
    a = np.array([first.connection.length, 0.0])
    b = second.connection.length * np.array([math.cos(angle), math.sin(angle)])
    bound = max(first.connection.length, second.connection.length)
    eps = settings.GEOMETRY_EPSILON * 100.0 * max(1.0, bound)
    found = connections_from(surface, first.vertex, first.germ, second.germ, bound, NodeBudget())
    for offset, distance, *_ in found:
        if offset <= settings.ANGLE_EPSILON or offset >= angle - settings.ANGLE_EPSILON:
            continue
        p = distance * np.array([math.cos(offset), math.sin(offset)])
        if cross(b - a, p - a) >= -eps:
            return False
    return True


def find_faces(complex_: Complex) -> list[Face]:
    """Triangles whose three sides all belong to the complex.

    Corners come from consecutive ends at a vertex that open by less than pi; the face is
    kept when its third side is in the complex and no cone point lies inside it.
    """
    surface = complex_.surface
    ends = _ends(complex_)
    faces: dict[tuple, Face] = {}
    for vertex, at_vertex in ends.items():
        total = surface.vertex_angles[vertex]
        for index, first in enumerate(at_vertex):
            second = at_vertex[(index + 1) % len(at_vertex)]
            angle = (second.germ - first.germ) % total
            if len(at_vertex) == 1:
                angle = total
            if angle <= settings.ANGLE_EPSILON or angle >= math.pi - settings.ANGLE_EPSILON:
                continue
            side_a, side_b = first.connection, second.connection
            va = np.array(side_a.holonomy)
            vb = rotate(va, angle) * (side_b.length / side_a.length)
            vertex_a, vertex_b = side_a.end_vertex, side_b.end_vertex
            total_a = surface.vertex_angles[vertex_a]
            total_b = surface.vertex_angles[vertex_b]
            germ_ab = (side_a.end_germ - ccw_angle(vb - va, -va)) % total_a
            germ_ba = (side_b.end_germ + ccw_angle(-vb, va - vb)) % total_b
            third = _find_end(ends, vertex_a, germ_ab, total_a)
            if third is None or third.connection.end_vertex != vertex_b:
                continue
            if not _same_germ(third.connection.end_germ, germ_ba, total_b):
                continue
            if not _triangle_is_empty(surface, first, second, angle):
                continue
            face = Face(
                corners=(
                    (vertex, first.germ),
                    (vertex_a, third.germ),
                    (vertex_b, side_b.end_germ),
                ),
                sides=(side_a, third.connection, side_b.reversed()),
                vectors=(
                    (float(va[0]), float(va[1])),
                    (float(vb[0] - va[0]), float(vb[1] - va[1])),
                    (float(-vb[0]), float(-vb[1])),
                ),
            )
            faces.setdefault(face.ident, face)
    return sorted(faces.values(), key=lambda f: f.ident)


def make_complex(
    surface: HalfTranslationSurface, connections: list[SaddleConnection]
) -> Complex:
    """Complex spanned by pairwise disjoint connections."""
    complex_ = Complex(surface=surface, connections={c.key: c for c in connections})
    complex_.faces = find_faces(complex_)
    return complex_


def are_disjoint(
    surface: HalfTranslationSurface, first: SaddleConnection, second: SaddleConnection
) -> bool:
    """Whether two connections meet only at cone points."""
    if first.key == second.key:
        return False
    hits = piece_intersections(
        surface, trace_connection(surface, first), trace_connection(surface, second)
    )
    return not hits


def extend_complex(
    surface: HalfTranslationSurface, complex_: Complex, connection: SaddleConnection
) -> Complex:
    """Enlarge a complex using a connection that is not yet in it.

    A connection disjoint from the complex is added as it is. Otherwise the shortest
    connection disjoint from the complex of length at most 2 * max_length + length of
    `connection` is added.

    Args:
        surface (HalfTranslationSurface): The surface.
        complex_ (Complex): Current complex.
        connection (SaddleConnection): Candidate connection.

    Returns:
        Complex: A strictly larger complex.

    Raises:
        NotApplicableError: If `connection` is already in the complex or the complex is
            already a triangulation.
    """
    if connection in complex_ or complex_.is_triangulation():
        error_msg = "The complex already contains the connection or is a triangulation"
        raise NotApplicableError(error_msg)
    members = list(complex_.connections.values())
    if all(are_disjoint(surface, connection, other) for other in members):
        logger.debug("Connection of length %.6g added directly", connection.length)
        return make_complex(surface, [*members, connection])
    bound = 2.0 * complex_.max_length + connection.length
    for candidate in enumerate_saddle_connections(surface, bound):
        if candidate in complex_:
            continue
        if all(are_disjoint(surface, candidate, other) for other in members):
            logger.debug(
                "Crossing connection replaced by one of length %.6g (bound %.6g)",
                candidate.length,
                bound,
            )
            return make_complex(surface, [*members, candidate])
    error_msg = f"No connection of length <= {bound:.6g} is disjoint from the complex"
    raise NotApplicableError(error_msg)


class Completion(BaseModel):
    """A triangulation grown from a complex and its edge-to-diameter ratio."""

    triangulation: Triangulation
    complex_: Complex
    complex_size: int
    steps: int
    max_edge: float
    diameter_upper: float
    constant: float


def triangulation_from_faces(surface: HalfTranslationSurface, faces: list[Face]) -> Triangulation:
    """Glue the faces of a complete complex into a surface that keeps labels and germs."""
    edges = np.array([face.vectors for face in faces], dtype=float)
    occurrences: dict[tuple, list[tuple[int, int]]] = {}
    for t, face in enumerate(faces):
        for k, side in enumerate(face.sides):
            occurrences.setdefault(side.key, []).append((t, k))
    partners = np.zeros((len(faces), 3, 2), dtype=int)
    flips = np.zeros((len(faces), 3), dtype=bool)
    for key, halves in occurrences.items():
        if len(halves) != 2:  # noqa: PLR2004
            error_msg = f"Side {key} bounds {len(halves)} faces"
            raise NotApplicableError(error_msg)
        (t, k), (u, j) = halves
        partners[t, k], partners[u, j] = (u, j), (t, k)
        same = np.abs(edges[t, k] - edges[u, j]).max() < np.abs(edges[t, k] + edges[u, j]).max()
        flips[t, k] = flips[u, j] = bool(same)
    labels = np.array([[v for v, _ in face.corners] for face in faces], dtype=int)
    references: list[VertexReference | None] = [None] * surface.n_vertices
    for t, face in enumerate(faces):
        for k, (vertex, germ) in enumerate(face.corners):
            opening = ccw_angle(edges[t, k], -edges[t, (k - 1) % 3])
            local = (-germ) % surface.vertex_angles[vertex]
            if references[vertex] is None and local < opening - settings.ANGLE_EPSILON:
                references[vertex] = VertexReference(t, k, local)
            elif references[vertex] is None and local > surface.vertex_angles[vertex] - 1e-6:
                references[vertex] = VertexReference(t, k, 0.0)
    rebuilt = HalfTranslationSurface(
        edges,
        partners,
        flips,
        vertex_labels=labels,
        references=references,
        name=surface.name,
    )
    return triangulation_of(rebuilt)


def _edges_on(surface: HalfTranslationSurface, delaunay: Triangulation) -> list[SaddleConnection]:
    """Delaunay edges as connections whose corners index the triangles of `surface`.

    A flipped Delaunay copy keeps vertex labels and germs, so its edges are found again
    among the connections of `surface` by key.
    """
    if delaunay.surface is surface:
        return list(delaunay.connections)
    wanted = delaunay.keys
    longest = max(c.length for c in delaunay.connections)
    found = {
        c.key: c for c in enumerate_saddle_connections(surface, longest) if c.key in wanted
    }
    if len(found) != len(wanted):
        error_msg = f"{len(wanted) - len(found)} Delaunay edges have no match on {surface.name}"
        raise NotApplicableError(error_msg)
    return list(found.values())


def complete_to_triangulation(
    surface: HalfTranslationSurface, complex_: Complex
) -> Completion:
    """Extend a complex by Delaunay edges until it is a triangulation.

    Args:
        surface (HalfTranslationSurface): The surface.
        complex_ (Complex): Seed complex, for example a single connection.

    Returns:
        Completion: The triangulation and the fitted constant max edge / diameter.
    """
    delaunay = delaunay_triangulation(surface)
    pool = sorted(_edges_on(surface, delaunay), key=lambda c: (c.length, c.key))
    steps = 0
    while not complex_.is_triangulation():
        progressed = False
        for candidate in pool:
            if complex_.is_triangulation():
                break
            if candidate in complex_:
                continue
            complex_ = extend_complex(surface, complex_, candidate)
            steps += 1
            progressed = True
        if not progressed:
            error_msg = "Delaunay edges are exhausted before the complex is complete"
            raise NotApplicableError(error_msg)
    triangulation = triangulation_from_faces(surface, complex_.faces)
    _, upper = diameter_interval(delaunay)
    max_edge = complex_.max_length
    logger.debug("Completed complex in %d steps, max edge %.6g", steps, max_edge)
    return Completion(
        triangulation=triangulation,
        complex_=complex_,
        complex_size=complex_.size,
        steps=steps,
        max_edge=max_edge,
        diameter_upper=upper,
        constant=max_edge / upper,
    )
