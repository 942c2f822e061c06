"""Half-translation surfaces stored as glued Euclidean triangles.

A surface is a list of triangles, each given by three edge vectors in counterclockwise
order, and a perfect matching of the triangle edges. Matched edges either carry
opposite vectors (a translation gluing) or equal vectors (a flip gluing, the two charts
differ by z -> -z + c). Local vertices of triangle t sit at 0, e0 and e0 + e1.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.core.config import settings
from src.service.exceptions import (
    BadConeAngleError,
    DegenerateTriangleError,
    UnglueableEdgeError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

Corner = tuple[int, int]
HalfEdge = tuple[int, int]


def cross(u: np.ndarray, v: np.ndarray) -> float:
    """Planar cross product u x v."""
    return float(u[0] * v[1] - u[1] * v[0])


def ccw_angle(u: np.ndarray, v: np.ndarray, eps: float | None = None) -> float:
    """Counterclockwise angle from u to v in [0, 2pi).

    Angles within eps below zero are snapped to zero.
    """
    eps = settings.ANGLE_EPSILON if eps is None else eps
    angle = math.atan2(cross(u, v), float(u[0] * v[0] + u[1] * v[1]))
    if angle < 0.0:
        angle = 0.0 if angle > -eps else angle + TWO_PI
    return angle


def rotate(v: np.ndarray, angle: float) -> np.ndarray:
    """Rotate a planar vector counterclockwise."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


class Singularity(BaseModel):
    """Cone point of the flat metric.

    A marked point has angle 2pi and order 0, a pole has angle pi and order -1.
    """

    model_config = ConfigDict(frozen=True)

    vertex: int
    angle: float
    order: int
    marked: bool
    corners: tuple[Corner, ...]


class SurfaceMetrics(BaseModel):
    """Area, diameter interval and genus of a surface."""

    area: float
    diameter_lower: float
    diameter_upper: float
    genus: int


class VertexReference(NamedTuple):
    """Outgoing direction that measures germ angle zero at a vertex.

    The direction is the edge vector of `corner` in `triangle` rotated by `angle`.
    """

    triangle: int
    corner: int
    angle: float


class HalfTranslationSurface:
    """Immutable triangulated half-translation surface.

    Attributes:
        edges (np.ndarray): (F, 3, 2) edge vectors, counterclockwise per triangle.
        partners (np.ndarray): (F, 3, 2) glued half-edge (triangle, edge) for every edge.
        flips (np.ndarray): (F, 3) flip flag per edge.
        vertex_of_corner (np.ndarray): (F, 3) vertex id of each corner.
        vertex_corners (list[list[Corner]]): corners of each vertex in counterclockwise
            order, starting at the reference corner.
        corner_angles (np.ndarray): (F, 3) interior angle of each corner.
        germ_offsets (np.ndarray): (F, 3) angle from the vertex reference to the first
            edge of each corner, modulo the cone angle.
    """

    def __init__(
        self,
        edges: np.ndarray | list,
        partners: np.ndarray | list,
        flips: np.ndarray | list,
        *,
        vertex_labels: np.ndarray | None = None,
        references: list[VertexReference] | None = None,
        name: str = "",
    ) -> None:
        self.edges = np.array(edges, dtype=float).reshape(-1, 3, 2)
        self.partners = np.array(partners, dtype=int).reshape(-1, 3, 2)
        self.flips = np.array(flips, dtype=bool).reshape(-1, 3)
        self.name = name
        for array in (self.edges, self.partners, self.flips):
            array.setflags(write=False)
        self._validate()
        self.positions = np.zeros((self.n_triangles, 3, 2))
        self.positions[:, 1] = self.edges[:, 0]
        self.positions[:, 2] = self.edges[:, 0] + self.edges[:, 1]
        self.positions.setflags(write=False)
        self._build_vertices(vertex_labels, references)

    # CONSTRUCTION

    @classmethod
    def from_gluing_list(
        cls,
        triangles: list[list[list[float]]],
        gluings: list[tuple[HalfEdge, HalfEdge, bool]],
        name: str = "",
    ) -> "HalfTranslationSurface":
        """Build a surface from the file representation.

        Args:
            triangles: Edge vectors per triangle.
            gluings: Entries `((t, e), (u, j), flip)`, one per glued pair.
            name: Optional fixture name.

        Returns:
            HalfTranslationSurface: The validated surface.

        Raises:
            UnglueableEdgeError: If an edge is glued twice, to itself, or not at all.
        """
        n = len(triangles)
        partners = -np.ones((n, 3, 2), dtype=int)
        flips = np.zeros((n, 3), dtype=bool)
        for (t, e), (u, j), flip in gluings:
            for a, b in (((t, e), (u, j)), ((u, j), (t, e))):
                if not (0 <= a[0] < n and 0 <= a[1] < 3):
                    error_msg = f"Gluing refers to missing edge {a}"
                    raise UnglueableEdgeError(error_msg)
                if partners[a[0], a[1], 0] >= 0:
                    error_msg = f"Edge {a} is glued more than once"
                    raise UnglueableEdgeError(error_msg)
                partners[a[0], a[1]] = b
                flips[a[0], a[1]] = bool(flip)
        missing = np.argwhere(partners[:, :, 0] < 0)
        if len(missing) > 0:
            error_msg = f"Edges without gluing: {[tuple(int(x) for x in m) for m in missing]}"
            raise UnglueableEdgeError(error_msg)
        return cls(triangles, partners, flips, name=name)

    def _validate(self) -> None:
        eps = settings.GEOMETRY_EPSILON
        n = self.n_triangles
        if n == 0:
            error_msg = "A surface needs at least one triangle"
            raise DegenerateTriangleError(error_msg)
        scale = max(1.0, float(np.abs(self.edges).max()))
        for t in range(n):
            e = self.edges[t]
            if np.abs(e.sum(axis=0)).max() > eps * scale:
                error_msg = f"Triangle {t} does not close up: {e.tolist()}"
                raise DegenerateTriangleError(error_msg)
            if cross(e[0], e[1]) <= eps * scale * scale:
                error_msg = f"Triangle {t} has non-positive area"
                raise DegenerateTriangleError(error_msg)
        for t in range(n):
            for k in range(3):
                u, j = self.partners[t, k]
                if not (0 <= u < n and 0 <= j < 3):
                    error_msg = f"Edge {(t, k)} is glued to a missing edge {(int(u), int(j))}"
                    raise UnglueableEdgeError(error_msg)
                if (u, j) == (t, k):
                    error_msg = f"Edge {(t, k)} is glued to itself"
                    raise UnglueableEdgeError(error_msg)
                if tuple(self.partners[u, j]) != (t, k) or self.flips[u, j] != self.flips[t, k]:
                    error_msg = f"Gluing of {(t, k)} and {(int(u), int(j))} is not symmetric"
                    raise UnglueableEdgeError(error_msg)
                mine, theirs = self.edges[t, k], self.edges[u, j]
                if abs(np.hypot(*mine) - np.hypot(*theirs)) > eps * scale:
                    error_msg = (
                        f"Edge {(t, k)} of length {np.hypot(*mine):.6g} glued to "
                        f"{(int(u), int(j))} of length {np.hypot(*theirs):.6g}"
                    )
                    raise UnglueableEdgeError(error_msg)
                expected = mine if self.flips[t, k] else -mine
                if np.abs(theirs - expected).max() > eps * scale:
                    error_msg = f"Edge vectors of {(t, k)} and {(int(u), int(j))} do not match"
                    raise UnglueableEdgeError(error_msg)

    def _build_vertices(
        self,
        vertex_labels: np.ndarray | None,
        references: list[VertexReference] | None,
    ) -> None:
        n = self.n_triangles
        angles = np.zeros((n, 3))
        for t in range(n):
            for k in range(3):
                angles[t, k] = ccw_angle(self.edges[t, k], -self.edges[t, (k - 1) % 3])
        self.corner_angles = angles
        seen = np.zeros((n, 3), dtype=bool)
        orbits: list[list[Corner]] = []
        for t in range(n):
            for k in range(3):
                if seen[t, k]:
                    continue
                orbit = []
                corner = (t, k)
                while not seen[corner]:
                    seen[corner] = True
                    orbit.append(corner)
                    corner = self.next_ccw_corner(*corner)
                orbits.append(orbit)

        if vertex_labels is None:
            labels = list(range(len(orbits)))
        else:
            labels = [int(vertex_labels[orbit[0]]) for orbit in orbits]
            if sorted(labels) != list(range(len(orbits))):
                labels = list(range(len(orbits)))
        vertex_of_corner = np.zeros((n, 3), dtype=int)
        ordered: list[list[Corner]] = [[] for _ in orbits]
        for label, orbit in zip(labels, orbits, strict=True):
            ordered[label] = orbit
            for corner in orbit:
                vertex_of_corner[corner] = label

        refs: list[VertexReference] = []
        for label, orbit in enumerate(ordered):
            ref = None if references is None else references[label]
            if ref is None or (ref.triangle, ref.corner) not in orbit:
                ref = VertexReference(orbit[0][0], orbit[0][1], 0.0)
            start = orbit.index((ref.triangle, ref.corner))
            ordered[label] = orbit[start:] + orbit[:start]
            refs.append(ref)

        self.vertex_of_corner = vertex_of_corner
        self.vertex_corners = ordered
        self.references = refs
        self.vertex_angles = np.array(
            [sum(angles[c] for c in orbit) for orbit in ordered], dtype=float
        )
        offsets = np.zeros((n, 3))
        for label, orbit in enumerate(ordered):
            running = -refs[label].angle
            for corner in orbit:
                offsets[corner] = running % self.vertex_angles[label]
                running += angles[corner]
        self.germ_offsets = offsets
        for array in (self.corner_angles, self.vertex_of_corner, self.germ_offsets):
            array.setflags(write=False)

        eps = settings.ANGLE_EPSILON
        for label, total in enumerate(self.vertex_angles):
            multiple = total / math.pi
            tolerance = 10.0 * eps * len(ordered[label])
            if abs(total - math.pi * round(multiple)) > tolerance or round(multiple) < 1:
                error_msg = f"Vertex {label} has cone angle {total:.12g}, not a multiple of pi"
                raise BadConeAngleError(error_msg)

    # COMBINATORICS

    @property
    def n_triangles(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_corners)

    @property
    def n_edges(self) -> int:
        return 3 * self.n_triangles // 2

    def glue(self, t: int, e: int) -> tuple[int, int, int]:
        """Partner of half-edge (t, e) and the chart sign across it."""
        u, j = self.partners[t, e]
        return int(u), int(j), -1 if self.flips[t, e] else 1

    def transition(self, t: int, e: int) -> tuple[int, int, int, np.ndarray]:
        """Chart change across edge e of triangle t.

        Returns:
            tuple: `(u, j, sigma, c)` with `z_u = sigma * z_t + c`.
        """
        u, j, sigma = self.glue(t, e)
        c = self.positions[u, j] - sigma * self.positions[t, (e + 1) % 3]
        return u, j, sigma, c

    def next_ccw_corner(self, t: int, k: int) -> Corner:
        """Corner met next when turning counterclockwise around the vertex of (t, k)."""
        u, j, _ = self.glue(t, (k - 1) % 3)
        return u, j

    def next_cw_corner(self, t: int, k: int) -> Corner:
        """Corner met next when turning clockwise around the vertex of (t, k)."""
        u, j, _ = self.glue(t, k)
        return u, (j + 1) % 3

    def edge_ids(self) -> np.ndarray:
        """Index of the undirected edge of every half-edge, ordered by first occurrence."""
        ids = -np.ones((self.n_triangles, 3), dtype=int)
        counter = 0
        for t in range(self.n_triangles):
            for k in range(3):
                if ids[t, k] < 0:
                    u, j, _ = self.glue(t, k)
                    ids[t, k] = ids[u, j] = counter
                    counter += 1
        return ids

    def edge_representatives(self) -> list[HalfEdge]:
        """One half-edge per undirected edge, in edge-id order."""
        ids = self.edge_ids()
        reps: list[HalfEdge] = [(-1, -1)] * self.n_edges
        for t in range(self.n_triangles):
            for k in range(3):
                if reps[ids[t, k]][0] < 0:
                    reps[ids[t, k]] = (t, k)
        return reps

    # GERMS

    def germ(self, t: int, k: int, direction: np.ndarray) -> float:
        """Angle of an outgoing direction at corner (t, k) measured from the vertex reference."""
        vertex = self.vertex_of_corner[t, k]
        local = ccw_angle(self.edges[t, k], direction)
        if local > self.corner_angles[t, k] + settings.ANGLE_EPSILON:
            local = 0.0 if local > math.pi else self.corner_angles[t, k]
        return (self.germ_offsets[t, k] + local) % self.vertex_angles[vertex]

    def locate_germ(self, vertex: int, germ: float) -> tuple[int, int, np.ndarray]:
        """Corner containing an outgoing direction and the direction in its chart.

        Args:
            vertex: Vertex id.
            germ: Angle from the vertex reference.

        Returns:
            tuple: `(t, k, unit_direction)`.
        """
        total = self.vertex_angles[vertex]
        eps = settings.ANGLE_EPSILON
        germ %= total
        best = None
        for t, k in self.vertex_corners[vertex]:
            local = (germ - self.germ_offsets[t, k]) % total
            if local > total - eps:
                local -= total
            if -eps <= local < self.corner_angles[t, k] - eps:
                best = (t, k, max(local, 0.0))
                break
            if best is None and -eps <= local <= self.corner_angles[t, k] + eps:
                best = (t, k, min(local, self.corner_angles[t, k]))
        if best is None:  # pragma: no cover - angles cover [0, total)
            t, k = self.vertex_corners[vertex][0]
            best = (t, k, 0.0)
        t, k, local = best
        edge = self.edges[t, k]
        direction = rotate(edge / np.hypot(*edge), local)
        return t, k, direction

    # INVARIANTS

    def singularities(self) -> list[Singularity]:
        """Cone points with their orders."""
        result = []
        for vertex, total in enumerate(self.vertex_angles):
            order = round(total / math.pi) - 2
            result.append(
                Singularity(
                    vertex=vertex,
                    angle=float(total),
                    order=order,
                    marked=order == 0,
                    corners=tuple(self.vertex_corners[vertex]),
                )
            )
        return result

    def component_labels(self) -> np.ndarray:
        """Connected component of every triangle."""
        rows = np.repeat(np.arange(self.n_triangles), 3)
        cols = self.partners[:, :, 0].reshape(-1)
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n_triangles,) * 2)
        _, labels = connected_components(graph, directed=False)
        return labels

    def n_components(self) -> int:
        return len(set(self.component_labels().tolist()))

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    @property
    def genus(self) -> int:
        """Sum of the genera of the connected components."""
        return (2 * self.n_components() - self.euler_characteristic) // 2

    @property
    def area(self) -> float:
        return 0.5 * float(
            np.sum(
                self.edges[:, 0, 0] * self.edges[:, 1, 1]
                - self.edges[:, 0, 1] * self.edges[:, 1, 0]
            )
        )

    def is_translation_surface(self) -> bool:
        return not bool(self.flips.any())

    def with_edges(
        self, edges: np.ndarray, references: list[VertexReference] | None = None
    ) -> "HalfTranslationSurface":
        """Same combinatorics, new edge vectors."""
        return HalfTranslationSurface(
            edges,
            self.partners,
            self.flips,
            vertex_labels=self.vertex_of_corner,
            references=self.references if references is None else references,
            name=self.name,
        )

    def __repr__(self) -> str:
        return (
            f"HalfTranslationSurface(name={self.name!r}, triangles={self.n_triangles}, "
            f"vertices={self.n_vertices}, genus={self.genus})"
        )


def stratum_signature(surface: HalfTranslationSurface) -> list[int]:
    """Orders of the zeros (and poles), marked points excluded, in decreasing order."""
    return sorted((s.order for s in surface.singularities() if not s.marked), reverse=True)


def gauss_bonnet_defect(surface: HalfTranslationSurface) -> float:
    """Sum of (angle / pi - 2) minus (4g - 4) summed over components."""
    total = sum(angle / math.pi - 2.0 for angle in surface.vertex_angles)
    return total - float(4 * surface.genus - 4 * surface.n_components())


def scale_surface(surface: HalfTranslationSurface, factor: float) -> HalfTranslationSurface:
    """Uniformly scale every edge vector."""
    return surface.with_edges(surface.edges * factor)


def normalize_area(surface: HalfTranslationSurface) -> HalfTranslationSurface:
    """Rescale to unit area."""
    return scale_surface(surface, surface.area ** -0.5)


def canonical_form(surface: HalfTranslationSurface, decimals: int = 7) -> tuple:
    """Relabelling and sign invariant fingerprint of a surface.

    Each triangle is reduced to the smallest rounded cyclic rotation of its edge vectors
    up to a global sign; gluings contribute the reduced form of the neighbour across
    each edge. Two surfaces with equal fingerprints are equal up to relabelling on every
    fixture the test suite uses.
    """

    def reduce(t: int) -> tuple[tuple, int, int]:
        best = None
        for sign in (1, -1):
            e = np.round(sign * surface.edges[t], decimals) + 0.0
            for shift in range(3):
                key = tuple(tuple(e[(shift + i) % 3]) for i in range(3))
                if best is None or key < best[0]:
                    best = (key, shift, sign)
        return best

    reduced = [reduce(t) for t in range(surface.n_triangles)]
    rows = []
    for t, (key, shift, _) in enumerate(reduced):
        neighbours = tuple(
            reduced[surface.partners[t, (shift + i) % 3, 0]][0] for i in range(3)
        )
        rows.append((key, neighbours))
    return tuple(sorted(rows))


class DoubleCover(BaseModel):
    """Orientation double cover of a half-translation surface.

    Triangle `2t + s` of the cover is sheet s over triangle t; sheet 1 carries the negated
    edge vectors. `deck` is the covering involution on triangles.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    cover: HalfTranslationSurface
    projection: list[tuple[int, int]]
    deck: list[int]
    trivial: bool


def orientation_double_cover(surface: HalfTranslationSurface) -> DoubleCover:
    """Build the canonical double cover on which the differential is a square.

    Args:
        surface (HalfTranslationSurface): Any valid surface.

    Returns:
        DoubleCover: Cover without flip gluings plus projection and deck data. The flag
        `trivial` is set when the cover splits into two copies of every component.
    """
    n = surface.n_triangles
    edges = np.zeros((2 * n, 3, 2))
    partners = np.zeros((2 * n, 3, 2), dtype=int)
    for t in range(n):
        for s in (0, 1):
            edges[2 * t + s] = surface.edges[t] if s == 0 else -surface.edges[t]
            for k in range(3):
                u, j, sigma = surface.glue(t, k)
                sheet = s if sigma == 1 else 1 - s
                partners[2 * t + s, k] = (2 * u + sheet, j)
    cover = HalfTranslationSurface(
        edges, partners, np.zeros((2 * n, 3), dtype=bool), name=f"{surface.name}~"
    )
    trivial = cover.n_components() == 2 * surface.n_components()
    logger.debug(
        "Double cover of %s: %d triangles, trivial=%s", surface.name, 2 * n, trivial
    )
    return DoubleCover(
        cover=cover,
        projection=[(t, 1 if s == 0 else -1) for t in range(n) for s in (0, 1)],
        deck=[2 * t + (1 - s) for t in range(n) for s in (0, 1)],
        trivial=trivial,
    )
