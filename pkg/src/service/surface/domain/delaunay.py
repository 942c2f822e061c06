"""Flat Delaunay triangulations obtained by edge flips."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import BudgetExceededError
from src.service.surface.domain.saddle import SaddleConnection, edge_connection
from src.service.surface.domain.surface_core import (
    HalfTranslationSurface,
    VertexReference,
    ccw_angle,
    cross,
    rotate,
)

logger = logging.getLogger(__name__)

FLIP_LIMIT = 100_000


class Triangulation(BaseModel):
    """Triangulation of a flat surface by saddle connections.

    The faces are the triangles of `surface`, which shares vertex labels and germs with
    the surface it was computed from. `connections[i]` is the saddle connection of edge
    id i and `edge_ids[t, k]` the edge id of half-edge (t, k).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    surface: HalfTranslationSurface
    connections: list[SaddleConnection]
    edge_ids: np.ndarray

    @property
    def keys(self) -> set[tuple]:
        return {c.key for c in self.connections}

    def euler_characteristic(self) -> int:
        s = self.surface
        return s.n_vertices - len(self.connections) + s.n_triangles


def triangulation_of(surface: HalfTranslationSurface) -> Triangulation:
    """The triangulation formed by the stored triangles of a surface."""
    ids = surface.edge_ids()
    connections = [edge_connection(surface, t, k) for t, k in surface.edge_representatives()]
    return Triangulation(surface=surface, connections=connections, edge_ids=ids)


def incircle(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> float:
    """Positive when d lies inside the circle through the counterclockwise triangle abc."""
    rows = np.array([a - d, b - d, c - d])
    matrix = np.column_stack([rows, (rows**2).sum(axis=1)])
    return float(np.linalg.det(matrix))


def circumradius(edges: np.ndarray) -> float:
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    area = 0.5 * cross(edges[0], edges[1])
    return float(lengths.prod() / (4.0 * area))


def _positions(edges: np.ndarray) -> np.ndarray:
    return np.array([np.zeros(2), edges[0], edges[0] + edges[1]])


def _quad(
    edges: np.ndarray, partners: np.ndarray, flips: np.ndarray, t: int, e: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int, int]:
    u, j = (int(x) for x in partners[t, e])
    sigma = -1 if flips[t, e] else 1
    pt, pu = _positions(edges[t]), _positions(edges[u])
    a, b, c = pt[e], pt[(e + 1) % 3], pt[(e + 2) % 3]
    d = a + sigma * (pu[(j + 2) % 3] - pu[(j + 1) % 3])
    return a, b, c, d, u, j, sigma


def _sign_normalized(vector: np.ndarray) -> tuple[float, float]:
    v = np.round(vector, 9) + 0.0
    return tuple(v) if tuple(v) >= (0.0, 0.0) else tuple(-v + 0.0)


def _edge_status(
    edges: np.ndarray, partners: np.ndarray, flips: np.ndarray, t: int, e: int
) -> str:
    a, b, c, d, u, _, _ = _quad(edges, partners, flips, t, e)
    if u == t:
        return "keep"
    if cross(d - a, c - d) <= 0.0 or cross(b - d, c - b) <= 0.0:
        return "keep"
    scale = max(np.hypot(*(b - a)), np.hypot(*(d - c))) ** 4
    value = incircle(a, b, c, d) / scale
    if value > settings.GEOMETRY_EPSILON:
        return "flip"
    if value >= -settings.GEOMETRY_EPSILON and _sign_normalized(d - c) < _sign_normalized(b - a):
        return "flip"
    return "keep"


def _flip(
    edges: np.ndarray,
    partners: np.ndarray,
    flips: np.ndarray,
    labels: np.ndarray,
    references: list[VertexReference],
    t: int,
    e: int,
) -> None:
    a, b, c, d, u, j, sigma = _quad(edges, partners, flips, t, e)
    old_edges_t, old_edges_u = edges[t].copy(), edges[u].copy()
    old_pos_u = _positions(old_edges_u)
    label_a, label_b, label_c = labels[t, e], labels[t, (e + 1) % 3], labels[t, (e + 2) % 3]
    label_d = labels[u, (j + 2) % 3]

    mapping = {
        (u, (j + 1) % 3): ((t, 0), sigma),
        (u, (j + 2) % 3): ((u, 0), sigma),
        (t, (e + 1) % 3): ((u, 1), 1),
        (t, (e + 2) % 3): ((t, 2), 1),
    }
    old = {h: ((int(partners[h][0]), int(partners[h][1])), bool(flips[h])) for h in mapping}

    edges[t] = [d - a, c - d, a - c]
    edges[u] = [b - d, c - b, d - c]
    labels[t] = [label_a, label_d, label_c]
    labels[u] = [label_d, label_b, label_c]
    partners[t, 1] = (u, 2)
    partners[u, 2] = (t, 1)
    flips[t, 1] = flips[u, 2] = False
    for h, ((new_h, mult_h)) in mapping.items():
        partner, flip = old[h]
        if partner in mapping:
            new_p, mult_p = mapping[partner]
        else:
            new_p, mult_p = partner, 1
        new_flip = flip ^ (mult_h * mult_p == -1)
        partners[new_h] = new_p
        flips[new_h] = new_flip
        if partner not in mapping:
            partners[new_p] = new_h
            flips[new_p] = new_flip

    corners = {(t, 0): a, (t, 1): d, (t, 2): c, (u, 0): d, (u, 1): b, (u, 2): c}
    for index, ref in enumerate(references):
        if ref.triangle not in (t, u):
            continue
        if ref.triangle == t:
            point = _positions(old_edges_t)[ref.corner]
            direction = rotate(old_edges_t[ref.corner], ref.angle)
        else:
            point = a + sigma * (old_pos_u[ref.corner] - old_pos_u[(j + 1) % 3])
            direction = sigma * rotate(old_edges_u[ref.corner], ref.angle)
        references[index] = _relocate(edges, corners, point, direction, ref)


def _relocate(
    edges: np.ndarray,
    corners: dict[tuple[int, int], np.ndarray],
    point: np.ndarray,
    direction: np.ndarray,
    ref: VertexReference,
) -> VertexReference:
    fallback = None
    for (tri, k), where in corners.items():
        tolerance = 1e3 * settings.GEOMETRY_EPSILON * max(1.0, np.abs(point).max())
        if np.hypot(*(where - point)) > tolerance:
            continue
        first = edges[tri, k]
        opening = ccw_angle(first, -edges[tri, (k - 1) % 3])
        local = ccw_angle(first, direction)
        if local < opening - settings.ANGLE_EPSILON:
            return VertexReference(tri, k, local)
        if local <= opening + settings.ANGLE_EPSILON or local > 2.0 * math.pi - 1e-6:
            fallback = VertexReference(tri, k, 0.0 if local > math.pi else opening)
    if fallback is None:  # pragma: no cover - every direction at a quad corner is covered
        logger.warning("Could not relocate vertex reference %s", ref)
        return ref
    return fallback


def delaunay_triangulation(surface: HalfTranslationSurface) -> Triangulation:
    """Flip edges until every edge passes the empty-circumdisk test.

    Cocircular quadrilaterals keep the diagonal whose sign-normalised holonomy is
    lexicographically smaller, so the output does not depend on the flip order.

    Args:
        surface (HalfTranslationSurface): Any valid surface.

    Returns:
        Triangulation: Delaunay triangulation on a re-triangulated copy of the surface
        that keeps vertex labels and germs.

    Raises:
        BudgetExceededError: If the flip sequence does not terminate.
    """
    edges = surface.edges.copy()
    partners = surface.partners.copy()
    flips = surface.flips.copy()
    labels = surface.vertex_of_corner.copy()
    references = list(surface.references)
    done = 0
    changed = True
    while changed:
        changed = False
        for t in range(surface.n_triangles):
            for e in range(3):
                if _edge_status(edges, partners, flips, t, e) != "flip":
                    continue
                _flip(edges, partners, flips, labels, references, t, e)
                done += 1
                changed = True
                if done > FLIP_LIMIT:
                    error_msg = f"Delaunay flipping did not terminate after {FLIP_LIMIT} flips"
                    raise BudgetExceededError(error_msg)
    logger.debug("Delaunay triangulation of %s after %d flips", surface.name, done)
    if done == 0:
        return triangulation_of(surface)
    flipped = HalfTranslationSurface(
        edges,
        partners,
        flips,
        vertex_labels=labels,
        references=references,
        name=surface.name,
    )
    return triangulation_of(flipped)


def delaunay_defects(surface: HalfTranslationSurface) -> list[tuple[int, int, float]]:
    """Edges whose opposite vertex lies inside the circumcircle by more than the tolerance."""
    defects = []
    for t in range(surface.n_triangles):
        for e in range(3):
            a, b, c, d, u, _, _ = _quad(surface.edges, surface.partners, surface.flips, t, e)
            if u == t:
                continue
            scale = max(np.hypot(*(b - a)), np.hypot(*(d - c))) ** 4
            value = incircle(a, b, c, d) / scale
            if value > settings.GEOMETRY_EPSILON:
                defects.append((t, e, value))
    return defects
