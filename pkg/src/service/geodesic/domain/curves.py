"""Closed curves as cyclic words of edge crossings in the triangulation of a surface."""

import logging
from collections.abc import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import MalformedCurveError, NullHomotopicError
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.surface.domain.tracing import SurfacePoint, TracedSegment, trace_ray

logger = logging.getLogger(__name__)

HalfEdge = tuple[int, int]


class CurveClass(BaseModel):
    """Free homotopy class of a closed curve.

    `crossings[i] = (t, e)` means the curve leaves triangle t through its edge e; the
    triangle entered is the triangle of `crossings[i + 1]`, cyclically.
    """

    model_config = ConfigDict(frozen=True)

    crossings: tuple[HalfEdge, ...]

    def __len__(self) -> int:
        return len(self.crossings)

    def rotated(self, start: int) -> "CurveClass":
        start %= len(self.crossings)
        return CurveClass(crossings=self.crossings[start:] + self.crossings[:start])

    def reversed(self, surface: HalfTranslationSurface) -> "CurveClass":
        """The same curve run backwards."""
        back = []
        for t, e in reversed(self.crossings):
            u, j, _ = surface.glue(t, e)
            back.append((u, j))
        return CurveClass(crossings=tuple(back))


def _is_backtrack(surface: HalfTranslationSurface, first: HalfEdge, second: HalfEdge) -> bool:
    u, j, _ = surface.glue(*first)
    return (u, j) == tuple(second)


def reduce_word(surface: HalfTranslationSurface, crossings: Iterable[HalfEdge]) -> list[HalfEdge]:
    """Cancel immediate backtracks, cyclically, until none is left."""
    stack: list[HalfEdge] = []
    for crossing in crossings:
        crossing = (int(crossing[0]), int(crossing[1]))
        if stack and _is_backtrack(surface, stack[-1], crossing):
            stack.pop()
        else:
            stack.append(crossing)
    start, end = 0, len(stack)
    while end - start >= 2 and _is_backtrack(surface, stack[end - 1], stack[start]):
        start += 1
        end -= 1
    return stack[start:end]


def validate_curve(
    surface: HalfTranslationSurface, crossings: Sequence[Sequence[int]]
) -> CurveClass:
    """Check a crossing word against the surface and return its reduced class.

    Raises:
        MalformedCurveError: If a half-edge does not exist or two consecutive crossings do
            not share a triangle.
        NullHomotopicError: If the word cancels completely.
    """
    word: list[HalfEdge] = []
    for entry in crossings:
        if len(entry) != 2:
            error_msg = f"Crossing {list(entry)} is not a (triangle, edge) pair"
            raise MalformedCurveError(error_msg)
        t, e = int(entry[0]), int(entry[1])
        if not (0 <= t < surface.n_triangles and 0 <= e < 3):
            error_msg = f"Crossing {(t, e)} does not name a half-edge of the surface"
            raise MalformedCurveError(error_msg)
        word.append((t, e))
    if not word:
        error_msg = "A curve must cross at least one edge"
        raise MalformedCurveError(error_msg)
    for index, (t, e) in enumerate(word):
        following = word[(index + 1) % len(word)]
        u, _, _ = surface.glue(t, e)
        if u != following[0]:
            error_msg = (
                f"Crossing {index} enters triangle {u} but crossing "
                f"{(index + 1) % len(word)} leaves triangle {following[0]}"
            )
            raise MalformedCurveError(error_msg)
    reduced = reduce_word(surface, word)
    if not reduced:
        error_msg = "The crossing word cancels to the trivial curve"
        raise NullHomotopicError(error_msg)
    logger.debug("Curve word of length %d reduced to %d", len(word), len(reduced))
    return CurveClass(crossings=tuple(reduced))


def word_of_trace(trace: TracedSegment) -> list[HalfEdge]:
    """Edges crossed by a traced segment, in order."""
    return [(crossing.triangle, crossing.edge) for crossing in trace.crossings]


def word_of_path(
    surface: HalfTranslationSurface,
    start: SurfacePoint,
    displacements: Sequence[Sequence[float]],
) -> CurveClass:
    """Class of the closed polygonal path with the given developed displacements.

    Displacements are read in the chart of `start` and carried across flip gluings. The
    path must avoid cone points and return to its start.
    """
    point, sign, word = start, 1, []
    for displacement in displacements:
        d = np.asarray(displacement, dtype=float)
        length = float(np.hypot(*d))
        if length <= settings.GEOMETRY_EPSILON:
            continue
        trace = trace_ray(surface, point, sign * d, length)
        if trace.hit is not None:
            error_msg = f"Path meets cone point {trace.hit.vertex}"
            raise MalformedCurveError(error_msg)
        word.extend(word_of_trace(trace))
        sign = -sign if trace.flipped else sign
        point = trace.end
    closes = point.triangle == start.triangle and np.hypot(
        point.x - start.x, point.y - start.y
    ) < 1e3 * settings.GEOMETRY_EPSILON
    if not closes:
        error_msg = "Path does not return to its start point"
        raise MalformedCurveError(error_msg)
    return validate_curve(surface, word)
