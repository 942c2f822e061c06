"""Train tracks dual to triangulations and the multicurves they carry.

In every triangle the edge with the largest horizontal extent, a, satisfies
|x(a)| = |x(b)| + |x(c)| for the other two edges. The dual track has one branch per
triangulation edge and one switch per triangle, where branch a splits into b and c; the
inner branch joining b and c is the one left out. A vertical edge makes two edges tie for
a, and both labelings are kept on record.
"""

import logging
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import NonIntegerWeightsError, SwitchConditionError
from src.service.geodesic.domain.curves import CurveClass, validate_curve
from src.service.surface.domain.delaunay import Triangulation, triangulation_of
from src.service.surface.domain.surface_core import HalfTranslationSurface

logger = logging.getLogger(__name__)

Labeling = tuple[int, int, int]


class Switch(BaseModel):
    """Switch in one triangle: `incoming` is the branch a, `outgoing` the branches b, c."""

    model_config = ConfigDict(frozen=True)

    triangle: int
    labeling: Labeling
    incoming: tuple[int, ...]
    outgoing: tuple[int, ...]
    alternatives: tuple[Labeling, ...] = ()

    @property
    def tied(self) -> bool:
        return len(self.alternatives) > 1


class TrainTrack(BaseModel):
    """Track dual to a triangulation, branches indexed by triangulation edge id."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    surface: HalfTranslationSurface
    edge_ids: np.ndarray
    n_branches: int
    switches: list[Switch]
    cusps: list[int]

    @property
    def maximal(self) -> bool:
        """All complementary regions are trigons."""
        return all(count == 3 for count in self.cusps)

    @property
    def n_ties(self) -> int:
        return sum(switch.tied for switch in self.switches)


class CountingMeasure(BaseModel):
    model_config = ConfigDict(frozen=True)

    weights: tuple[float, ...]

    @property
    def is_integral(self) -> bool:
        return all(float(w).is_integer() and w >= 0 for w in self.weights)

    def __add__(self, other: "CountingMeasure") -> "CountingMeasure":
        return CountingMeasure(
            weights=tuple(a + b for a, b in zip(self.weights, other.weights, strict=True))
        )


def _labelings(x: np.ndarray, eps: float) -> list[Labeling]:
    """Admissible (a, b, c) with |x_a| = |x_b| + |x_c|, b < c, in lexicographic order."""
    widths = np.abs(x)
    top = widths.max()
    found = []
    for a in range(3):
        if top - widths[a] <= eps:
            b, c = sorted({0, 1, 2} - {a})
            found.append((a, b, c))
    return sorted(found)


def dual_train_track(
    surface: HalfTranslationSurface, triangulation: Triangulation | None = None
) -> TrainTrack:
    """Train track dual to the triangles of `triangulation`, or of the surface itself.

    Returns:
        TrainTrack: Switches with the chosen labeling, the lexicographically first when
        a vertical edge allows two, and the cusp count of the region around every vertex.
    """
    triangulation = triangulation_of(surface) if triangulation is None else triangulation
    carrier = triangulation.surface
    ids = triangulation.edge_ids
    cusps = [0] * carrier.n_vertices
    switches = []
    for t in range(carrier.n_triangles):
        x = carrier.edges[t, :, 0]
        eps = settings.GEOMETRY_EPSILON * max(1.0, float(np.abs(x).max()))
        options = _labelings(x, eps)
        a, b, c = options[0]
        cusps[int(carrier.vertex_of_corner[t, (a + 2) % 3])] += 1
        switches.append(
            Switch(
                triangle=t,
                labeling=(a, b, c),
                incoming=(int(ids[t, a]),),
                outgoing=(int(ids[t, b]), int(ids[t, c])),
                alternatives=tuple(options),
            )
        )
    track = TrainTrack(
        surface=carrier,
        edge_ids=ids,
        n_branches=int(ids.max()) + 1,
        switches=switches,
        cusps=cusps,
    )
    logger.debug(
        "Dual track with %d branches, %d switches, %d ties, maximal=%s",
        track.n_branches,
        len(switches),
        track.n_ties,
        track.maximal,
    )
    return track


def vertical_counting_measure(track: TrainTrack) -> CountingMeasure:
    """Weight of every branch equal to the horizontal extent of its edge."""
    weights = [0.0] * track.n_branches
    surface = track.surface
    for t in range(surface.n_triangles):
        for k in range(3):
            weights[int(track.edge_ids[t, k])] = abs(float(surface.edges[t, k, 0]))
    return CountingMeasure(weights=tuple(weights))


def switch_residuals(track: TrainTrack, measure: CountingMeasure) -> list[float]:
    """Incoming minus outgoing weight at every switch."""
    w = measure.weights
    return [
        sum(w[i] for i in switch.incoming) - sum(w[i] for i in switch.outgoing)
        for switch in track.switches
    ]


def check_switch_conditions(
    track: TrainTrack, measure: CountingMeasure, *, exact: bool = False
) -> None:
    """Raises SwitchConditionError at the first unbalanced switch."""
    if len(measure.weights) != track.n_branches:
        error_msg = f"Measure has {len(measure.weights)} weights for {track.n_branches} branches"
        raise SwitchConditionError(error_msg)
    scale = max(1.0, max(measure.weights, default=0.0))
    tolerance = 0.0 if exact else settings.GEOMETRY_EPSILON * scale
    for switch, residual in zip(track.switches, switch_residuals(track, measure), strict=True):
        if abs(residual) > tolerance:
            error_msg = f"Switch in triangle {switch.triangle} is off balance by {residual:.6g}"
            raise SwitchConditionError(error_msg)


def _nearest_slots(local: int, corner: int, count: int, width: int) -> list[int]:
    """The `count` slots of an edge nearest to one of its two corners.

    Slots along half-edge k are numbered from corner k to corner k + 1.
    """
    if corner == local:
        return list(range(count))
    return [width - 1 - m for m in range(count)]


def carried_multicurve(track: TrainTrack, measure: CountingMeasure) -> list[CurveClass]:
    """Components of the multicurve with the given branch traversal counts.

    Every branch with weight w meets its triangulation edge in w points. In each
    triangle the w_b arcs from a to b sit at the corner shared by a and b, nested, and
    likewise for c; following arcs across edges traces out the components.

    Raises:
        NonIntegerWeightsError: If a weight is not a non-negative integer.
        SwitchConditionError: If a switch is unbalanced.
    """
    if not measure.is_integral:
        error_msg = f"Carried multicurves need non-negative integer weights, got {measure.weights}"
        raise NonIntegerWeightsError(error_msg)
    check_switch_conditions(track, measure, exact=True)
    surface = track.surface
    ids = track.edge_ids
    weights = [int(w) for w in measure.weights]
    inside: dict[tuple[int, int, int], tuple[int, int, int]] = {}
    for switch in track.switches:
        t = switch.triangle
        a, *others = switch.labeling
        width_a = weights[ids[t, a]]
        for x in others:
            count = weights[ids[t, x]]
            corner = (a + 1) % 3 if x == (a + 1) % 3 else a
            on_a = _nearest_slots(a, corner, count, width_a)
            on_x = _nearest_slots(x, corner, count, count)
            for i, j in zip(on_a, on_x, strict=True):
                inside[t, a, i] = (t, x, j)
                inside[t, x, j] = (t, a, i)
    unvisited = set(inside)
    components = []
    while unvisited:
        start = min(unvisited)
        slot, word = start, []
        while True:
            t, e, i = slot
            unvisited.discard(slot)
            word.append((t, e))
            u, j, _ = surface.glue(t, e)
            entry = (u, j, weights[ids[t, e]] - 1 - i)
            unvisited.discard(entry)
            slot = inside[entry]
            if slot == start:
                break
        components.append(validate_curve(surface, word))
    logger.debug("Measure of total weight %d carries %d components", sum(weights), len(components))
    return components


def random_carried_measure(
    track: TrainTrack,
    rng: np.random.Generator,
    cycles: int = 2,
    max_multiplicity: int = 2,
) -> CountingMeasure:
    """Integer measure summing random closed train paths with random multiplicities.

    A train path entering a switch through a may leave through b or c; entering through
    b or c it must leave through a. A random walk on these moves closes up at its first
    repeated state.
    """
    surface, ids = track.surface, track.edge_ids
    labels = {switch.triangle: switch.labeling for switch in track.switches}
    total = np.zeros(track.n_branches, dtype=int)
    for _ in range(cycles):
        t = int(rng.integers(surface.n_triangles))
        a, b, c = labels[t]
        state = (t, int(rng.choice([b, c])))
        seen: dict[tuple[int, int], int] = {}
        path: list[tuple[int, int]] = []
        while state not in seen:
            seen[state] = len(path)
            t, entry = state
            a, b, c = labels[t]
            leave = int(rng.choice([b, c])) if entry == a else a
            path.append((t, leave))
            u, j, _ = surface.glue(t, leave)
            state = (u, j)
        multiplicity = int(rng.integers(1, max_multiplicity + 1))
        for t, leave in path[seen[state] :]:
            total[ids[t, leave]] += multiplicity
    return CountingMeasure(weights=tuple(float(w) for w in total))


def measure_of_curves(
    track: TrainTrack, curves: Sequence[CurveClass]
) -> CountingMeasure:
    """Edge crossing counts of a collection of curve words."""
    counts = np.zeros(track.n_branches, dtype=int)
    for curve in curves:
        for t, e in curve.crossings:
            counts[track.edge_ids[t, e]] += 1
    return CountingMeasure(weights=tuple(float(w) for w in counts))
