"""Convexity and Lipschitz probes of intersection functionals on train track measures."""

import logging

import numpy as np
from pydantic import BaseModel

from src.core.config import settings
from src.service.exceptions import TrainTrackServiceError
from src.service.geodesic.domain.curves import CurveClass
from src.service.geodesic.domain.intersection import intersection_bounds
from src.service.geodesic.domain.stats import geodesic_stats
from src.service.geodesic.domain.tighten import FlatGeodesic, tighten
from src.service.surface.domain.delaunay import Triangulation
from src.service.surface.domain.periods import LipschitzProbe, perturbation_probe
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.traintrack.domain.track import (
    CountingMeasure,
    TrainTrack,
    carried_multicurve,
    random_carried_measure,
)

logger = logging.getLogger(__name__)


class Interval(BaseModel):
    lower: int
    upper: int

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(lower=self.lower + other.lower, upper=self.upper + other.upper)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> int:
        return self.upper - self.lower


class ConvexityCase(BaseModel):
    """i(alpha, mu_{v+w}) against i(alpha, mu_v) + i(alpha, mu_w), as intervals.

    By homogeneity the right side is half of i(alpha, mu_{2v}) + i(alpha, mu_{2w}).
    `violated` is set only when the left interval lies entirely above the right one.
    """

    v: tuple[int, ...]
    w: tuple[int, ...]
    at_v: Interval
    at_w: Interval
    at_sum: Interval
    violated: bool
    equality: bool
    lipschitz_ratio: float | None


class ConvexityReport(BaseModel):
    cases: list[ConvexityCase]
    max_lipschitz_ratio: float

    @property
    def violations(self) -> int:
        return sum(case.violated for case in self.cases)


def multicurve_intersection(alpha: FlatGeodesic, curves: list[CurveClass]) -> Interval:
    """Sum of the certified intervals of alpha with every component."""
    total = Interval(lower=0, upper=0)
    for curve in curves:
        bounds = intersection_bounds(alpha, tighten(alpha.surface, curve))
        total = total + Interval(lower=bounds.lower, upper=bounds.upper)
    return total


def _as_ints(measure: CountingMeasure) -> tuple[int, ...]:
    return tuple(int(w) for w in measure.weights)


def convexity_lipschitz_probe(
    alpha: FlatGeodesic,
    track: TrainTrack,
    pairs: list[tuple[CountingMeasure, CountingMeasure]],
) -> ConvexityReport:
    """Test subadditivity of v -> i(alpha, mu_v) and fit its Lipschitz ratio.

    Raises:
        NonIntegerWeightsError: If a measure is not integral.
        SwitchConditionError: If a measure does not satisfy the switch conditions.
        TrainTrackServiceError: If alpha lives on another surface than the track.
    """
    if alpha.surface is not track.surface:
        error_msg = "alpha must be tightened on the surface carrying the track"
        raise TrainTrackServiceError(error_msg)
    cases = []
    cache: dict[tuple[int, ...], Interval] = {}

    def value(measure: CountingMeasure) -> Interval:
        key = _as_ints(measure)
        if key not in cache:
            cache[key] = multicurve_intersection(alpha, carried_multicurve(track, measure))
        return cache[key]

    for v, w in pairs:
        at_v, at_w, at_sum = value(v), value(w), value(v + w)
        bound = at_v + at_w
        distance = float(np.linalg.norm(np.subtract(v.weights, w.weights)))
        ratio = abs(at_v.mid - at_w.mid) / distance if distance > 0.0 else None
        case = ConvexityCase(
            v=_as_ints(v),
            w=_as_ints(w),
            at_v=at_v,
            at_w=at_w,
            at_sum=at_sum,
            violated=at_sum.lower > bound.upper,
            equality=at_sum == bound and at_sum.width == 0,
            lipschitz_ratio=ratio,
        )
        if case.violated:
            logger.warning("Conclusive convexity violation at v=%s w=%s", case.v, case.w)
        cases.append(case)
    ratios = [c.lipschitz_ratio for c in cases if c.lipschitz_ratio is not None]
    return ConvexityReport(cases=cases, max_lipschitz_ratio=max(ratios, default=0.0))


def random_measure_pairs(
    track: TrainTrack, count: int, seed: int | None = None
) -> list[tuple[CountingMeasure, CountingMeasure]]:
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
    return [
        (random_carried_measure(track, rng), random_carried_measure(track, rng))
        for _ in range(count)
    ]


def hbeta_lipschitz_probe(
    triangulation: Triangulation,
    beta: CurveClass,
    *,
    scales: tuple[float, ...] = (1e-4, 1e-5),
    samples: int = 20,
    seed: int | None = None,
) -> LipschitzProbe:
    """Fitted Lipschitz constants of h_beta along random period perturbations.

    The curve word is carried over unchanged, since rebuilding from periods keeps the
    triangulation.
    """

    def h_beta(surface: HalfTranslationSurface) -> float:
        return geodesic_stats(tighten(surface, beta)).h_beta

    return perturbation_probe(triangulation, h_beta, scales=scales, samples=samples, seed=seed)
