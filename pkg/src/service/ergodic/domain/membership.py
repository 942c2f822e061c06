"""Sampled membership of a flow orbit in a set K and in its flow enlargement K'.

A trace records, at times 0, dt, 2 dt, ..., T, whether the orbit lies in K and whether
it lies in K' = union of a_u K over |u| <= s. Traces come from real orbits through
`orbit_membership`, where K = {ell_min >= delta}, or from the synthetic generators used
to exercise the itinerary sampler without any surface computation.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.ndimage import binary_dilation

from src.core.config import settings
from src.service.exceptions import PreconditionError
from src.service.surface.domain.linear_action import flow
from src.service.surface.domain.saddle import ell_min
from src.service.surface.domain.surface_core import HalfTranslationSurface

logger = logging.getLogger(__name__)


class MembershipTrace(BaseModel):
    """Boolean samples of K and K' membership on the grid j * dt, j = 0..n."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dt: float
    inside: np.ndarray
    enlarged: np.ndarray
    values: np.ndarray | None = None

    def model_post_init(self, __context: object) -> None:
        if self.dt <= 0.0:
            error_msg = f"Sampling step must be positive, got {self.dt}"
            raise PreconditionError(error_msg)
        if self.inside.shape != self.enlarged.shape or self.inside.ndim != 1:
            error_msg = "K and K' samples must be one-dimensional and of equal length"
            raise PreconditionError(error_msg)
        if np.any(self.inside & ~self.enlarged):
            error_msg = "K is not contained in K' on the sample grid"
            raise PreconditionError(error_msg)

    @property
    def horizon(self) -> float:
        return self.dt * (len(self.inside) - 1)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.inside)) * self.dt

    def _index(self, t: float) -> int:
        return int(np.clip(round(t / self.dt), 0, len(self.inside) - 1))

    def in_enlarged(self, t: float) -> bool:
        return bool(self.enlarged[self._index(t)])

    def outside_measure(self, horizon: float | None = None) -> float:
        """Riemann sum of the time spent outside K on [0, horizon)."""
        horizon = self.horizon if horizon is None else horizon
        count = min(len(self.inside) - 1, round(horizon / self.dt))
        return float(np.count_nonzero(~self.inside[:count]) * self.dt)


def enlarge(inside: np.ndarray, dt: float, s: float) -> np.ndarray:
    """Samples within s of a sample in K, times outside the grid counted outside K."""
    radius = round(s / dt)
    if radius <= 0:
        return inside.copy()
    return binary_dilation(inside, structure=np.ones(2 * radius + 1, dtype=bool))


def recurrence_fraction(trace: MembershipTrace, horizon: float | None = None) -> float:
    """Fraction of [0, T] spent outside K, to the resolution of the trace."""
    horizon = trace.horizon if horizon is None else horizon
    if horizon <= 0.0:
        return 0.0
    return trace.outside_measure(horizon) / horizon


def _grid(horizon: float, dt: float) -> np.ndarray:
    return np.arange(round(horizon / dt) + 1) * dt


def _outside(times: np.ndarray, intervals: list[tuple[float, float]]) -> np.ndarray:
    outside = np.zeros(len(times), dtype=bool)
    for a, b in intervals:
        outside |= (times > a) & (times < b)
    return outside


def trace_from_intervals(
    horizon: float,
    dt: float,
    outside_k: list[tuple[float, float]],
    *,
    s: float | None = None,
    outside_enlarged: list[tuple[float, float]] | None = None,
) -> MembershipTrace:
    """Trace leaving K on the open intervals `outside_k`.

    K' is given by `outside_enlarged` when set, otherwise it is the s-enlargement of K,
    or K itself when s is None.
    """
    times = _grid(horizon, dt)
    inside = ~_outside(times, outside_k)
    if outside_enlarged is not None:
        enlarged = ~_outside(times, outside_enlarged) | inside
    elif s is not None:
        enlarged = enlarge(inside, dt, s)
    else:
        enlarged = inside.copy()
    return MembershipTrace(dt=dt, inside=inside, enlarged=enlarged)


def synthetic_traces(
    count: int,
    horizon: float,
    dt: float,
    s: float,
    max_outside: float,
    seed: int | None = None,
    max_excursions: int = 5,
) -> list[MembershipTrace]:
    """Random traces whose excursions outside K measure at most `max_outside` in total."""
    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
    traces = []
    for _ in range(count):
        n = int(rng.integers(0, max_excursions + 1))
        budget = max_outside * float(rng.uniform(0.0, 1.0))
        lengths = rng.dirichlet(np.ones(n)) * budget if n else np.zeros(0)
        starts = rng.uniform(0.0, horizon, size=n)
        intervals = [(float(a), float(a + w)) for a, w in zip(starts, lengths, strict=True)]
        traces.append(trace_from_intervals(horizon, dt, intervals, s=s))
    return traces


def orbit_membership(
    surface: HalfTranslationSurface,
    horizon: float,
    dt: float | None = None,
    delta: float = 0.1,
    s: float = 0.0,
) -> MembershipTrace:
    """Membership of a_t surface in K_delta = {ell_min >= delta} for t in [0, horizon].

    The orbit is sampled on [-s, horizon + s] so that the enlargement K' is exact at both
    ends of the window.
    """
    dt = settings.ORBIT_TIME_STEP if dt is None else dt
    radius = round(s / dt)
    times = (np.arange(-radius, round(horizon / dt) + radius + 1)) * dt
    lengths = np.array([ell_min(flow(surface, float(t))) for t in times])
    inside = lengths >= delta
    enlarged = enlarge(inside, dt, s)
    window = slice(radius, len(times) - radius)
    logger.debug(
        "Orbit of %s over [0, %.6g]: %d samples, %d outside K",
        surface.name,
        horizon,
        len(times),
        int(np.count_nonzero(~inside[window])),
    )
    return MembershipTrace(
        dt=dt, inside=inside[window], enlarged=enlarged[window], values=lengths[window]
    )
