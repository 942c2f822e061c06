"""Sampling and validation of flow itineraries.

An itinerary is a time sequence s_0 < s_1 < ... < s_{N+1} that starts at rho T, ends at
T, keeps the orbit in K' at s_1..s_N, spaces consecutive samples by at least s and never
jumps by more than epsilon times the current time. The numbering of the conditions is

    1. a_{s_n} q in K' for 1 <= n <= N
    2. s_0 = rho T
    3. s_N < T
    4. s_{N+1} = T
    5. s_{n+1} >= s_n + s for 1 <= n <= N - 1
    6. s_{n+1} - s_n <= epsilon s_n for 0 <= n <= N

and condition 0 stands for N > 0.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.service.ergodic.domain.membership import MembershipTrace, recurrence_fraction
from src.service.exceptions import PreconditionError

logger = logging.getLogger(__name__)


class Itinerary(BaseModel):
    """Candidate time sequence s_0..s_{N+1} with the parameters it was sampled for."""

    model_config = ConfigDict(frozen=True)

    times: tuple[float, ...]
    horizon: float
    rho: float
    s: float

    @property
    def n(self) -> int:
        """N, the index of the last sample strictly before the horizon."""
        return len(self.times) - 2


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    condition: int
    index: int | None = None
    detail: str


class ItineraryValidation(BaseModel):
    """Every violated condition, reported individually."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def conditions(self) -> set[int]:
        return {v.condition for v in self.violations}


def sample_itinerary(trace: MembershipTrace, horizon: float, rho: float, s: float) -> Itinerary:
    """Greedy sampler on the trace grid.

    From s_0 = rho T the sampler steps by s while the orbit stays in K' over the whole
    window, and otherwise jumps to the first visit of K at or after the end of the window.
    It stops at the first time that reaches T, which is replaced by T itself. Infima are
    taken on the trace grid.
    """
    if not 0.0 < rho < 1.0 or s <= 0.0 or horizon <= 0.0:
        error_msg = f"Sampler needs 0 < rho < 1, s > 0 and T > 0, got {rho}, {s}, {horizon}"
        raise PreconditionError(error_msg)
    if rho * horizon < s:
        logger.warning("rho T = %.6g is below s = %.6g", rho * horizon, s)
    dt = trace.dt
    last = min(round(horizon / dt), len(trace.inside) - 1)
    stride = max(1, round(s / dt))
    index = round(rho * horizon / dt)
    times = [rho * horizon]
    while True:
        reach = index + stride
        if reach >= last:
            break
        if trace.enlarged[index : reach + 1].all():
            index = reach
        else:
            entries = np.flatnonzero(trace.inside[reach : last + 1])
            if not len(entries):
                break
            index = reach + int(entries[0])
            if index >= last:
                break
        times.append(index * dt)
    times.append(horizon)
    logger.debug("Sampled itinerary with N = %d over T = %.6g", len(times) - 2, horizon)
    return Itinerary(times=tuple(times), horizon=horizon, rho=rho, s=s)


def validate_itinerary(
    itinerary: Itinerary, trace: MembershipTrace | None, epsilon: float
) -> ItineraryValidation:
    """Check conditions 0 to 6 separately, with one trace step of slack.

    Without a trace, condition 1 is not checked.
    """
    times = itinerary.times
    horizon, s = itinerary.horizon, itinerary.s
    slack = trace.dt if trace is not None else 1e-9
    n = len(times) - 2
    found = []
    if n <= 0:
        found.append(Violation(condition=0, detail="no sample strictly between rho T and T"))
    if trace is not None:
        for i in range(1, n + 1):
            if not trace.in_enlarged(times[i]):
                found.append(
                    Violation(condition=1, index=i, detail=f"a_t q is outside K' at {times[i]}")
                )
    if abs(times[0] - itinerary.rho * horizon) > slack:
        found.append(
            Violation(
                condition=2, index=0, detail=f"s_0 = {times[0]} differs from rho T"
            )
        )
    if n >= 0 and not times[n] < horizon:
        found.append(Violation(condition=3, index=n, detail=f"s_N = {times[n]} reaches T"))
    if abs(times[-1] - horizon) > slack:
        found.append(
            Violation(condition=4, index=n + 1, detail=f"s_(N+1) = {times[-1]} is not T")
        )
    for i in range(1, n):
        if times[i + 1] < times[i] + s - slack:
            found.append(
                Violation(condition=5, index=i, detail=f"gap {times[i + 1] - times[i]:.6g} < s")
            )
    for i in range(0, n + 1):
        gap = times[i + 1] - times[i]
        if gap > epsilon * times[i] + slack:
            found.append(
                Violation(
                    condition=6,
                    index=i,
                    detail=f"gap {gap:.6g} exceeds epsilon s_n = {epsilon * times[i]:.6g}",
                )
            )
    return ItineraryValidation(epsilon=epsilon, violations=tuple(found))


class FalsificationReport(BaseModel):
    """Sampler outcomes over a corpus of traces.

    `holds` is true when every failed itinerary comes from a trace whose time outside K
    exceeds rho epsilon T, to two trace steps.
    """

    traces: int
    validated: int
    failures: int
    confirmed: int
    bound: float
    max_outside: float
    min_failure_outside: float | None
    failed_conditions: tuple[int, ...]

    @property
    def holds(self) -> bool:
        return self.confirmed == self.failures

    @property
    def validated_fraction(self) -> float:
        return self.validated / self.traces if self.traces else 1.0


def falsify_sampler_failure(
    traces: list[MembershipTrace], horizon: float, rho: float, epsilon: float, s: float
) -> FalsificationReport:
    """Run the sampler on every trace and look for failures without a large excursion.

    Raises:
        PreconditionError: Unless rho (1 + epsilon) < 1 and T >= s / (rho epsilon).
    """
    if not rho * (1.0 + epsilon) < 1.0 or horizon < s / (rho * epsilon):
        error_msg = (
            f"Need rho (1 + epsilon) < 1 and T >= s / (rho epsilon), "
            f"got rho={rho}, epsilon={epsilon}, T={horizon}, s={s}"
        )
        raise PreconditionError(error_msg)
    bound = rho * epsilon * horizon
    validated = confirmed = 0
    outside_values, failure_outside, conditions = [], [], set()
    for trace in traces:
        outside = recurrence_fraction(trace, horizon) * horizon
        outside_values.append(outside)
        report = validate_itinerary(sample_itinerary(trace, horizon, rho, s), trace, epsilon)
        if report.valid:
            validated += 1
            continue
        failure_outside.append(outside)
        conditions |= report.conditions
        if outside > bound - 2.0 * trace.dt:
            confirmed += 1
        else:
            logger.warning("Itinerary failed with only %.6g outside K", outside)
    failures = len(traces) - validated
    return FalsificationReport(
        traces=len(traces),
        validated=validated,
        failures=failures,
        confirmed=confirmed,
        bound=bound,
        max_outside=max(outside_values, default=0.0),
        min_failure_outside=min(failure_outside, default=None),
        failed_conditions=tuple(sorted(conditions)),
    )


class SummabilityCheck(BaseModel):
    lam: float
    ratio: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.ratio <= self.bound


def summability_check(itinerary: Itinerary, lam: float) -> SummabilityCheck:
    """Sum of exp(lam s_j) over 1 <= j <= N against exp(lam s_N).

    The bound is ceil(1 / s) e^(2 lam) / (e^lam - 1), which holds whenever consecutive
    samples are at least s apart.
    """
    if lam <= 0.0:
        error_msg = f"lambda must be positive, got {lam}"
        raise PreconditionError(error_msg)
    samples = np.asarray(itinerary.times[1:-1])
    bound = math.ceil(1.0 / itinerary.s) * math.exp(2.0 * lam) / math.expm1(lam)
    if not len(samples):
        return SummabilityCheck(lam=lam, ratio=0.0, bound=bound)
    ratio = float(np.exp(lam * (samples - samples[-1])).sum())
    return SummabilityCheck(lam=lam, ratio=ratio, bound=bound)
