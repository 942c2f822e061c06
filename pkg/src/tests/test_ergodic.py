from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from src.service.collar.service import CollarService
from src.service.ergodic.domain.itinerary import Itinerary, validate_itinerary
from src.service.ergodic.domain.membership import trace_from_intervals
from src.service.ergodic.service import ErgodicService
from src.service.exceptions import BadThresholdsError, PreconditionError
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.linear_action import apply_matrix, rotation_matrix
from src.service.surface.domain.surface_core import normalize_area
from src.tests.conftest import geodesic_of

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
L3_CORES = ("l3_horizontal", "l3_top", "l3_vertical", "l3_vertical_b")


def _always_inside(*, horizon: float = 10.0, dt: float = 0.01):
    return trace_from_intervals(horizon, dt, [], s=1.0)


@pytest.mark.parametrize(
    ("length", "thresholds", "multiplicities", "leftover"),
    [
        (10, [2, 3], (0, 3), Fraction(1)),
        (1.5, [2], (0,), Fraction(3, 2)),
        (6, [2], (3,), Fraction(0)),
    ],
)
def test_greedy_partition(length, thresholds, multiplicities, leftover):
    partition = ErgodicService.partition(length, thresholds)

    assert partition.multiplicities == multiplicities
    assert partition.leftover == leftover
    assert partition.violations() == []


def test_greedy_partition_holds_on_random_rational_inputs():
    rng = np.random.default_rng(7)
    for _ in range(500):
        levels = sorted({Fraction(int(x), 8) for x in rng.integers(1, 200, size=4)})
        partition = ErgodicService.partition(Fraction(int(rng.integers(1, 4000)), 8), levels)
        assert partition.violations() == []


def test_thresholds_must_increase():
    with pytest.raises(BadThresholdsError):
        ErgodicService.partition(10, [3, 2])
    with pytest.raises(BadThresholdsError):
        ErgodicService.partition(10, [])


def test_recurrence_fraction():
    trace = trace_from_intervals(10.0, 0.01, [(2.5, 5.0)])

    assert ErgodicService.recurrence(_always_inside()) == 0.0
    assert ErgodicService.recurrence(trace) == pytest.approx(0.25, abs=0.01 / 10.0 + 1e-12)


def test_sampler_steps_by_s_while_inside():
    itinerary, validation = ErgodicService.itinerary(_always_inside(), 10.0, 0.1, 1.0, 1.0)

    assert itinerary.times == pytest.approx([float(k) for k in range(1, 11)])
    assert itinerary.n == 8
    assert validation.valid


def test_sampler_jumps_to_the_next_visit_of_k():
    trace = trace_from_intervals(10.0, 0.01, [(2.0, 6.0)], outside_enlarged=[(2.0, 6.0)])

    itinerary, _ = ErgodicService.itinerary(trace, 10.0, 0.1, 10.0, 1.0)

    assert itinerary.times[:3] == pytest.approx([1.0, 2.0, 6.0], abs=0.02)
    assert itinerary.times[-1] == 10.0


def test_sampler_without_visits_fails_validation():
    never = trace_from_intervals(10.0, 0.01, [(-1.0, 11.0)])

    itinerary, validation = ErgodicService.itinerary(never, 10.0, 0.1, 1.0, 1.0)

    assert itinerary.times == (1.0, 10.0)
    assert 0 in validation.conditions


def test_small_epsilon_breaks_the_first_gap():
    itinerary, validation = ErgodicService.itinerary(_always_inside(), 10.0, 0.1, 0.5, 1.0)

    assert not validation.valid
    first = validation.violations[0]
    assert (first.condition, first.index) == (6, 0)
    assert itinerary.times[1] - itinerary.times[0] == pytest.approx(1.0)


def test_misplaced_start_violates_the_start_condition():
    itinerary = Itinerary(
        times=(1.5, *range(2, 11)), horizon=10.0, rho=0.1, s=1.0
    )

    assert 2 in validate_itinerary(itinerary, None, 1.0).conditions


def test_sampler_parameters_are_checked():
    with pytest.raises(PreconditionError):
        ErgodicService.itinerary(_always_inside(), 10.0, 1.5, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        ErgodicService.falsify([], 10.0, 0.5, 1.5, 1.0)


def test_short_excursions_never_break_the_sampler():
    horizon, rho, epsilon, s, dt = 100.0, 0.1, 0.5, 1.0, 0.01
    bound = rho * epsilon * horizon
    traces = ErgodicService.synthetic(200, horizon, dt, s, bound - 2.0 * dt, seed=11)

    report = ErgodicService.falsify(traces, horizon, rho, epsilon, s)

    assert report.traces == 200
    assert report.validated == report.traces
    assert report.holds
    assert report.max_outside <= bound


def test_long_excursion_is_the_only_way_to_fail():
    trace = trace_from_intervals(100.0, 0.01, [(11.0, 21.0)], s=1.0)

    report = ErgodicService.falsify([trace, _always_inside(horizon=100.0)], 100.0, 0.1, 0.5, 1.0)

    assert report.failures == 1
    assert report.confirmed == 1
    assert report.holds
    assert report.failed_conditions == (6,)


def test_summability_bound():
    itinerary, _ = ErgodicService.itinerary(_always_inside(), 10.0, 0.1, 1.0, 1.0)

    checks = ErgodicService.summability(itinerary, [0.5, 1.0, 2.0])

    assert all(check.holds for check in checks)
    assert [c.lam for c in checks] == [0.5, 1.0, 2.0]


def test_orbit_membership_follows_ell_min(l3):
    trace = ErgodicService.membership(l3, 3.0, dt=0.5, delta=0.1)
    again = ErgodicService.membership(l3, 3.0, dt=0.5, delta=0.1)

    assert trace.values == pytest.approx(np.exp(-np.arange(7) * 0.5))
    assert trace.inside.tolist() == [True] * 5 + [False] * 2
    assert np.array_equal(trace.values, again.values)
    assert ErgodicService.recurrence(trace) == pytest.approx(0.5 / 3.0)


def test_torus_estimate_is_exact(torus):
    alpha = GeodesicService.load_curve(torus, "torus_h")
    beta = GeodesicService.load_curve(torus, "torus_13")

    report = ErgodicService.estimate(torus, math.log(3.0), alpha, beta)

    assert report.predicted == pytest.approx(3.0)
    assert (report.actual_lo, report.actual_hi) == (3, 3)
    assert report.residual == pytest.approx(0.0, abs=1e-9)


def test_estimate_is_asymptotic_in_r(torus):
    alpha = GeodesicService.load_curve(torus, "torus_11")

    report = ErgodicService.estimate(torus, 1e-3, alpha, alpha)

    assert (report.actual_lo, report.actual_hi) == (0, 0)
    assert report.residual == pytest.approx(report.predicted)
    with pytest.raises(PreconditionError):
        ErgodicService.estimate(torus, 0.0, alpha, alpha)


def test_zero_scale_segment_has_no_error(torus):
    surface = apply_matrix(torus, rotation_matrix(math.atan(GOLDEN)))
    phi = CollarService.bump(CollarService.build(geodesic_of(surface, "torus_v")))

    reports = ErgodicService.equidistribution(surface, phi, [2.0], scale=0.0, seed=0)

    assert reports[0].error == 0.0


@pytest.mark.slow
def test_equidistribution_error_decreases_on_an_irrational_torus(torus):
    surface = apply_matrix(torus, rotation_matrix(math.atan(GOLDEN)))
    phi = CollarService.bump(CollarService.build(geodesic_of(surface, "torus_v")))

    reports = ErgodicService.equidistribution(surface, phi, [2.0, 4.0, 6.0], seed=0)
    errors = [r.normalized_error for r in reports]

    assert errors[0] > errors[1] > errors[2]


def test_l3_residual_shrinks_with_r(l3):
    alpha = GeodesicService.load_curve(l3, "l3_horizontal")
    beta = GeodesicService.load_curve(l3, "l3_vertical")

    reports = [ErgodicService.estimate(l3, r, alpha, beta) for r in (1.0, 2.0, 3.0)]
    residuals = [report.normalized_residual for report in reports]

    assert all((r.actual_lo, r.actual_hi) == (1, 1) for r in reports)
    assert [r.predicted for r in reports] == pytest.approx([4.0 / 3.0] * 3)
    assert residuals == pytest.approx([math.exp(-r) / 3.0 for r in (1.0, 2.0, 3.0)])
    assert residuals[0] > residuals[1] > residuals[2]


@pytest.mark.slow
def test_equidistribution_error_decreases_on_a_rotated_l3(l3):
    surface = apply_matrix(normalize_area(l3), rotation_matrix(math.atan(GOLDEN)))
    bumps = [CollarService.bump(CollarService.build(geodesic_of(surface, n))) for n in L3_CORES]
    averages = []

    for horizon in (2.0, 4.0):
        errors = [
            report.normalized_error
            for phi in bumps
            for report in ErgodicService.equidistribution(
                surface, phi, [horizon], n_starts=3, seed=1
            )
        ]
        averages.append(float(np.mean(errors)))

    assert averages[1] < averages[0]
