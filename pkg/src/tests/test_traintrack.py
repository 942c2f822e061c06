from __future__ import annotations

import math

import pytest

from src.service.exceptions import NonIntegerWeightsError, SwitchConditionError
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.delaunay import triangulation_of
from src.service.surface.domain.linear_action import apply_matrix, rotation_matrix
from src.service.surface.service import SurfaceService
from src.service.traintrack.domain.track import CountingMeasure, measure_of_curves
from src.service.traintrack.service import TrainTrackService
from src.tests.conftest import geodesic_of


def _measure(*weights: float) -> CountingMeasure:
    return CountingMeasure(weights=tuple(float(w) for w in weights))


def test_square_torus_track_has_ties_and_vertical_weights(torus):
    track, measure = TrainTrackService.dual_track(torus)

    assert measure.weights == (1.0, 0.0, 1.0)
    assert track.n_branches == 3
    assert track.n_ties == 2
    assert all(switch.labeling == switch.alternatives[0] for switch in track.switches)


def test_rotation_leaves_a_unique_labeling(l3):
    track, _ = TrainTrackService.dual_track(apply_matrix(l3, rotation_matrix(0.1)))

    assert track.n_ties == 0
    assert sum(track.cusps) == track.surface.n_triangles


@pytest.mark.parametrize(("name", "maximal"), [("q1111", True), ("l3", False), ("torus", False)])
def test_track_is_maximal_exactly_for_simple_zeros(name, maximal):
    surface = apply_matrix(SurfaceService.load(name), rotation_matrix(0.1))

    track, _ = TrainTrackService.dual_track(surface)

    assert track.maximal is maximal


def test_l3_region_has_six_cusps(l3):
    track, _ = TrainTrackService.dual_track(apply_matrix(l3, rotation_matrix(0.1)))

    assert track.cusps == [6]


def test_delaunay_track_balances(octagon):
    track, measure = TrainTrackService.dual_track(octagon, SurfaceService.delaunay(octagon))

    assert len(measure.weights) == track.n_branches
    assert all(w >= 0.0 for w in measure.weights)


def test_unit_weights_carry_the_vertical_curve(torus):
    track, _ = TrainTrackService.dual_track(torus)

    curves = TrainTrackService.carried(track, _measure(1, 0, 1))
    stats = GeodesicService.stats(GeodesicService.tighten(torus, curves[0]))

    assert len(curves) == 1
    assert measure_of_curves(track, curves) == _measure(1, 0, 1)
    assert stats.im_measure == pytest.approx(1.0)
    assert stats.re_measure == pytest.approx(0.0, abs=1e-9)


def test_doubled_weights_carry_two_parallel_copies(torus):
    track, _ = TrainTrackService.dual_track(torus)

    curves = TrainTrackService.carried(track, _measure(2, 0, 2))

    assert len(curves) == 2
    assert measure_of_curves(track, curves) == _measure(2, 0, 2)


def test_weights_must_be_integral_and_balanced(torus):
    track, _ = TrainTrackService.dual_track(torus)

    with pytest.raises(NonIntegerWeightsError):
        TrainTrackService.carried(track, _measure(0.5, 0, 0.5))
    with pytest.raises(SwitchConditionError):
        TrainTrackService.carried(track, _measure(1, 1, 1))


def test_intersection_is_additive_on_the_torus_track(torus):
    track, _ = TrainTrackService.dual_track(torus)
    alpha = geodesic_of(torus, "torus_h")

    report = TrainTrackService.convexity(
        alpha, track, [(_measure(1, 0, 1), _measure(2, 0, 2))]
    )
    case = report.cases[0]

    assert (case.at_v.lower, case.at_w.lower, case.at_sum.lower) == (1, 2, 3)
    assert case.equality
    assert not case.violated
    assert report.max_lipschitz_ratio == pytest.approx(1.0 / math.sqrt(2.0))


def test_random_carried_measures_never_violate_convexity(torus):
    track, _ = TrainTrackService.dual_track(torus)

    report = TrainTrackService.convexity(geodesic_of(torus, "torus_23"), track, count=3, seed=0)

    assert len(report.cases) == 3
    assert report.violations == 0


@pytest.mark.slow
def test_h_beta_is_lipschitz_along_period_perturbations(torus):
    beta = GeodesicService.load_curve(torus, "torus_23")

    lipschitz = TrainTrackService.hbeta_probe(triangulation_of(torus), beta, samples=10, seed=0)

    assert lipschitz.base_value == pytest.approx(2.0 / math.sqrt(13.0))
    assert lipschitz.is_stable(0.25)


@pytest.mark.slow
def test_random_carried_measures_on_l3_never_violate_convexity(l3):
    track, _ = TrainTrackService.dual_track(l3)

    report = TrainTrackService.convexity(geodesic_of(l3, "l3_vertical"), track, count=10, seed=0)

    assert len(report.cases) == 10
    assert report.violations == 0
    assert all(case.at_sum.lower <= case.at_v.upper + case.at_w.upper for case in report.cases)


@pytest.mark.slow
def test_many_random_carried_measures_on_the_torus(torus):
    track, _ = TrainTrackService.dual_track(torus)

    report = TrainTrackService.convexity(geodesic_of(torus, "torus_13"), track, count=100, seed=4)

    assert len(report.cases) == 100
    assert report.violations == 0
