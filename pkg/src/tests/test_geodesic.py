from __future__ import annotations

import math

import numpy as np
import pytest

from src.service.ergodic.domain.equidistribution import random_points
from src.service.exceptions import BudgetExceededError, MalformedCurveError, NullHomotopicError
from src.service.geodesic.domain import tighten as tighten_module
from src.service.geodesic.domain.curves import CurveClass
from src.service.geodesic.domain.tighten import GeodesicKind, Sleeve, period_length, pull_taut
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.linear_action import flow, negate_differential
from src.service.surface.domain.tracing import SurfacePoint, trace_ray
from src.service.surface.service import SurfaceService
from src.tests.conftest import geodesic_of, two_vertical_cylinders

L3_CURVES = ("l3_horizontal", "l3_top", "l3_vertical", "l3_vertical_b")


def _l3_diagonal_class(l3):
    """Horizontal core of the two-square cylinder followed by the vertical one."""
    start = SurfacePoint(triangle=0, x=0.6, y=0.3)
    curve = GeodesicService.curve_of_path(l3, start, [[2.0, 0.0], [0.0, 2.0]])
    return GeodesicService.tighten(l3, curve)


def test_torus_23_curve_is_a_cylinder_with_exact_measures(torus):
    geodesic = geodesic_of(torus, "torus_23")
    stats = GeodesicService.stats(geodesic)

    assert geodesic.kind is GeodesicKind.CYLINDER
    assert geodesic.n_connections == 0
    assert stats.length == pytest.approx(math.sqrt(13.0))
    assert stats.re_measure == pytest.approx(2.0)
    assert stats.im_measure == pytest.approx(3.0)
    assert stats.v_beta == pytest.approx(3.0 / math.sqrt(13.0))
    assert stats.h_beta == pytest.approx(2.0 / math.sqrt(13.0))


def test_l3_vertical_core(l3):
    stats = GeodesicService.stats(geodesic_of(l3, "l3_vertical"))

    assert stats.im_measure == pytest.approx(2.0)
    assert stats.re_measure == pytest.approx(0.0, abs=1e-9)
    assert stats.h_beta == pytest.approx(0.0, abs=1e-9)


def test_measures_are_bounded_by_length(l3, q22):
    for surface, name in ((l3, "l3_horizontal"), (l3, "l3_top"), (q22, "q22_horizontal")):
        stats = GeodesicService.stats(geodesic_of(surface, name))
        assert stats.re_measure <= stats.length + 1e-9
        assert stats.im_measure <= stats.length + 1e-9
        assert 0.0 <= stats.v_beta <= 1.0
        assert 0.0 <= stats.h_beta <= 1.0


def test_mixed_class_on_l3_tightens_to_a_chain_through_the_cone_point(l3):
    geodesic = _l3_diagonal_class(l3)
    stats = GeodesicService.stats(geodesic)

    assert geodesic.kind is GeodesicKind.SINGULAR
    assert geodesic.n_connections >= 2
    assert 2.0 * math.sqrt(2.0) - 1e-7 <= geodesic.length <= 4.0 + 1e-9
    assert stats.re_measure >= 2.0 - 1e-9
    assert stats.im_measure >= 2.0 - 1e-9
    for first, second in geodesic.junctions:
        assert first >= math.pi - 1e-6
        assert second >= math.pi - 1e-6


def test_backtracking_word_is_null_homotopic(torus):
    with pytest.raises(NullHomotopicError):
        GeodesicService.curve(torus, [[0, 1], [1, 2]])


def test_word_must_walk_through_adjacent_triangles(torus):
    with pytest.raises(MalformedCurveError):
        GeodesicService.curve(torus, [[0, 1], [0, 0]])
    with pytest.raises(MalformedCurveError):
        GeodesicService.curve(torus, [[0, 5]])


def test_torus_intersection_numbers_are_determinants(torus):
    horizontal = geodesic_of(torus, "torus_h")
    vertical = geodesic_of(torus, "torus_v")
    slope = geodesic_of(torus, "torus_23")

    bounds = GeodesicService.bounds(horizontal, slope)

    assert (bounds.lower, bounds.upper) == (3, 3)
    assert GeodesicService.bounds(horizontal, vertical).transverse == 1
    assert GeodesicService.bounds(vertical, slope).transverse == 2


def test_a_cylinder_curve_does_not_cross_itself(torus):
    horizontal = geodesic_of(torus, "torus_h")

    bounds = GeodesicService.bounds(horizontal, horizontal)

    assert bounds.transverse == 0
    assert bounds.upper == 0


def test_l3_horizontal_and_vertical_cores_meet_once(l3):
    horizontal = geodesic_of(l3, "l3_horizontal")

    bounds = GeodesicService.bounds(horizontal, geodesic_of(l3, "l3_vertical"))

    assert (bounds.lower, bounds.upper) == (1, 1)


def test_singular_against_cylinder_is_exact(l3):
    chain = _l3_diagonal_class(l3)
    core = geodesic_of(l3, "l3_top")

    bounds = GeodesicService.bounds(chain, core)

    assert bounds.n == chain.n_connections
    assert bounds.m == 0
    assert bounds.lower == bounds.upper


def test_singular_bounds_widen_by_the_connection_counts(l3):
    chain = _l3_diagonal_class(l3)

    bounds = GeodesicService.bounds(chain, chain)

    assert bounds.upper - bounds.lower == chain.n_connections**2


def test_negated_differential_swaps_the_measures(torus):
    stats = GeodesicService.stats(geodesic_of(torus, "torus_23"))
    rotated = GeodesicService.stats(geodesic_of(negate_differential(torus), "torus_23"))

    assert rotated.re_measure == pytest.approx(stats.im_measure)
    assert rotated.im_measure == pytest.approx(stats.re_measure)


def test_flow_keeps_the_intersection_number(torus):
    flowed = flow(torus, 0.3)

    bounds = GeodesicService.bounds(geodesic_of(flowed, "torus_h"), geodesic_of(flowed, "torus_13"))

    assert bounds.transverse == 3


def test_segment_crossings_are_bounded_by_length_over_systole(torus):
    slope = geodesic_of(torus, "torus_23")
    segment = trace_ray(torus, SurfacePoint(triangle=0, x=0.6, y=0.3), (1.0, 0.0), 1.0)

    crossings = GeodesicService.transversal_crossings(slope, segment)

    assert crossings == 3
    assert crossings <= 1 + 2.0 * slope.length / 1.0


def _torus_class(torus, p: int, q: int):
    start = SurfacePoint(triangle=1, x=0.31, y=0.57)
    return GeodesicService.tighten(torus, GeodesicService.curve_of_path(torus, start, [[p, q]]))


def _torus_diagonal_around_the_marked_point(torus):
    """Unit square around the lattice point (1, 1), then the diagonal (1, 1)."""
    start = SurfacePoint(triangle=1, x=0.3, y=0.6)
    path = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]
    return GeodesicService.curve_of_path(torus, start, path)


def _octagon_words(octagon):
    """Cores of the middle horizontal and vertical cylinders, and their concatenation."""
    start = SurfacePoint(triangle=4, x=0.5 + math.sqrt(0.5), y=1.0 - math.sqrt(0.5))
    width = 1.0 + math.sqrt(2.0)
    paths = [[[width, 0.0]], [[0.0, width]], [[width, 0.0], [0.0, width]]]
    return [GeodesicService.curve_of_path(octagon, start, path) for path in paths]


def test_singular_chains_have_no_degenerate_connections(l3, q22, q1111):
    chains = [_l3_diagonal_class(l3), two_vertical_cylinders(q22), two_vertical_cylinders(q1111)]

    for chain in chains:
        stats = GeodesicService.stats(chain)
        assert chain.kind is GeodesicKind.SINGULAR
        assert all(c.length > 1e-6 for c in chain.connections)
        assert len(chain.junctions) == chain.n_connections
        assert math.isfinite(stats.v_beta)
        assert math.isfinite(stats.h_beta)
        for first, second in chain.junctions:
            assert first >= math.pi - 1e-6
            assert second >= math.pi - 1e-6
    assert chains[0].n_connections == 2
    assert chains[0].length == pytest.approx(2.0 * math.sqrt(2.0))
    assert [c.length for c in chains[2].connections] == pytest.approx([2.0, 2.0])


def test_tightening_reroutes_across_the_marked_point(torus):
    geodesic = GeodesicService.tighten(torus, _torus_diagonal_around_the_marked_point(torus))

    assert geodesic.kind is GeodesicKind.CYLINDER
    assert geodesic.rounds >= 1
    assert geodesic.length == pytest.approx(math.sqrt(2.0))
    assert GeodesicService.bounds(geodesic, geodesic_of(torus, "torus_h")).lower == 1


def test_tightening_stops_when_rerouting_no_longer_shortens(torus, monkeypatch):
    curve = _torus_diagonal_around_the_marked_point(torus)
    monkeypatch.setattr(
        tighten_module,
        "reroute",
        lambda surface, sleeve, angles: CurveClass(crossings=tuple(sleeve.word)),
    )

    with pytest.raises(BudgetExceededError, match="stalled"):
        tighten_module.tighten(torus, curve)


def test_period_length_of_a_straight_sleeve(torus):
    word = GeodesicService.load_curve(torus, "torus_23")
    sleeve = Sleeve(torus, word, 5)
    start, end = sleeve.centroid(0), sleeve.centroid(sleeve.size)

    length = period_length(sleeve, start, pull_taut(sleeve, start, end), end)

    assert length == pytest.approx(math.sqrt(13.0))


def test_tightening_a_tightened_word_changes_nothing(torus, l3):
    cases = (geodesic_of(torus, "torus_23"), geodesic_of(l3, "l3_top"), _l3_diagonal_class(l3))
    for geodesic in cases:
        again = GeodesicService.tighten(geodesic.surface, geodesic.word)

        assert again.kind is geodesic.kind
        assert again.length == pytest.approx(geodesic.length)
        assert again.n_connections == geodesic.n_connections


def test_torus_counts_are_determinants_on_random_classes(torus):
    rng = np.random.default_rng(3)
    classes = {}
    pairs = 0
    while pairs < 50:
        a, b, c, d = (int(v) for v in rng.integers(-4, 5, size=4))
        if math.gcd(a, b) != 1 or math.gcd(c, d) != 1:
            continue
        for p, q in ((a, b), (c, d)):
            if (p, q) not in classes:
                classes[p, q] = _torus_class(torus, p, q)
        alpha, beta = classes[a, b], classes[c, d]

        bounds = GeodesicService.bounds(alpha, beta)

        assert (bounds.lower, bounds.upper) == (abs(a * d - b * c), abs(a * d - b * c))
        assert alpha.length == pytest.approx(math.hypot(a, b))
        pairs += 1


@pytest.mark.slow
def test_intervals_agree_along_the_flow(l3, octagon):
    l3_words = [GeodesicService.load_curve(l3, name) for name in L3_CURVES]
    cases = [(l3, [*l3_words, _l3_diagonal_class(l3).word]), (octagon, _octagon_words(octagon))]
    checked = 0

    for surface, words in cases:
        before = [GeodesicService.tighten(surface, word) for word in words]
        for t in (0.5, 1.0):
            flowed = flow(surface, t)
            after = [GeodesicService.tighten(flowed, word) for word in words]
            for i in range(len(words)):
                for j in range(i, len(words)):
                    at_q = GeodesicService.bounds(before[i], before[j])
                    at_flowed = GeodesicService.bounds(after[i], after[j])
                    assert max(at_q.lower, at_flowed.lower) <= min(at_q.upper, at_flowed.upper)
                    checked += 1

    assert checked >= 30


@pytest.mark.slow
def test_short_transversals_cross_a_geodesic_boundedly(torus, l3):
    cases = [
        (torus, [geodesic_of(torus, n) for n in ("torus_h", "torus_11", "torus_23", "torus_13")]),
        (l3, [*(geodesic_of(l3, n) for n in L3_CURVES), _l3_diagonal_class(l3)]),
    ]
    rng = np.random.default_rng(5)
    checked = 0

    for surface, geodesics in cases:
        systole = SurfaceService.describe(surface)[2].systole
        for start in random_points(surface, 125, seed=5):
            angle = rng.uniform(0.0, 2.0 * math.pi)
            segment = trace_ray(surface, start, (math.cos(angle), math.sin(angle)), systole / 2.0)
            for geodesic in geodesics:
                crossings = GeodesicService.transversal_crossings(geodesic, segment)
                assert crossings <= 1 + 2.0 * geodesic.length / systole
                checked += 1

    assert checked >= 1000
