from __future__ import annotations

import math

import numpy as np
import pytest

from src.service.exceptions import (
    BudgetExceededError,
    NotApplicableError,
    RankDeficientError,
    SurfaceServiceError,
    TracingError,
)
from src.service.surface.domain.complexes import (
    Completion,
    are_disjoint,
    complete_to_triangulation,
    extend_complex,
    make_complex,
)
from src.service.surface.domain.delaunay import (
    delaunay_defects,
    delaunay_triangulation,
    triangulation_of,
)
from src.service.surface.domain.linear_action import flow
from src.service.surface.domain.periods import period_vector
from src.service.surface.domain.saddle import (
    ell_min,
    enumerate_saddle_connections,
    make_connection,
    shortest_lengths,
)
from src.service.surface.domain.surface_core import canonical_form, orientation_double_cover
from src.service.surface.service import SurfaceService

ROOT2 = math.sqrt(2.0)


def _abs_holonomies(connections) -> list[tuple[float, float]]:
    return sorted((round(abs(c.holonomy[0]), 9), round(abs(c.holonomy[1]), 9)) for c in connections)


def test_torus_unit_connections(torus):
    connections = enumerate_saddle_connections(torus, 1.1)

    assert _abs_holonomies(connections) == [(0.0, 1.0), (1.0, 0.0)]


def test_l3_unit_connections_come_in_three_horizontal_and_three_vertical(l3):
    connections = enumerate_saddle_connections(l3, 1.1)

    assert len(connections) == 6
    assert all(c.length == pytest.approx(1.0) for c in connections)
    assert _abs_holonomies(connections) == [(0.0, 1.0)] * 3 + [(1.0, 0.0)] * 3


def test_l3_diagonals_appear_at_length_root_two(l3):
    connections = enumerate_saddle_connections(l3, 1.5)
    diagonals = [c for c in connections if c.length > 1.1]

    assert len(connections) == 12
    assert len(diagonals) == 6
    assert all(c.length == pytest.approx(ROOT2) for c in diagonals)
    assert [c.length for c in connections] == sorted(c.length for c in connections)


def test_enumeration_respects_the_node_budget(l3):
    with pytest.raises(BudgetExceededError):
        enumerate_saddle_connections(l3, 5.0, budget=1)


def test_non_positive_length_bound_is_rejected(l3):
    with pytest.raises(SurfaceServiceError):
        SurfaceService.saddle_connections(l3, 0.0)


def test_shortest_lengths(torus, l3, octagon):
    torus_lengths = shortest_lengths(torus)
    l3_lengths = shortest_lengths(l3)

    assert torus_lengths.systole == pytest.approx(1.0)
    assert l3_lengths.ell_min == pytest.approx(1.0)
    assert l3_lengths.ell_min_dagger == pytest.approx(1.0)
    for surface in (l3, octagon):
        lengths = shortest_lengths(surface)
        assert lengths.ell_min <= lengths.systole + 1e-9


def test_ell_min_after_flow_is_recomputed(l3):
    assert ell_min(flow(l3, math.log(2.0))) == pytest.approx(0.5)
    assert shortest_lengths(flow(l3, 0.3)).ell_min_dagger <= 1.0


def test_double_cover_lifts_connections_with_equal_length(q1111):
    cover = orientation_double_cover(q1111).cover

    assert ell_min(cover) == pytest.approx(ell_min(q1111))


def test_torus_delaunay_has_two_sides_and_a_diagonal(torus):
    triangulation = delaunay_triangulation(torus)
    lengths = sorted(c.length for c in triangulation.connections)

    assert lengths == pytest.approx([1.0, 1.0, ROOT2])
    assert triangulation.euler_characteristic() == 0


def test_delaunay_contains_every_short_connection(l3, octagon):
    for surface in (l3, octagon):
        triangulation = delaunay_triangulation(surface)
        shortest = ell_min(surface)
        short = enumerate_saddle_connections(surface, ROOT2 * shortest * (1.0 - 1e-6))
        assert {c.key for c in short} <= triangulation.keys
        assert triangulation.euler_characteristic() == 2 - 2 * surface.genus


def test_flowed_delaunay_passes_every_incircle_test(l3):
    triangulation = delaunay_triangulation(flow(l3, 0.05))

    assert delaunay_defects(triangulation.surface) == []


def test_extending_by_a_crossing_connection_respects_the_length_bound(l3):
    diagonals = [c for c in enumerate_saddle_connections(l3, 1.5) if c.length > 1.1]
    seed = diagonals[0]
    crossing = [c for c in diagonals[1:] if not are_disjoint(l3, seed, c)]
    complex_ = make_complex(l3, [seed])

    extended = extend_complex(l3, complex_, crossing[0])

    assert extended.size >= 2
    assert extended.max_length <= 2.0 * seed.length + crossing[0].length + 1e-9


def test_completion_from_a_unit_connection(l3):
    seed = enumerate_saddle_connections(l3, 1.1)[0]

    completion = SurfaceService.grow_complex(l3, [seed])

    assert isinstance(completion, Completion)
    assert completion.triangulation.euler_characteristic() == -2
    assert seed.key in completion.triangulation.keys()
    assert completion.complex_.is_triangulation()
    assert completion.constant <= 8.0


def test_a_triangulation_cannot_be_extended(l3):
    seed = enumerate_saddle_connections(l3, 1.1)[0]
    full = complete_to_triangulation(l3, make_complex(l3, [seed])).complex_
    other = next(c for c in enumerate_saddle_connections(l3, 3.0) if c not in full)

    with pytest.raises(NotApplicableError):
        extend_complex(l3, full, other)


def test_torus_periods_and_rebuild(torus):
    triangulation = triangulation_of(torus)
    basis, periods = SurfaceService.periods(triangulation)

    rebuilt = SurfaceService.rebuild(triangulation, basis, periods)

    assert len(basis) == 2
    assert sorted((abs(x), abs(y)) for x, y in periods) == [(0.0, 1.0), (1.0, 0.0)]
    assert canonical_form(rebuilt) == canonical_form(torus)


def test_one_edge_does_not_determine_the_torus(torus):
    with pytest.raises(RankDeficientError):
        period_vector(triangulation_of(torus), [0])


def test_l3_triangles_close_up(l3):
    triangulation = delaunay_triangulation(l3)

    assert np.allclose(triangulation.surface.edges.sum(axis=1), 0.0)


@pytest.mark.slow
def test_ell_min_is_lipschitz_along_period_perturbations(l3):
    lipschitz = SurfaceService.ell_min_probe(l3, samples=20, seed=0)

    assert lipschitz.base_value == pytest.approx(1.0)
    assert lipschitz.is_stable(0.25)


def test_connection_without_holonomy_is_rejected(l3):
    for holonomy in (np.zeros(2), np.array([math.nan, 1.0])):
        with pytest.raises(TracingError, match="no length"):
            make_connection(l3, 0, 0, holonomy, 0, 0, 1)
