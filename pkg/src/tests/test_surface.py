from __future__ import annotations

import math

import numpy as np
import pytest

from src.repository.exceptions import MalformedFileError, SurfaceFileNotFoundError
from src.repository.files import dump_surface, load_surface, parse_key_values
from src.repository.models.files import SurfaceFile
from src.service.exceptions import (
    DegenerateTriangleError,
    SingularMatrixError,
    TracingError,
    UnglueableEdgeError,
)
from src.service.surface.domain.linear_action import (
    PlanarMatrix,
    apply_matrix,
    flow,
    flow_matrix,
    negate_differential,
    rotation_matrix,
)
from src.service.surface.domain.surface_core import (
    canonical_form,
    gauss_bonnet_defect,
    normalize_area,
    scale_surface,
    stratum_signature,
)
from src.service.surface.domain.tracing import SurfacePoint, trace_ray
from src.service.surface.service import SurfaceService

TORUS_TRIANGLES = [
    [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]],
    [[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
]


def _torus_file(*, second: list[list[float]] | None = None) -> SurfaceFile:
    return SurfaceFile(
        triangles=[TORUS_TRIANGLES[0], second or TORUS_TRIANGLES[1]],
        gluings=[((0, 0), (1, 1), False), ((0, 1), (1, 2), False), ((0, 2), (1, 0), False)],
        name="torus",
    )


def test_torus_is_genus_one_with_one_marked_point(torus):
    singularities = torus.singularities()

    assert torus.genus == 1
    assert len(singularities) == 1
    assert singularities[0].marked
    assert singularities[0].angle == pytest.approx(2.0 * math.pi)
    assert stratum_signature(torus) == []


def test_l3_has_one_zero_of_angle_six_pi(l3):
    zeros = [s for s in l3.singularities() if not s.marked]

    assert l3.genus == 2
    assert len(zeros) == 1
    assert zeros[0].angle == pytest.approx(6.0 * math.pi)
    assert stratum_signature(l3) == [4]


def test_octagon_is_in_the_principal_genus_two_stratum_of_order_four(octagon):
    assert octagon.genus == 2
    assert stratum_signature(octagon) == [4]


@pytest.mark.parametrize(("name", "signature"), [("q22", [2, 2]), ("q1111", [1, 1, 1, 1])])
def test_flip_glued_fixtures_have_the_expected_zeros(name, signature):
    surface = SurfaceService.load(name)

    assert surface.genus == 2
    assert sorted(stratum_signature(surface)) == signature
    assert not surface.is_translation_surface()


def test_gauss_bonnet_on_every_fixture(torus, l3, octagon, q22, q1111):
    for surface in (torus, l3, octagon, q22, q1111):
        total = sum(round(s.angle / math.pi) - 2 for s in surface.singularities())
        assert total == 4 * surface.genus - 4
        assert gauss_bonnet_defect(surface) == pytest.approx(0.0, abs=1e-9)
    cover = SurfaceService.double_cover(l3).cover
    assert gauss_bonnet_defect(cover) == pytest.approx(0.0, abs=1e-9)


def test_gluing_edges_of_different_length_is_rejected():
    bad = _torus_file(second=[[2.0, 2.0], [-2.0, 0.0], [0.0, -2.0]])

    with pytest.raises(UnglueableEdgeError):
        SurfaceService.build_surface(bad)


def test_clockwise_triangle_is_degenerate():
    bad = _torus_file(second=[[0.0, -1.0], [-1.0, 0.0], [1.0, 1.0]])

    with pytest.raises(DegenerateTriangleError):
        SurfaceService.build_surface(bad)


def test_areas_and_normalization(torus, l3):
    normalized = normalize_area(l3)

    assert torus.area == pytest.approx(1.0)
    assert l3.area == pytest.approx(3.0)
    assert normalized.area == pytest.approx(1.0, abs=1e-9)
    assert normalize_area(normalized).area == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(normalized.edges, l3.edges / math.sqrt(3.0))


def test_l3_diameter_bracket(l3):
    metrics, _, _ = SurfaceService.describe(l3)

    assert metrics.diameter_lower == pytest.approx(math.sqrt(2.0) / 2.0)
    assert metrics.diameter_upper == pytest.approx(math.sqrt(2.0))
    assert metrics.diameter_upper <= 2.0 * math.sqrt(2.0)


def test_double_cover_of_a_square_differential_is_trivial(l3):
    cover = SurfaceService.double_cover(l3)

    assert cover.trivial
    assert cover.cover.n_components() == 2
    assert cover.cover.area == pytest.approx(2.0 * l3.area)
    assert cover.cover.is_translation_surface()


@pytest.mark.parametrize(("name", "cover_genus"), [("q22", 3), ("q1111", 5)])
def test_double_cover_genus_follows_riemann_hurwitz(name, cover_genus):
    cover = SurfaceService.double_cover(SurfaceService.load(name))

    assert not cover.trivial
    assert cover.cover.n_components() == 1
    assert cover.cover.genus == cover_genus


def test_flow_dilates_horizontal_and_contracts_vertical(torus):
    flowed = apply_matrix(torus, flow_matrix(math.log(2.0)))

    assert np.allclose(flowed.edges[1, 0], [2.0, 0.5])
    assert np.allclose(flow(torus, 0.0).edges, torus.edges)


def test_rotating_twice_by_a_right_angle_is_the_identity_up_to_sign(l3):
    quarter = rotation_matrix(math.pi / 2.0)
    twice = apply_matrix(apply_matrix(l3, quarter), quarter)

    assert np.allclose(quarter.apply([1.0, 0.0]), [0.0, 1.0])
    assert canonical_form(twice) == canonical_form(l3)


def test_negated_differential_is_the_quarter_rotation(l3):
    assert canonical_form(negate_differential(l3)) == canonical_form(
        apply_matrix(l3, rotation_matrix(math.pi / 2.0))
    )


def test_composition_of_matrices(l3):
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = flow_matrix(float(rng.uniform(-1, 1))) @ rotation_matrix(float(rng.uniform(0, 3)))
        b = rotation_matrix(float(rng.uniform(0, 3))) @ flow_matrix(float(rng.uniform(-1, 1)))
        assert canonical_form(apply_matrix(apply_matrix(l3, a), b)) == canonical_form(
            apply_matrix(l3, b @ a)
        )


def test_singular_matrix_is_rejected(torus):
    with pytest.raises(SingularMatrixError):
        apply_matrix(torus, PlanarMatrix(a=1.0, b=1.0, c=1.0, d=1.0))


def test_uniform_scaling_scales_lengths_linearly(l3):
    _, _, lengths = SurfaceService.describe(scale_surface(l3, 2.0))

    assert lengths.ell_min == pytest.approx(2.0)


def test_horizontal_ray_wraps_around_the_torus(torus):
    start = SurfacePoint(triangle=0, x=0.6, y=0.3)

    segment = trace_ray(torus, start, (1.0, 0.0), 2.0)

    assert segment.complete
    assert segment.traveled == pytest.approx(2.0)
    assert segment.end.triangle == 0
    assert (segment.end.x, segment.end.y) == pytest.approx((0.6, 0.3))


def test_ray_into_the_marked_point_stops_with_a_hit(torus):
    start = SurfacePoint(triangle=0, x=0.75, y=0.25)

    segment = trace_ray(torus, start, (1.0, -1.0), 1.0)

    assert not segment.complete
    assert segment.traveled == pytest.approx(0.25 * math.sqrt(2.0))


def test_horizontal_ray_on_l3_runs_around_the_two_square_cylinder(l3):
    segment = trace_ray(l3, SurfacePoint(triangle=0, x=0.5, y=0.25), (1.0, 0.0), 7.0)

    assert segment.complete
    assert [c.triangle for c in segment.crossings] == [0, 3, 2, 1] * 3 + [0, 3]
    assert segment.end.triangle == 2
    assert (segment.end.x, segment.end.y) == pytest.approx((0.5, 0.25))


def test_tracing_in_two_legs_matches_tracing_at_once(l3):
    start = SurfacePoint(triangle=0, x=0.61, y=0.27)
    direction = (math.cos(0.37), math.sin(0.37))

    whole = trace_ray(l3, start, direction, 7.0)
    first = trace_ray(l3, start, direction, 2.3)
    second = trace_ray(l3, first.end, first.end_direction, 4.7)

    legs = [(c.triangle, c.edge) for c in first.crossings + second.crossings]
    assert legs == [(c.triangle, c.edge) for c in whole.crossings]
    assert first.traveled + second.traveled == pytest.approx(whole.traveled)
    assert second.end.triangle == whole.end.triangle
    assert (second.end.x, second.end.y) == pytest.approx((whole.end.x, whole.end.y))


def test_ray_needs_a_finite_nonzero_direction(l3):
    start = SurfacePoint(triangle=0, x=0.5, y=0.25)

    for direction in ((0.0, 0.0), (math.nan, 1.0), (math.inf, 0.0)):
        with pytest.raises(TracingError, match="finite and nonzero"):
            trace_ray(l3, start, direction, 1.0)
    with pytest.raises(TracingError, match="finite and non-negative"):
        trace_ray(l3, start, (1.0, 0.0), math.nan)


def test_ray_of_zero_length_stays_put(l3):
    start = SurfacePoint(triangle=0, x=0.5, y=0.25)

    segment = trace_ray(l3, start, (1.0, 0.0), 0.0)

    assert segment.complete
    assert segment.crossings == ()
    assert segment.end == start


def test_surface_file_round_trip():
    surface_file = load_surface("l3")

    assert SurfaceFile.model_validate(parse_key_values(dump_surface(surface_file))) == (
        surface_file
    )


def test_file_errors(tmp_path):
    broken = tmp_path / "broken.surf"
    broken.write_text("triangles: [[[1, 0], [0, 1], [-1, -1]]]\ngluings: [NaN]\n")

    with pytest.raises(SurfaceFileNotFoundError):
        load_surface(tmp_path / "missing.surf")
    with pytest.raises(MalformedFileError):
        load_surface(broken)
