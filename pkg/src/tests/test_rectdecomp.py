from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.config import settings
from src.service.exceptions import (
    DegenerateDirectionError,
    GeodesicServiceError,
    HorizontalPieceError,
    WidthViolationError,
)
from src.service.geodesic.domain.rectdecomp import SegmentKind, shear_offset
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.linear_action import flow
from src.service.surface.domain.tracing import SurfacePoint
from src.tests.conftest import geodesic_of


def test_slope_one_curve_has_unit_horizontal_total(torus):
    geodesic = geodesic_of(torus, "torus_11")

    decomposition = GeodesicService.decompose(geodesic)

    assert decomposition.closes
    assert decomposition.horizontal_total == pytest.approx(1.0)
    assert decomposition.ell_min == pytest.approx(1.0)
    assert all(s.length <= decomposition.ell_min / 2.0 + 1e-9 for s in decomposition.segments)
    assert decomposition.count_ratio <= settings.RECT_CONSTANT


def test_segments_alternate_between_horizontal_and_vertical(torus):
    decomposition = GeodesicService.decompose(geodesic_of(torus, "torus_23"))
    kinds = [s.kind for s in decomposition.segments if s.length > 1e-12]

    assert set(kinds) == {SegmentKind.HORIZONTAL, SegmentKind.VERTICAL}
    assert decomposition.horizontal_total == pytest.approx(2.0)


def test_horizontal_core_is_kept_whole(torus):
    decomposition = GeodesicService.decompose(geodesic_of(torus, "torus_h"))

    assert len(decomposition.segments) == 1
    assert decomposition.rectangles == ()
    assert decomposition.horizontal_total == pytest.approx(1.0)


def test_horizontal_total_matches_the_measure_on_a_singular_chain(l3):
    start = SurfacePoint(triangle=0, x=0.6, y=0.3)
    curve = GeodesicService.curve_of_path(l3, start, [[2.0, 0.0], [0.0, 2.0]])
    geodesic = GeodesicService.tighten(l3, curve)

    decomposition = GeodesicService.decompose(geodesic)

    assert decomposition.horizontal_total == pytest.approx(
        GeodesicService.stats(geodesic).re_measure, abs=1e-7
    )
    assert decomposition.count_ratio <= settings.RECT_CONSTANT


def test_shear_moves_away_from_a_near_cone_point():
    shortest = 1.0

    offset = shear_offset(-shortest / 16.0, 10.0, shortest / 4.0)

    assert offset == pytest.approx(3.0 * shortest / 32.0)
    assert shear_offset(-10.0, 10.0, 0.25) == 0.0


def test_cone_points_on_both_sides_leave_no_room():
    with pytest.raises(WidthViolationError):
        shear_offset(-0.01, 0.01, 0.25)


def test_rectangle_window_must_fit(torus):
    geodesic = geodesic_of(torus, "torus_11")

    with pytest.raises(WidthViolationError):
        GeodesicService.rectangle(geodesic, 0, 0.0, 1.0)
    with pytest.raises(GeodesicServiceError):
        GeodesicService.rectangle(geodesic, 3, 0.0, 0.1)


def test_axis_parallel_pieces_have_no_rectangle(torus):
    with pytest.raises(DegenerateDirectionError):
        GeodesicService.rectangle(geodesic_of(torus, "torus_h"), 0, 0.0, 0.1)
    with pytest.raises(DegenerateDirectionError):
        GeodesicService.rectangle(geodesic_of(torus, "torus_v"), 0, 0.0, 0.1)


def test_rectangle_around_a_cylinder_core_is_zero_free(torus):
    record = GeodesicService.rectangle(geodesic_of(torus, "torus_11"), 0, 0.0, 0.25)

    assert record.zero_free
    assert record.delta == 0.0
    assert record.half_height == pytest.approx(0.125)


def test_transported_horizontal_segments_count_the_flowed_intersection(torus):
    t = math.log(3.0)
    decomposition = GeodesicService.decompose(geodesic_of(torus, "torus_h"))
    flowed = flow(torus, t)

    estimate = GeodesicService.transported_estimate(
        torus, t, decomposition, geodesic_of(flowed, "torus_13")
    )

    assert estimate.total == 3
    assert estimate.n_segments == 1
    assert estimate.radius > 0.0


def test_transport_rejects_horizontal_targets_and_negative_times(torus):
    decomposition = GeodesicService.decompose(geodesic_of(torus, "torus_h"))
    flowed = flow(torus, 0.5)

    with pytest.raises(HorizontalPieceError):
        GeodesicService.transported_estimate(
            torus, 0.5, decomposition, geodesic_of(flowed, "torus_h")
        )
    with pytest.raises(GeodesicServiceError):
        GeodesicService.transported_estimate(
            torus, -1.0, decomposition, geodesic_of(flowed, "torus_13")
        )


@pytest.mark.slow
def test_rectangles_embed_on_the_torus(torus):
    decomposition = GeodesicService.decompose(
        geodesic_of(torus, "torus_11"), check_embedding=True
    )

    assert decomposition.rectangles
    assert all(r.embedded for r in decomposition.rectangles)


def test_transported_segments_on_l3_count_the_flowed_intersection(l3):
    decomposition = GeodesicService.decompose(geodesic_of(l3, "l3_horizontal"))
    beta = geodesic_of(flow(l3, 1.0), "l3_vertical")

    estimate = GeodesicService.transported_estimate(l3, 1.0, decomposition, beta)

    assert estimate.total == 1
    assert estimate.radius > 0.0


@pytest.mark.slow
@pytest.mark.parametrize(
    ("name", "alphas", "betas"),
    [
        (
            "torus",
            ("torus_h", "torus_11", "torus_23", "torus_13"),
            ("torus_v", "torus_11", "torus_23", "torus_13"),
        ),
        ("l3", ("l3_horizontal", "l3_top"), ("l3_vertical", "l3_vertical_b")),
    ],
)
def test_transported_estimates_stay_within_their_radius(name, alphas, betas, request):
    surface = request.getfixturevalue(name)
    rng = np.random.default_rng(11)
    decompositions = {a: GeodesicService.decompose(geodesic_of(surface, a)) for a in alphas}
    cases = 0

    while cases < 50:
        alpha, beta = str(rng.choice(alphas)), str(rng.choice(betas))
        if alpha == beta:
            continue
        t = float(rng.uniform(0.0, 1.5))
        bounds = GeodesicService.bounds(geodesic_of(surface, alpha), geodesic_of(surface, beta))

        estimate = GeodesicService.transported_estimate(
            surface, t, decompositions[alpha], geodesic_of(flow(surface, t), beta)
        )

        distance = max(bounds.lower - estimate.total, estimate.total - bounds.upper, 0)
        assert distance <= estimate.radius
        cases += 1
