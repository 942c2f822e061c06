from __future__ import annotations

import math

import pytest

from src.service.collar.domain.profiles import bump, bump_normalizer
from src.service.collar.service import CollarService
from src.service.exceptions import (
    DeltaOutOfRangeError,
    HigherOrderZeroError,
    HorizontalGeodesicError,
)
from src.service.geodesic.domain.tighten import GeodesicKind
from src.service.surface.domain.tracing import SurfacePoint, trace_ray
from src.tests.conftest import geodesic_of, two_vertical_cylinders


@pytest.fixture(scope="module")
def l3_vertical_collar(l3):
    return CollarService.build(geodesic_of(l3, "l3_vertical"))


@pytest.fixture(scope="module")
def q1111_collar(q1111):
    geodesic = two_vertical_cylinders(q1111)
    assert geodesic.kind is GeodesicKind.SINGULAR
    return CollarService.build(geodesic)


def test_profile_is_normalized():
    assert bump_normalizer() > 0.0
    assert float(bump(0.0)) > 0.0
    assert float(bump(1.0)) == 0.0
    assert float(bump(-1.5)) == 0.0


def test_cylinder_bump_integrates_to_the_vertical_variation(l3_vertical_collar):
    phi = CollarService.bump(l3_vertical_collar)

    result = CollarService.integrate(phi)

    assert not l3_vertical_collar.has_connections
    assert result.value == pytest.approx(2.0, rel=1e-3)


def test_cylinder_bump_ignores_delta_and_side(l3_vertical_collar):
    phi = CollarService.bump(l3_vertical_collar, 0.01, 1)

    assert phi.delta is None
    assert phi.side is None


def test_horizontal_segment_across_the_core_sees_one_crossing(l3, l3_vertical_collar):
    phi = CollarService.bump(l3_vertical_collar)
    segment = trace_ray(l3, SurfacePoint(triangle=0, x=0.1, y=0.05), (1.0, 0.0), 0.85)

    result = CollarService.integrate(phi, segment)

    assert result.value == pytest.approx(1.0, rel=1e-3)


def test_bump_vanishes_away_from_the_collar(l3_vertical_collar):
    phi = CollarService.bump(l3_vertical_collar)

    assert CollarService.evaluate(phi, SurfacePoint(triangle=2, x=0.6, y=0.3)) == 0.0


def test_horizontal_geodesic_has_no_collar(l3):
    with pytest.raises(HorizontalGeodesicError):
        CollarService.build(geodesic_of(l3, "l3_horizontal"))


def test_chain_through_a_double_zero_is_rejected(q22):
    geodesic = two_vertical_cylinders(q22)

    with pytest.raises(HigherOrderZeroError):
        CollarService.build(geodesic)


def test_saddle_connection_collar_needs_an_admissible_delta(q1111_collar):
    limit = q1111_collar.ell_min_dagger / 8.0

    assert q1111_collar.has_connections
    with pytest.raises(DeltaOutOfRangeError):
        CollarService.bump(q1111_collar)
    with pytest.raises(DeltaOutOfRangeError):
        CollarService.bump(q1111_collar, limit, 0)
    with pytest.raises(DeltaOutOfRangeError):
        CollarService.bump(q1111_collar, limit / 2.0, 2)


def test_lower_bump_is_below_the_upper_one(q1111_collar):
    delta = q1111_collar.ell_min_dagger / 16.0
    lower = CollarService.bump(q1111_collar, delta, 0)
    upper = CollarService.bump(q1111_collar, delta, 1)
    near = SurfacePoint(triangle=0, x=0.98, y=0.5)

    assert CollarService.evaluate(lower, near) <= CollarService.evaluate(upper, near) + 1e-12


@pytest.mark.slow
def test_sandwich_brackets_the_vertical_variation(q1111_collar):
    delta = q1111_collar.ell_min_dagger / 16.0

    report = CollarService.sandwich(q1111_collar, delta)

    assert report.delta == delta
    assert report.lower <= report.target + 1e-6
    assert report.target <= report.upper + 1e-6
    assert report.difference >= 0.0


@pytest.mark.slow
def test_sobolev_norm_of_the_lower_bump_grows_as_delta_shrinks(q1111_collar):
    delta = q1111_collar.ell_min_dagger / 16.0

    wide = CollarService.sobolev_norm(CollarService.bump(q1111_collar, delta, 0))
    narrow = CollarService.sobolev_norm(CollarService.bump(q1111_collar, delta / 2.0, 0))

    assert narrow.value > wide.value
    assert not wide.cover_trivial


@pytest.mark.slow
def test_cylinder_norm_lifts_to_the_trivial_cover(l3_vertical_collar):
    norm = CollarService.sobolev_norm(CollarService.bump(l3_vertical_collar))

    assert norm.cover_trivial
    assert norm.value == pytest.approx(math.sqrt(2.0) * (norm.l2 + norm.dx + norm.dy))
    assert norm.value <= norm.sup_bound + 1e-9
