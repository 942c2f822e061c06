"""Subcommands on flat geodesics: tighten, intersect and rectdecomp."""

from pandas import DataFrame

from src.controller.cli.commands.base import (
    Command,
    open_curve,
    open_surface,
    register,
    surface_of_curve,
)
from src.controller.cli.schemas.params import IntersectParams, RectdecompParams, TightenParams
from src.service.geodesic.domain.intersection import IntersectionBounds
from src.service.geodesic.mapper import (
    BOUNDS_COLUMNS,
    GEODESIC_COLUMNS,
    SEGMENT_COLUMNS,
    map_bounds,
    map_bounds_line,
    map_connections,
    map_decomposition,
    map_geodesic,
)
from src.service.geodesic.service import GeodesicService


def tighten(params: TightenParams) -> DataFrame:
    surface, curve = open_curve(params)
    geodesic = GeodesicService.tighten(surface, curve)
    if params.table == "connections":
        return map_connections(geodesic)
    return map_geodesic(geodesic, GeodesicService.stats(geodesic))


def intersect(params: IntersectParams) -> IntersectionBounds:
    surface = open_surface(
        surface_of_curve(params.alpha, params.surface), theta=params.theta, t=params.t
    )
    alpha = GeodesicService.tighten(surface, GeodesicService.load_curve(surface, params.alpha))
    beta = GeodesicService.tighten(surface, GeodesicService.load_curve(surface, params.beta))
    return GeodesicService.bounds(alpha, beta)


def rectdecomp(params: RectdecompParams) -> DataFrame:
    surface, curve = open_curve(params)
    geodesic = GeodesicService.tighten(surface, curve)
    decomposition = GeodesicService.decompose(geodesic, check_embedding=params.check_embedding)
    return map_decomposition(decomposition)


register(
    Command(
        name="tighten",
        help="Flat geodesic representative of a curve.",
        params=TightenParams,
        handler=tighten,
        columns=GEODESIC_COLUMNS,
    )
)
register(
    Command(
        name="intersect",
        help="Certified interval for the intersection number of two curves.",
        params=IntersectParams,
        handler=intersect,
        to_frame=map_bounds,
        to_text=map_bounds_line,
        columns=BOUNDS_COLUMNS,
    )
)
register(
    Command(
        name="rectdecomp",
        help="Rectangular decomposition of a flat geodesic.",
        params=RectdecompParams,
        handler=rectdecomp,
        columns=SEGMENT_COLUMNS,
    )
)
