"""Subcommands describing a surface: build and saddles."""

from pandas import DataFrame

from src.controller.cli.commands.base import Command, open_surface, register
from src.controller.cli.schemas.params import BuildParams, SaddlesParams
from src.service.surface.mapper import (
    SADDLE_COLUMNS,
    SURFACE_COLUMNS,
    map_saddle_connections,
    map_singularities,
    map_surface_summary,
    map_triangulation,
)
from src.service.surface.service import SurfaceService


def build(params: BuildParams) -> DataFrame:
    surface = open_surface(
        params.surface, theta=params.theta, t=params.t, normalize=params.normalize
    )
    if params.table == "singularities":
        return map_singularities(surface)
    if params.table == "delaunay":
        return map_triangulation(SurfaceService.delaunay(surface))
    return map_surface_summary(surface, *SurfaceService.describe(surface))


def saddles(params: SaddlesParams) -> DataFrame:
    surface = open_surface(
        params.surface, theta=params.theta, t=params.t, normalize=params.normalize
    )
    connections = SurfaceService.saddle_connections(surface, params.max_length, params.budget)
    return map_saddle_connections(connections)


register(
    Command(
        name="build",
        help="Validate a surface and print its invariants.",
        params=BuildParams,
        handler=build,
        columns=SURFACE_COLUMNS,
    )
)
register(
    Command(
        name="saddles",
        help="List saddle connections up to a length, one per unoriented segment.",
        params=SaddlesParams,
        handler=saddles,
        columns=SADDLE_COLUMNS,
    )
)
