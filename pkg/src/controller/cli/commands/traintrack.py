"""The traintrack subcommand."""

from pandas import DataFrame

from src.controller.cli.commands.base import Command, open_surface, register
from src.controller.cli.schemas.params import TraintrackParams
from src.controller.errors.exceptions import UsageError
from src.service.geodesic.service import GeodesicService
from src.service.surface.service import SurfaceService
from src.service.traintrack.mapper import (
    BRANCH_COLUMNS,
    map_branches,
    map_convexity,
    map_switches,
)
from src.service.traintrack.service import TrainTrackService


def traintrack(params: TraintrackParams) -> DataFrame:
    """Branch or switch table of the dual track, or its convexity probe.

    Raises:
        UsageError: If the convexity table lacks --curve or is asked on the Delaunay track.
    """
    if params.table == "convexity" and (params.curve is None or params.delaunay):
        error_msg = "--table convexity needs --curve and the track of the surface itself"
        raise UsageError(error_msg)
    surface = open_surface(
        params.surface, theta=params.theta, t=params.t, normalize=params.normalize
    )
    triangulation = SurfaceService.delaunay(surface) if params.delaunay else None
    track, measure = TrainTrackService.dual_track(surface, triangulation)
    if params.table == "switches":
        return map_switches(track, measure)
    if params.table == "convexity":
        alpha = GeodesicService.tighten(surface, GeodesicService.load_curve(surface, params.curve))
        report = TrainTrackService.convexity(alpha, track, count=params.pairs, seed=params.seed)
        return map_convexity(report)
    return map_branches(track, measure)


register(
    Command(
        name="traintrack",
        help="Train track dual to a triangulation, weighted by the vertical foliation.",
        params=TraintrackParams,
        handler=traintrack,
        columns=BRANCH_COLUMNS,
    )
)
