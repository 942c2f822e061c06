"""The collar subcommand."""

from pandas import DataFrame

from src.controller.cli.commands.base import Command, open_curve, register
from src.controller.cli.schemas.params import CollarParams
from src.service.collar.mapper import REPORT_COLUMNS, map_collar, map_sandwich
from src.service.collar.service import CollarService
from src.service.geodesic.service import GeodesicService


def collar(params: CollarParams) -> DataFrame:
    """Integrals and Sobolev norm of the bumps of a curve's collar, or the collar pieces.

    The reported norm is the one of the bump on `side`.
    """
    surface, curve = open_curve(params)
    built = CollarService.build(GeodesicService.tighten(surface, curve))
    if params.table == "pieces":
        return map_collar(built)
    report = CollarService.sandwich(built, params.delta)
    if built.has_connections and params.side == 1:
        norm = CollarService.sobolev_norm(CollarService.bump(built, params.delta, params.side))
        report = report.model_copy(update={"norm": norm.value, "sup_bound": norm.sup_bound})
    return map_sandwich(report)


register(
    Command(
        name="collar",
        help="Bump functions on the collar of a flat geodesic.",
        params=CollarParams,
        handler=collar,
        columns=REPORT_COLUMNS,
    )
)
