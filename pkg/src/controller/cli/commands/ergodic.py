"""Flow experiments: equidist, estimate and itinerary."""

import logging

from pandas import DataFrame

from src.controller.cli.commands.base import Command, open_curve, open_surface, register
from src.controller.cli.schemas.params import EquidistParams, EstimateParams, ItineraryParams
from src.controller.errors.exceptions import UsageError
from src.service.collar.service import CollarService
from src.service.ergodic.mapper import (
    EQUIDIST_COLUMNS,
    ESTIMATE_COLUMNS,
    ITINERARY_COLUMNS,
    map_equidistribution,
    map_estimate,
    map_falsification,
    map_itinerary,
)
from src.service.ergodic.service import ErgodicService
from src.service.geodesic.service import GeodesicService

logger = logging.getLogger(__name__)


def equidist(params: EquidistParams) -> DataFrame:
    """Equidistribution error of long horizontal segments against one bump function."""
    surface, curve = open_curve(params, params.curve)
    collar = CollarService.build(GeodesicService.tighten(surface, curve))
    bump = CollarService.bump(collar, params.delta, params.side)
    reports = ErgodicService.equidistribution(
        surface,
        bump,
        params.T,
        scale=params.A,
        n_starts=params.starts,
        seed=params.seed,
    )
    return map_equidistribution(reports, params.seed)


def estimate(params: EstimateParams) -> DataFrame:
    surface = open_surface(params.qs, theta=params.theta)
    alpha = GeodesicService.load_curve(surface, params.alpha)
    beta = GeodesicService.load_curve(surface, params.beta)
    report = ErgodicService.estimate(surface, params.r, alpha, beta)
    return map_estimate(report, params.seed)


def itinerary(params: ItineraryParams) -> DataFrame:
    """Sampled itinerary of an orbit, or the sampler summary over synthetic traces.

    Raises:
        UsageError: Unless exactly one of --surface and --synthetic is given.
    """
    if (params.surface is None) == (params.synthetic is None):
        error_msg = "itinerary takes exactly one of --surface and --synthetic"
        raise UsageError(error_msg)
    if params.synthetic is not None:
        max_outside = params.max_outside
        if max_outside is None:
            max_outside = max(0.0, params.rho * params.epsilon * params.T - 2.0 * params.dt)
        logger.info("Synthetic traces with at most %.6g outside K", max_outside)
        traces = ErgodicService.synthetic(
            params.synthetic, params.T, params.dt, params.s, max_outside, params.seed
        )
        report = ErgodicService.falsify(traces, params.T, params.rho, params.epsilon, params.s)
        return map_falsification(report, params.seed)
    surface = open_surface(params.surface, theta=params.theta, normalize=True)
    trace = ErgodicService.membership(
        surface, params.T, dt=params.dt, delta=params.delta, s=params.s
    )
    sampled, validation = ErgodicService.itinerary(
        trace, params.T, params.rho, params.epsilon, params.s
    )
    return map_itinerary(sampled, validation)


register(
    Command(
        name="equidist",
        help="Equidistribution error of horizontal segments on a unit-area surface.",
        params=EquidistParams,
        handler=equidist,
        columns=EQUIDIST_COLUMNS,
    )
)
register(
    Command(
        name="estimate",
        help="Predicted against certified intersection number across a flow segment.",
        params=EstimateParams,
        handler=estimate,
        columns=ESTIMATE_COLUMNS,
    )
)
register(
    Command(
        name="itinerary",
        help="Sample and validate an itinerary of the Teichmueller flow.",
        params=ItineraryParams,
        handler=itinerary,
        columns=ITINERARY_COLUMNS,
    )
)
