"""Module for mapping geodesic domain results to DataFrames and result lines."""

import logging

import pandas as pd
from pandas import DataFrame

from src.service.geodesic.domain.intersection import IntersectionBounds
from src.service.geodesic.domain.rectdecomp import RectangularDecomposition
from src.service.geodesic.domain.stats import GeodesicStats
from src.service.geodesic.domain.tighten import FlatGeodesic, GeodesicKind

logger = logging.getLogger(__name__)

GEODESIC_COLUMNS = [
    "kind",
    "length",
    "n_connections",
    "re_measure",
    "im_measure",
    "v_beta",
    "h_beta",
    "width",
    "circumference",
    "rounds",
]
CONNECTION_COLUMNS = [
    "index",
    "start_vertex",
    "end_vertex",
    "holonomy_x",
    "holonomy_y",
    "length",
    "angle_left",
    "angle_right",
]
SEGMENT_COLUMNS = ["index", "kind", "piece", "window", "start_triangle", "length"]
BOUNDS_COLUMNS = ["I", "n", "m", "lower", "upper"]


def map_geodesic(geodesic: FlatGeodesic, stats: GeodesicStats) -> DataFrame:
    """One row with the shape and statistics of a flat geodesic.

    Args:
        geodesic (FlatGeodesic): The geodesic.
        stats (GeodesicStats): Its length and direction statistics.

    Returns:
        DataFrame: A single row in `GEODESIC_COLUMNS` order.
    """
    cylinder = geodesic.cylinder
    row = {
        "kind": geodesic.kind.value,
        "length": stats.length,
        "n_connections": stats.n_connections,
        "re_measure": stats.re_measure,
        "im_measure": stats.im_measure,
        "v_beta": stats.v_beta,
        "h_beta": stats.h_beta,
        "width": cylinder.width if cylinder is not None else None,
        "circumference": cylinder.circumference if cylinder is not None else None,
        "rounds": geodesic.rounds,
    }
    return pd.DataFrame([row], columns=GEODESIC_COLUMNS)


def map_connections(geodesic: FlatGeodesic) -> DataFrame:
    """Saddle connections of a singular geodesic with the junction angles after each one."""
    if geodesic.kind is GeodesicKind.CYLINDER:
        return pd.DataFrame([], columns=CONNECTION_COLUMNS)
    rows = []
    for index, (connection, angles) in enumerate(
        zip(geodesic.connections, geodesic.junctions, strict=True)
    ):
        rows.append(
            {
                "index": index,
                "start_vertex": connection.start_vertex,
                "end_vertex": connection.end_vertex,
                "holonomy_x": connection.holonomy[0],
                "holonomy_y": connection.holonomy[1],
                "length": connection.length,
                "angle_left": angles[0],
                "angle_right": angles[1],
            }
        )
    return pd.DataFrame(rows, columns=CONNECTION_COLUMNS)


def map_bounds_line(bounds: IntersectionBounds) -> str:
    """`I=3 n=0 m=0 interval=[3,3]`."""
    return (
        f"I={bounds.transverse} n={bounds.n} m={bounds.m} "
        f"interval=[{bounds.lower},{bounds.upper}]"
    )


def map_bounds(bounds: IntersectionBounds) -> DataFrame:
    row = {
        "I": bounds.transverse,
        "n": bounds.n,
        "m": bounds.m,
        "lower": bounds.lower,
        "upper": bounds.upper,
    }
    return pd.DataFrame([row], columns=BOUNDS_COLUMNS)


def map_decomposition(decomposition: RectangularDecomposition) -> DataFrame:
    """Segments of a rectangular decomposition in order.

    Returns:
        DataFrame: One row per segment in `SEGMENT_COLUMNS` order.
    """
    dataframe = pd.DataFrame(
        [
            {
                "index": index,
                "kind": segment.kind.value,
                "piece": segment.piece,
                "window": segment.window,
                "start_triangle": segment.trace.start.triangle,
                "length": segment.length,
            }
            for index, segment in enumerate(decomposition.segments)
        ],
        columns=SEGMENT_COLUMNS,
    )
    dataframe["length"] = dataframe["length"].astype(float)
    return dataframe
