"""Module for mapping surface domain results to DataFrames.

Every function returns a DataFrame with a fixed column order, which is the order of the
CSV the command line writes.
"""

import logging
import math

import pandas as pd
from pandas import DataFrame

from src.service.surface.domain.delaunay import Triangulation
from src.service.surface.domain.saddle import SaddleConnection, ShortestLengths
from src.service.surface.domain.surface_core import HalfTranslationSurface, SurfaceMetrics

logger = logging.getLogger(__name__)

SURFACE_COLUMNS = [
    "name",
    "triangles",
    "vertices",
    "genus",
    "area",
    "diameter_lower",
    "diameter_upper",
    "stratum",
    "ell_min",
    "ell_min_dagger",
    "systole",
]
SINGULARITY_COLUMNS = ["vertex", "angle_over_pi", "order", "marked", "corners"]
SADDLE_COLUMNS = [
    "start_vertex",
    "end_vertex",
    "holonomy_x",
    "holonomy_y",
    "length",
]
TRIANGULATION_COLUMNS = ["edge", "start_vertex", "end_vertex", "holonomy_x", "holonomy_y", "length"]


def map_surface_summary(
    surface: HalfTranslationSurface,
    metrics: SurfaceMetrics,
    signature: list[int],
    lengths: ShortestLengths,
) -> DataFrame:
    """One row describing a surface.

    Args:
        surface (HalfTranslationSurface): The surface.
        metrics (SurfaceMetrics): Area, genus and diameter interval.
        signature (list[int]): Orders of the zeros.
        lengths (ShortestLengths): ell_min, its truncation and the systole.

    Returns:
        DataFrame: A single row in `SURFACE_COLUMNS` order.
    """
    row = {
        "name": surface.name,
        "triangles": surface.n_triangles,
        "vertices": surface.n_vertices,
        "genus": metrics.genus,
        "area": metrics.area,
        "diameter_lower": metrics.diameter_lower,
        "diameter_upper": metrics.diameter_upper,
        "stratum": " ".join(str(order) for order in signature),
        "ell_min": lengths.ell_min,
        "ell_min_dagger": lengths.ell_min_dagger,
        "systole": lengths.systole,
    }
    return pd.DataFrame([row], columns=SURFACE_COLUMNS)


def map_singularities(surface: HalfTranslationSurface) -> DataFrame:
    rows = [
        {
            "vertex": s.vertex,
            "angle_over_pi": round(s.angle / math.pi, 9),
            "order": s.order,
            "marked": s.marked,
            "corners": len(s.corners),
        }
        for s in surface.singularities()
    ]
    return pd.DataFrame(rows, columns=SINGULARITY_COLUMNS)


def map_saddle_connections(connections: list[SaddleConnection]) -> DataFrame:
    """Endpoints, holonomy and length of each connection.

    Args:
        connections (list[SaddleConnection]): Connections sorted by length.

    Returns:
        DataFrame: One row per connection in `SADDLE_COLUMNS` order.
    """
    dataframe = pd.DataFrame(
        [
            {
                "start_vertex": c.start_vertex,
                "end_vertex": c.end_vertex,
                "holonomy_x": c.holonomy[0],
                "holonomy_y": c.holonomy[1],
                "length": c.length,
            }
            for c in connections
        ],
        columns=SADDLE_COLUMNS,
    )
    dataframe["length"] = dataframe["length"].astype(float)
    return dataframe


def map_triangulation(triangulation: Triangulation) -> DataFrame:
    dataframe = map_saddle_connections(triangulation.connections)
    dataframe.insert(0, "edge", range(len(dataframe)))
    return dataframe[TRIANGULATION_COLUMNS]
