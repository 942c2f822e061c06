"""Module for mapping collar results to DataFrames."""

import pandas as pd
from pandas import DataFrame

from src.service.collar.domain.collar import Collar
from src.service.collar.domain.quadrature import SandwichReport

COLLAR_COLUMNS = [
    "piece",
    "kind",
    "length",
    "vertical_speed",
    "anchors",
    "max_shear",
    "panels",
]
REPORT_COLUMNS = [
    "delta",
    "target",
    "integral_lower",
    "integral_upper",
    "lower_residual",
    "upper_residual",
    "difference",
    "norm",
    "sup_bound",
    "cover_trivial",
]


def map_collar(collar: Collar) -> DataFrame:
    """One row per collar piece.

    Returns:
        DataFrame: Rows in `COLLAR_COLUMNS` order.
    """
    rows = [
        {
            "piece": piece.index,
            "kind": "core" if piece.periodic else "connection",
            "length": piece.length,
            "vertical_speed": abs(piece.vertical_speed),
            "anchors": len(piece.anchors),
            "max_shear": max((abs(a.value) for a in piece.anchors), default=0.0),
            "panels": len(piece.panels),
        }
        for piece in collar.pieces
    ]
    return pd.DataFrame(rows, columns=COLLAR_COLUMNS)


def map_sandwich(report: SandwichReport) -> DataFrame:
    row = {
        "delta": report.delta,
        "target": report.target,
        "integral_lower": report.lower,
        "integral_upper": report.upper,
        "lower_residual": report.lower_residual,
        "upper_residual": report.upper_residual,
        "difference": report.difference,
        "norm": report.norm,
        "sup_bound": report.sup_bound,
        "cover_trivial": report.cover_trivial,
    }
    return pd.DataFrame([row], columns=REPORT_COLUMNS)
