"""Module for mapping train tracks to DataFrames."""

import pandas as pd
from pandas import DataFrame

from src.service.traintrack.domain.probes import ConvexityReport
from src.service.traintrack.domain.track import CountingMeasure, TrainTrack, switch_residuals

BRANCH_COLUMNS = ["branch", "triangle", "edge", "holonomy_x", "holonomy_y", "weight"]
SWITCH_COLUMNS = ["triangle", "incoming", "outgoing", "labeling", "alternatives", "residual"]
CONVEXITY_COLUMNS = [
    "v",
    "w",
    "at_v_lo",
    "at_v_hi",
    "at_w_lo",
    "at_w_hi",
    "at_sum_lo",
    "at_sum_hi",
    "violated",
    "equality",
    "lipschitz_ratio",
]


def _join(values: tuple[int, ...]) -> str:
    return " ".join(str(v) for v in values)


def map_branches(track: TrainTrack, measure: CountingMeasure) -> DataFrame:
    """One row per branch, located by its first half-edge."""
    seen = {}
    for t in range(track.surface.n_triangles):
        for k in range(3):
            seen.setdefault(int(track.edge_ids[t, k]), (t, k))
    rows = []
    for branch in range(track.n_branches):
        t, k = seen[branch]
        x, y = track.surface.edges[t, k]
        rows.append(
            {
                "branch": branch,
                "triangle": t,
                "edge": k,
                "holonomy_x": float(x),
                "holonomy_y": float(y),
                "weight": measure.weights[branch],
            }
        )
    return pd.DataFrame(rows, columns=BRANCH_COLUMNS)


def map_switches(track: TrainTrack, measure: CountingMeasure) -> DataFrame:
    residuals = switch_residuals(track, measure)
    rows = [
        {
            "triangle": switch.triangle,
            "incoming": _join(switch.incoming),
            "outgoing": _join(switch.outgoing),
            "labeling": _join(switch.labeling),
            "alternatives": ";".join(_join(option) for option in switch.alternatives),
            "residual": residual,
        }
        for switch, residual in zip(track.switches, residuals, strict=True)
    ]
    return pd.DataFrame(rows, columns=SWITCH_COLUMNS)


def map_convexity(report: ConvexityReport) -> DataFrame:
    rows = [
        {
            "v": _join(case.v),
            "w": _join(case.w),
            "at_v_lo": case.at_v.lower,
            "at_v_hi": case.at_v.upper,
            "at_w_lo": case.at_w.lower,
            "at_w_hi": case.at_w.upper,
            "at_sum_lo": case.at_sum.lower,
            "at_sum_hi": case.at_sum.upper,
            "violated": case.violated,
            "equality": case.equality,
            "lipschitz_ratio": case.lipschitz_ratio,
        }
        for case in report.cases
    ]
    return pd.DataFrame(rows, columns=CONVEXITY_COLUMNS)
