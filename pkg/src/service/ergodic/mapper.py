"""Module for mapping ergodic experiment results to DataFrames."""

import pandas as pd
from pandas import DataFrame

from src.service.ergodic.domain.equidistribution import EquidistributionReport
from src.service.ergodic.domain.estimate import EstimateReport
from src.service.ergodic.domain.itinerary import (
    FalsificationReport,
    Itinerary,
    ItineraryValidation,
)

EQUIDIST_COLUMNS = [
    "T",
    "A",
    "length",
    "segment_integral",
    "area_integral",
    "error",
    "normalized_error",
    "seed",
]
ESTIMATE_COLUMNS = [
    "r",
    "predicted",
    "actual_lo",
    "actual_hi",
    "residual",
    "normalized_residual",
    "seed",
]
ITINERARY_COLUMNS = ["n", "time", "violations"]
FALSIFICATION_COLUMNS = [
    "traces",
    "validated",
    "validated_fraction",
    "failures",
    "confirmed",
    "holds",
    "bound",
    "max_outside",
    "min_failure_outside",
    "failed_conditions",
    "seed",
]


def map_equidistribution(
    reports: list[EquidistributionReport], seed: int | None = None
) -> DataFrame:
    rows = [
        {
            "T": report.horizon,
            "A": report.scale,
            "length": report.length,
            "segment_integral": report.segment_integral,
            "area_integral": report.area_integral,
            "error": report.error,
            "normalized_error": report.normalized_error,
            "seed": seed,
        }
        for report in reports
    ]
    return pd.DataFrame(rows, columns=EQUIDIST_COLUMNS)


def map_estimate(report: EstimateReport, seed: int | None = None) -> DataFrame:
    row = {
        "r": report.r,
        "predicted": report.predicted,
        "actual_lo": report.actual_lo,
        "actual_hi": report.actual_hi,
        "residual": report.residual,
        "normalized_residual": report.normalized_residual,
        "seed": seed,
    }
    return pd.DataFrame([row], columns=ESTIMATE_COLUMNS)


def map_itinerary(itinerary: Itinerary, validation: ItineraryValidation) -> DataFrame:
    """One row per sample time, listing the conditions that fail at that index.

    Condition 0 (no sample strictly inside) is reported on the first row.
    """
    failing: dict[int, list[str]] = {}
    for violation in validation.violations:
        index = 0 if violation.index is None else violation.index
        failing.setdefault(index, []).append(str(violation.condition))
    rows = [
        {"n": n, "time": time, "violations": ";".join(failing.get(n, []))}
        for n, time in enumerate(itinerary.times)
    ]
    return pd.DataFrame(rows, columns=ITINERARY_COLUMNS)


def map_falsification(report: FalsificationReport, seed: int | None = None) -> DataFrame:
    row = {
        "traces": report.traces,
        "validated": report.validated,
        "validated_fraction": report.validated_fraction,
        "failures": report.failures,
        "confirmed": report.confirmed,
        "holds": report.holds,
        "bound": report.bound,
        "max_outside": report.max_outside,
        "min_failure_outside": report.min_failure_outside,
        "failed_conditions": ";".join(str(c) for c in report.failed_conditions),
        "seed": seed,
    }
    return pd.DataFrame([row], columns=FALSIFICATION_COLUMNS)
