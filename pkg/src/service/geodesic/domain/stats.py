"""Lengths, transverse measures and the direction functions v_beta and h_beta."""

import numpy as np
from pydantic import BaseModel

from src.service.geodesic.domain.tighten import FlatGeodesic


class GeodesicStats(BaseModel):
    """Flat length and direction statistics of a flat geodesic.

    `re_measure` is the total horizontal variation, the transverse measure of the
    vertical foliation; `im_measure` is the total vertical variation. `v_beta` and
    `h_beta` are the smallest vertical and horizontal slopes over the saddle connections,
    or of the core for cylinder curves.
    """

    length: float
    re_measure: float
    im_measure: float
    v_beta: float
    h_beta: float
    n_connections: int


def geodesic_stats(geodesic: FlatGeodesic) -> GeodesicStats:
    holonomies = np.array(geodesic.holonomies, dtype=float).reshape(-1, 2)
    lengths = np.hypot(holonomies[:, 0], holonomies[:, 1])
    horizontal = np.abs(holonomies[:, 0])
    vertical = np.abs(holonomies[:, 1])
    return GeodesicStats(
        length=float(lengths.sum()),
        re_measure=float(horizontal.sum()),
        im_measure=float(vertical.sum()),
        v_beta=float(np.clip((vertical / lengths).min(), 0.0, 1.0)),
        h_beta=float(np.clip((horizontal / lengths).min(), 0.0, 1.0)),
        n_connections=geodesic.n_connections,
    )
