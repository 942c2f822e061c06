"""Bump functions supported on collars.

On a cylinder collar the bump is phi(iota(t, s)) = phi_eps(s): its integral over the
surface is the vertical variation of beta and its integral along a horizontal segment
counts crossings. On saddle connections the pair phi_{0,delta} <= phi_{1,delta} brackets
that behaviour: the lower one tapers off within delta of the endpoints, the upper one
adds the side panels near them.
"""

import logging
from enum import IntEnum

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.service.collar.domain.collar import (
    Collar,
    CollarPiece,
    collar_coordinates,
    point_hits,
)
from src.service.collar.domain.profiles import (
    scaled_bump,
    scaled_bump_derivative,
    scaled_taper,
    scaled_taper_derivative,
)
from src.service.exceptions import DeltaOutOfRangeError
from src.service.surface.domain.tracing import SurfacePoint

logger = logging.getLogger(__name__)


class BumpSide(IntEnum):
    LOWER = 0
    UPPER = 1


class CollarFields(BaseModel):
    """Pullback of a bump and its partial derivatives on a grid of collar coordinates."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    jacobian: float


class BumpFunction(BaseModel):
    """phi on a cylinder collar, or phi_{side, delta} on a collar with saddle connections.

    `delta` and `side` are None for cylinder collars, whose bump does not taper.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    collar: Collar
    delta: float | None = None
    side: BumpSide | None = None

    @property
    def width(self) -> float:
        return self.collar.half_width

    def _amplitude(self, piece: CollarPiece, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Longitudinal factor A(t) along a piece and its derivative."""
        if piece.periodic or self.side is BumpSide.UPPER:
            return np.ones_like(t), np.zeros_like(t)
        delta = self.delta
        head, tail = scaled_taper(t, delta), scaled_taper(piece.length - t, delta)
        d_head = scaled_taper_derivative(t, delta)
        d_tail = -scaled_taper_derivative(piece.length - t, delta)
        value = (1.0 - head) * (1.0 - tail)
        derivative = -d_head * (1.0 - tail) - (1.0 - head) * d_tail
        return value, derivative

    def _panel_amplitude(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.side is not BumpSide.UPPER:
            return np.zeros_like(t), np.zeros_like(t)
        return scaled_taper(t, self.delta), scaled_taper_derivative(t, self.delta)

    def pullback(
        self,
        piece_index: int,
        t: np.ndarray | float,
        s: np.ndarray | float,
        panel: int | None = None,
    ) -> np.ndarray:
        """phi composed with the collar immersion, at collar coordinates (t, s)."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        if panel is None:
            amplitude, _ = self._amplitude(self.collar.pieces[piece_index], t)
        else:
            amplitude, _ = self._panel_amplitude(t)
        return amplitude * scaled_bump(s, self.width)

    def fields(
        self,
        piece_index: int,
        t: np.ndarray,
        s: np.ndarray,
        panel: int | None = None,
    ) -> CollarFields:
        """Pullback, x and y derivatives and area factor on the grid t x s.

        On the collar of a piece with unit direction (c, v) the chart coordinates are
        y = y0 + v t and x = x0 + c t + e (s + shear(t)), e = +-1 the flow direction, so
        d/dx = e d/ds and d/dy = (d/dt - (e c + shear') d/ds) / v. Side panels are swept
        horizontally from a vertical leaf and carry the flat coordinates directly.
        """
        width = self.width
        tt, ss = np.meshgrid(
            np.asarray(t, dtype=float), np.asarray(s, dtype=float), indexing="ij"
        )
        profile = scaled_bump(ss, width)
        slope = scaled_bump_derivative(ss, width)
        if panel is not None:
            amplitude, d_amplitude = self._panel_amplitude(tt)
            return CollarFields(
                value=amplitude * profile,
                dx=amplitude * slope,
                dy=d_amplitude * profile,
                jacobian=1.0,
            )
        piece = self.collar.pieces[piece_index]
        amplitude, d_amplitude = self._amplitude(piece, tt)
        c, v = piece.direction
        e = piece.flow_sign
        shear_slope = piece.shear_slope(tt)
        return CollarFields(
            value=amplitude * profile,
            dx=e * amplitude * slope,
            dy=(d_amplitude * profile - amplitude * slope * (e * c + shear_slope)) / v,
            jacobian=abs(v),
        )

    def evaluate(self, point: SurfacePoint) -> float:
        """phi at a surface point: the pullback summed over all preimages."""
        total = 0.0
        for hit in point_hits(self.collar, point):
            s = collar_coordinates(self.collar, hit, 0.0)
            total += float(self.pullback(hit.piece, hit.t, s, hit.panel))
        return total


def bump_function(
    collar: Collar, delta: float | None = None, side: int | None = None
) -> BumpFunction:
    """Bump function of a collar.

    Args:
        collar (Collar): Collar of a cylinder or singular geodesic.
        delta (float | None): Taper length, required when the collar has saddle connections.
        side (int | None): 0 for the lower bump phi_{0,delta}, 1 for the upper one.

    Raises:
        DeltaOutOfRangeError: If delta is not in (0, ell_min dagger / 8), or the side is
            not 0 or 1, for a collar with saddle connections.

    Returns:
        BumpFunction: The bump; delta and side are dropped for cylinder collars.
    """
    if not collar.has_connections:
        if delta is not None:
            logger.debug("Cylinder collar: the bump does not depend on delta=%s", delta)
        return BumpFunction(collar=collar)
    limit = collar.ell_min_dagger / 8.0
    if delta is None or not 0.0 < delta < limit:
        error_msg = f"delta must lie in (0, {limit:.6g}), got {delta}"
        raise DeltaOutOfRangeError(error_msg)
    if side not in (0, 1):
        error_msg = f"side must be 0 or 1, got {side}"
        raise DeltaOutOfRangeError(error_msg)
    return BumpFunction(collar=collar, delta=delta, side=BumpSide(side))
