"""Quadrature of bump functions over collars and along horizontal segments.

Integrals over the surface are computed in collar coordinates, where the change of
variables through the immersion counts every point with its multiplicity. Both modes use
a composite midpoint rule with step ell_min / QUADRATURE_DIVISOR, cells refined to at
least MIN_CELLS on every smooth stretch, and one Richardson step against the rule with
twice the step.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel

from src.core.config import settings
from src.service.collar.domain.bump import BumpFunction, BumpSide, CollarFields
from src.service.collar.domain.collar import collar_coordinates, horizontal_hits
from src.service.exceptions import CollarServiceError, QuadratureBudgetError
from src.service.surface.domain.tracing import TracedSegment

logger = logging.getLogger(__name__)

MIN_CELLS = 64
TILE_ROWS = 2048


class QuadratureResult(BaseModel):
    """Extrapolated value with the two midpoint sums it came from."""

    value: float
    fine: float
    coarse: float
    points: int


class SobolevNorm(BaseModel):
    """Norm ||phi|| + ||d_x phi|| + ||d_y phi|| of a bump, lifted to the double cover.

    `l2`, `dx` and `dy` are the three L2 norms on the surface itself and `value` is their
    sum times sqrt(2), the factor picked up by lifting to the orientation double cover.
    `sup_bound` is Area^{1/2} (sup|phi| + sup|d_x phi| + sup|d_y phi|) on the cover.
    """

    value: float
    l2: float
    dx: float
    dy: float
    sup_bound: float
    sup_value: float
    sup_dx: float
    sup_dy: float
    cover_trivial: bool


class _Region(BaseModel):
    piece: int
    panel: int | None = None
    breaks: list[float]


def _cells(length: float, step: float) -> int:
    cells = max(MIN_CELLS, math.ceil(length / step))
    return cells + cells % 2


def _axis(breaks: list[float], step: float, *, coarse: bool) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = [], []
    for a, b in zip(breaks, breaks[1:], strict=False):
        if b - a <= 0.0:
            continue
        n = _cells(b - a, step) // (2 if coarse else 1)
        h = (b - a) / n
        nodes.append(a + (np.arange(n) + 0.5) * h)
        weights.append(np.full(n, h))
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _regions(bump: BumpFunction) -> list[_Region]:
    regions = []
    delta = bump.delta
    for index, piece in enumerate(bump.collar.pieces):
        breaks = {0.0, piece.length, *piece.breakpoints()}
        if not piece.periodic and delta is not None:
            breaks.update({delta, piece.length - delta})
        regions.append(_Region(piece=index, breaks=sorted(breaks)))
        if bump.side is BumpSide.UPPER:
            regions.extend(
                _Region(piece=index, panel=p, breaks=[0.0, delta])
                for p in range(len(piece.panels))
            )
    return regions


def _step(bump: BumpFunction) -> float:
    return bump.collar.ell_min / settings.QUADRATURE_DIVISOR


def _check_budget(bump: BumpFunction, regions: list[_Region]) -> int:
    step = _step(bump)
    width = bump.width
    s_cells = _cells(2.0 * width, step)
    points = 0
    for region in regions:
        t_nodes, _ = _axis(region.breaks, step, coarse=False)
        points += len(t_nodes) * s_cells
    points += points // 4
    if points > settings.QUADRATURE_MAX_POINTS:
        error_msg = (
            f"Quadrature needs {points} points, more than {settings.QUADRATURE_MAX_POINTS}"
        )
        raise QuadratureBudgetError(error_msg)
    return points


def _moments(fields: CollarFields) -> list[np.ndarray]:
    return [fields.value, fields.value**2, fields.dx**2, fields.dy**2]


def _tensor_sums(
    bump: BumpFunction, regions: list[_Region], *, coarse: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint sums of phi, phi^2, (d_x phi)^2, (d_y phi)^2 and the sups of |phi|, |d phi|."""
    step = _step(bump)
    width = bump.width
    s_nodes, s_weights = _axis([-width, width], step, coarse=coarse)
    sums = np.zeros(4)
    sups = np.zeros(3)
    for region in regions:
        t_nodes, t_weights = _axis(region.breaks, step, coarse=coarse)
        for start in range(0, len(t_nodes), TILE_ROWS):
            tile = slice(start, start + TILE_ROWS)
            fields = bump.fields(region.piece, t_nodes[tile], s_nodes, region.panel)
            for i, moment in enumerate(_moments(fields)):
                sums[i] += fields.jacobian * float(t_weights[tile] @ moment @ s_weights)
            sups = np.maximum(
                sups,
                [
                    float(np.abs(fields.value).max(initial=0.0)),
                    float(np.abs(fields.dx).max(initial=0.0)),
                    float(np.abs(fields.dy).max(initial=0.0)),
                ],
            )
    return sums, sups


def _richardson(fine: float, coarse: float) -> float:
    return (4.0 * fine - coarse) / 3.0


def integrate_surface(bump: BumpFunction) -> QuadratureResult:
    """Integral of phi against the flat area, as a sum over collar pieces and panels.

    Raises:
        QuadratureBudgetError: If the grid would exceed QUADRATURE_MAX_POINTS.
    """
    regions = _regions(bump)
    points = _check_budget(bump, regions)
    fine, _ = _tensor_sums(bump, regions, coarse=False)
    coarse, _ = _tensor_sums(bump, regions, coarse=True)
    value = _richardson(fine[0], coarse[0])
    logger.debug("Surface integral %.12g over %d points", value, points)
    return QuadratureResult(value=value, fine=fine[0], coarse=coarse[0], points=points)


def integrate_segment(bump: BumpFunction, segment: TracedSegment) -> QuadratureResult:
    """Integral of phi along a horizontal segment against |dx|.

    The horizontal line carrying the segment is searched for crossings with beta and
    the side panels up to the reach of the collar beyond both ends, and the preimage
    sum is integrated along the traveled part of the segment.

    Raises:
        CollarServiceError: If the segment is not horizontal.
        QuadratureBudgetError: If the segment needs more than QUADRATURE_MAX_POINTS cells.
    """
    dx, dy = segment.direction
    if abs(dy) > settings.ANGLE_EPSILON * 1e3 * math.hypot(dx, dy):
        error_msg = f"Segment direction {segment.direction} is not horizontal"
        raise CollarServiceError(error_msg)
    length = segment.traveled
    if length <= 0.0:
        return QuadratureResult(value=0.0, fine=0.0, coarse=0.0, points=0)
    collar = bump.collar
    cells = _cells(length, _step(bump))
    if cells > settings.QUADRATURE_MAX_POINTS:
        error_msg = f"Segment of length {length:.6g} needs {cells} quadrature cells"
        raise QuadratureBudgetError(error_msg)
    hits = horizontal_hits(collar, segment)
    reach = collar.reach
    sums = []
    for n in (cells, cells // 2):
        h = length / n
        x = (np.arange(n) + 0.5) * h
        values = np.zeros(n)
        for hit in hits:
            lo, hi = np.searchsorted(x, [hit.position - reach, hit.position + reach])
            if hi <= lo:
                continue
            s = collar_coordinates(collar, hit, x[lo:hi])
            values[lo:hi] += bump.pullback(hit.piece, hit.t, s, hit.panel)
        sums.append(float(values.sum() * h))
    fine, coarse = sums
    value = _richardson(fine, coarse)
    logger.debug("Segment integral %.12g from %d crossings", value, len(hits))
    return QuadratureResult(value=value, fine=fine, coarse=coarse, points=cells + cells // 2)


def sobolev_norm(bump: BumpFunction, *, cover_trivial: bool = False) -> SobolevNorm:
    """||phi||_0 + ||d_x phi||_0 + ||d_y phi||_0 on the orientation double cover.

    The three L2 norms are integrated in collar coordinates with the analytic chain-rule
    derivatives. Every point of the surface has two preimages on the double cover,
    connected or not, so the lifted norms are sqrt(2) times those on the surface.

    Raises:
        QuadratureBudgetError: If the grid would exceed QUADRATURE_MAX_POINTS.
    """
    regions = _regions(bump)
    _check_budget(bump, regions)
    fine, sups = _tensor_sums(bump, regions, coarse=False)
    coarse, _ = _tensor_sums(bump, regions, coarse=True)
    squares = [max(0.0, _richardson(f, c)) for f, c in zip(fine[1:], coarse[1:], strict=True)]
    l2, dx, dy = (math.sqrt(v) for v in squares)
    lift = math.sqrt(2.0)
    area = bump.collar.surface.area
    sup_value, sup_dx, sup_dy = (float(v) for v in sups)
    norm = SobolevNorm(
        value=lift * (l2 + dx + dy),
        l2=l2,
        dx=dx,
        dy=dy,
        sup_bound=math.sqrt(2.0 * area) * (sup_value + sup_dx + sup_dy),
        sup_value=sup_value,
        sup_dx=sup_dx,
        sup_dy=sup_dy,
        cover_trivial=cover_trivial,
    )
    logger.debug("Sobolev norm %.9g (sup bound %.9g)", norm.value, norm.sup_bound)
    return norm


class SandwichReport(BaseModel):
    """Integrals of the bumps of a collar against the vertical variation of beta.

    For a cylinder collar `lower` and `upper` both hold the integral of phi. Residuals are
    `target - lower` and `upper - target`, both non-negative when the bumps bracket the
    target. `norm` is the Sobolev norm of the lower bump, or of phi.
    """

    delta: float | None
    target: float
    lower: float
    upper: float
    lower_residual: float
    upper_residual: float
    difference: float
    norm: float
    sup_bound: float
    cover_trivial: bool


def sandwich_report(
    bumps: list[BumpFunction], target: float, *, cover_trivial: bool = False
) -> SandwichReport:
    """Compare the surface integrals of one bump, or a lower and upper pair, to `target`."""
    integrals = [integrate_surface(b).value for b in bumps]
    lower, upper = integrals[0], integrals[-1]
    norm = sobolev_norm(bumps[0], cover_trivial=cover_trivial)
    return SandwichReport(
        delta=bumps[0].delta,
        target=target,
        lower=lower,
        upper=upper,
        lower_residual=target - lower,
        upper_residual=upper - target,
        difference=upper - lower,
        norm=norm.value,
        sup_bound=norm.sup_bound,
        cover_trivial=cover_trivial,
    )
