"""Period coordinates of a triangulation and perturbation probes built on them."""

import logging
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel

from src.core.config import settings
from src.service.exceptions import RankDeficientError
from src.service.surface.domain.delaunay import Triangulation
from src.service.surface.domain.saddle import ell_min
from src.service.surface.domain.surface_core import HalfTranslationSurface

logger = logging.getLogger(__name__)


def _edge_signs(surface: HalfTranslationSurface) -> tuple[np.ndarray, np.ndarray]:
    """Edge id of every half-edge and the sign relating its vector to the representative."""
    ids = surface.edge_ids()
    signs = np.ones((surface.n_triangles, 3))
    for index, (t, k) in enumerate(surface.edge_representatives()):
        u, j, sigma = surface.glue(t, k)
        if (u, j) != (t, k) and ids[u, j] == index:
            signs[u, j] = 1.0 if sigma == -1 else -1.0
    return ids, signs


def constraint_matrix(surface: HalfTranslationSurface, basis: list[int]) -> np.ndarray:
    """Triangle closure rows followed by one selection row per basis edge."""
    ids, signs = _edge_signs(surface)
    rows = np.zeros((surface.n_triangles + len(basis), surface.n_edges))
    for t in range(surface.n_triangles):
        for k in range(3):
            rows[t, ids[t, k]] += signs[t, k]
    for i, edge in enumerate(basis):
        rows[surface.n_triangles + i, edge] = 1.0
    return rows


def _check_rank(surface: HalfTranslationSurface, basis: list[int]) -> np.ndarray:
    if any(not 0 <= edge < surface.n_edges for edge in basis):
        error_msg = f"Basis {basis} refers to missing edges"
        raise RankDeficientError(error_msg)
    matrix = constraint_matrix(surface, basis)
    rank = np.linalg.matrix_rank(matrix)
    if rank < surface.n_edges:
        error_msg = (
            f"Basis {basis} determines a rank {rank} system, {surface.n_edges} edges needed"
        )
        raise RankDeficientError(error_msg)
    return matrix


def default_basis(triangulation: Triangulation) -> list[int]:
    """Greedy edge selection that determines every other edge."""
    surface = triangulation.surface
    basis: list[int] = []
    rank = np.linalg.matrix_rank(constraint_matrix(surface, []))
    for edge in range(surface.n_edges):
        candidate = np.linalg.matrix_rank(constraint_matrix(surface, [*basis, edge]))
        if candidate > rank:
            basis.append(edge)
            rank = candidate
        if rank == surface.n_edges:
            break
    return basis


def period_vector(
    triangulation: Triangulation, basis: list[int]
) -> list[tuple[float, float]]:
    """Holonomies of the basis edges in basis order.

    Raises:
        RankDeficientError: If the basis edges do not determine all others.
    """
    surface = triangulation.surface
    _check_rank(surface, basis)
    reps = surface.edge_representatives()
    return [tuple(float(x) for x in surface.edges[reps[edge]]) for edge in basis]


def rebuild_from_periods(
    triangulation: Triangulation,
    basis: list[int],
    periods: list[tuple[float, float]] | np.ndarray,
) -> HalfTranslationSurface:
    """Surface with the combinatorics of `triangulation` and the given basis holonomies.

    Raises:
        RankDeficientError: If the basis edges do not determine all others.
        DegenerateTriangleError: If a rebuilt triangle has non-positive area.
    """
    surface = triangulation.surface
    matrix = _check_rank(surface, basis)
    ids, signs = _edge_signs(surface)
    target = np.zeros((matrix.shape[0], 2))
    target[surface.n_triangles :] = np.asarray(periods, dtype=float).reshape(-1, 2)
    solution, *_ = np.linalg.lstsq(matrix, target, rcond=None)
    edges = signs[..., None] * solution[ids]
    return HalfTranslationSurface(
        edges,
        surface.partners,
        surface.flips,
        vertex_labels=surface.vertex_of_corner,
        references=surface.references,
        name=surface.name,
    )


class LipschitzProbe(BaseModel):
    """Largest |f(perturbed) - f(base)| / h per perturbation scale h."""

    scales: list[float]
    constants: list[float]
    base_value: float
    samples: int
    seed: int

    @property
    def stability(self) -> float:
        """Ratio of the largest to the smallest fitted constant."""
        low = min(self.constants)
        return float("inf") if low == 0.0 else max(self.constants) / low

    def is_stable(self, tolerance: float = 0.25) -> bool:
        return self.stability <= 1.0 + tolerance or max(self.constants) == 0.0


def perturbation_probe(
    triangulation: Triangulation,
    functional: Callable[[HalfTranslationSurface], float],
    *,
    scales: tuple[float, ...] = (1e-4, 1e-5),
    samples: int = 100,
    seed: int | None = None,
    basis: list[int] | None = None,
) -> LipschitzProbe:
    """Fit a Lipschitz constant of a functional along random period perturbations.

    Every scale uses the same seeded unit directions, so the constants are comparable.
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    basis = default_basis(triangulation) if basis is None else basis
    periods = np.array(period_vector(triangulation, basis))
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(samples, *periods.shape))
    directions /= np.linalg.norm(directions.reshape(samples, -1), axis=1)[:, None, None]
    base = functional(triangulation.surface)
    constants = []
    for h in scales:
        worst = 0.0
        for direction in directions:
            perturbed = rebuild_from_periods(triangulation, basis, periods + h * direction)
            worst = max(worst, abs(functional(perturbed) - base) / h)
        constants.append(worst)
        logger.debug("Perturbation scale %.1e: fitted constant %.6g", h, worst)
    return LipschitzProbe(
        scales=list(scales), constants=constants, base_value=base, samples=samples, seed=seed
    )


def ell_min_lipschitz_probe(
    triangulation: Triangulation,
    *,
    scales: tuple[float, ...] = (1e-4, 1e-5),
    samples: int = 100,
    seed: int | None = None,
) -> LipschitzProbe:
    return perturbation_probe(triangulation, ell_min, scales=scales, samples=samples, seed=seed)
