"""The GL+(2, R) action on half-translation surfaces."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.config import settings
from src.service.exceptions import SingularMatrixError
from src.service.surface.domain.surface_core import (
    HalfTranslationSurface,
    VertexReference,
    ccw_angle,
    rotate,
)

logger = logging.getLogger(__name__)


class PlanarMatrix(BaseModel):
    """Real 2x2 matrix [[a, b], [c, d]]."""

    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_array(cls, array: np.ndarray) -> "PlanarMatrix":
        return cls(a=array[0, 0], b=array[0, 1], c=array[1, 0], d=array[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "PlanarMatrix") -> "PlanarMatrix":
        return PlanarMatrix.from_array(self.as_array() @ other.as_array())

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.as_array() @ np.asarray(vector, dtype=float)


def flow_matrix(t: float) -> PlanarMatrix:
    """Teichmueller flow a_t = diag(e^t, e^-t)."""
    return PlanarMatrix(a=math.exp(t), b=0.0, c=0.0, d=math.exp(-t))


def rotation_matrix(theta: float) -> PlanarMatrix:
    """Counterclockwise rotation r_theta."""
    c, s = math.cos(theta), math.sin(theta)
    return PlanarMatrix(a=c, b=-s, c=s, d=c)


def apply_matrix(surface: HalfTranslationSurface, matrix: PlanarMatrix) -> HalfTranslationSurface:
    """Post-compose every chart with a linear map.

    Gluing combinatorics, vertex labels and germ references are carried over, so
    outgoing directions at cone points keep their identity.

    Args:
        surface (HalfTranslationSurface): Surface to deform.
        matrix (PlanarMatrix): Matrix with positive determinant.

    Returns:
        HalfTranslationSurface: The deformed surface.

    Raises:
        SingularMatrixError: If det(matrix) <= GEOMETRY_EPSILON.
    """
    if matrix.det <= settings.GEOMETRY_EPSILON:
        error_msg = f"Matrix with determinant {matrix.det:.6g} cannot act on a surface"
        raise SingularMatrixError(error_msg)
    m = matrix.as_array()
    edges = np.einsum("ij,tkj->tki", m, surface.edges)
    references = []
    for ref in surface.references:
        edge = surface.edges[ref.triangle, ref.corner]
        direction = rotate(edge, ref.angle)
        references.append(
            VertexReference(
                ref.triangle,
                ref.corner,
                ccw_angle(m @ edge, m @ direction) if ref.angle > 0.0 else 0.0,
            )
        )
    return surface.with_edges(edges, references)


def flow(surface: HalfTranslationSurface, t: float) -> HalfTranslationSurface:
    return apply_matrix(surface, flow_matrix(t))


def negate_differential(surface: HalfTranslationSurface) -> HalfTranslationSurface:
    """The surface of -q, which is r_{pi/2} applied to q."""
    return apply_matrix(surface, rotation_matrix(math.pi / 2.0))
