"""Schemas of the key/value text files the command line reads.

Every file is a sequence of `key: JSON` lines. The parsed dictionary is validated by one of
the models below; NaN and infinities are rejected at parse time and again here.
"""

import itertools
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

HalfEdgeRef = tuple[int, int]
Vector = tuple[float, float]


class SurfaceFile(BaseModel):
    """Triangles as three counterclockwise edge vectors and the gluing list.

    Attributes:
        triangles (list): `[[x, y], [x, y], [x, y]]` per triangle.
        gluings (list): `[[t, e], [u, j], flip]` per glued pair of edges.
        name (str): Optional name used in logs and output rows.
    """

    model_config = ConfigDict(allow_inf_nan=False, extra="forbid")

    triangles: list[tuple[Vector, Vector, Vector]] = Field(min_length=1)
    gluings: list[tuple[HalfEdgeRef, HalfEdgeRef, bool]]
    name: str = ""


class CurveFile(BaseModel):
    """Cyclic word of half-edges crossed by a closed curve.

    Each entry `[t, e]` is the edge through which the curve leaves triangle t.
    """

    model_config = ConfigDict(allow_inf_nan=False, extra="forbid")

    curve: list[HalfEdgeRef] = Field(min_length=1)
    surface: str | None = None


class ExperimentFile(BaseModel):
    """Batch configuration: a command and its parameters.

    Keys other than `command`, `seed` and `output` are flag values of the command. A list
    value is swept, and the batch runs the Cartesian product of all swept keys.
    """

    model_config = ConfigDict(allow_inf_nan=False, extra="allow")

    command: str
    seed: int = 0
    output: str | None = None

    @field_validator("command")
    @classmethod
    def _strip(cls, value: str) -> str:
        return value.strip()

    @property
    def parameters(self) -> dict[str, Any]:
        return dict(self.model_extra or {})

    def grid(self) -> list[dict[str, Any]]:
        """One parameter dictionary per point of the swept grid, in row-major order."""
        params = self.parameters
        swept = [key for key, value in params.items() if isinstance(value, list)]
        fixed = {key: value for key, value in params.items() if key not in swept}
        rows = []
        for values in itertools.product(*(params[key] for key in swept)):
            rows.append({**fixed, **dict(zip(swept, values, strict=True))})
        return rows
