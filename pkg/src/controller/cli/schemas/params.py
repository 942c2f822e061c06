"""Parameter schemas of the subcommands.

Every model field is one flag of the command line, named after the field with dashes
(`max_length` is `--max-length`), or a positional argument when marked `positional`. The
same models validate the rows of a batch configuration, so a config file mirrors the
flag names.
"""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.config import settings

POSITIONAL = {"positional": True}


class CommandParams(BaseModel):
    """Flags shared by every command."""

    model_config = ConfigDict(allow_inf_nan=False, extra="forbid")

    output: str | None = Field(None, description="Write the CSV to this path.")


class SurfaceParams(CommandParams):
    """A surface, optionally rotated by theta and then flowed for time t."""

    surface: str = Field(description="Surface file or fixture name.", examples=["torus"])
    theta: float = Field(0.0, description="Rotation angle in radians.")
    t: float = Field(0.0, description="Teichmueller flow time applied after the rotation.")
    normalize: bool = Field(False, description="Rescale the surface to unit area.")


class CurveParams(CommandParams):
    """A curve file, read on the surface it names unless --surface is given."""

    curve: str = Field(description="Curve file or fixture name.", json_schema_extra=POSITIONAL)
    surface: str | None = Field(None, description="Surface file or fixture name.")
    theta: float = Field(0.0, description="Rotation angle in radians.")
    t: float = Field(0.0, description="Teichmueller flow time applied after the rotation.")
    normalize: bool = Field(False, description="Rescale the surface to unit area.")


class BuildParams(SurfaceParams):
    surface: str = Field(description="Surface file or fixture name.", json_schema_extra=POSITIONAL)
    table: Literal["summary", "singularities", "delaunay"] = Field(
        "summary", description="What to print about the surface."
    )


class SaddlesParams(SurfaceParams):
    max_length: float = Field(gt=0.0, description="Longest saddle connection to list.")
    budget: int | None = Field(None, gt=0, description="Node budget of the developed search.")


class TightenParams(CurveParams):
    table: Literal["geodesic", "connections"] = Field(
        "geodesic", description="Geodesic statistics or its saddle connections."
    )


class IntersectParams(CommandParams):
    alpha: str = Field(description="First curve.", json_schema_extra=POSITIONAL)
    beta: str = Field(description="Second curve.", json_schema_extra=POSITIONAL)
    surface: str | None = Field(None, description="Surface file or fixture name.")
    theta: float = Field(0.0, description="Rotation angle in radians.")
    t: float = Field(0.0, description="Teichmueller flow time applied after the rotation.")


class RectdecompParams(CurveParams):
    check_embedding: bool = Field(False, description="Verify every rectangle is embedded.")


class CollarParams(CurveParams):
    delta: float | None = Field(None, gt=0.0, description="Taper length of the bump.")
    side: int = Field(0, ge=0, le=1, description="0 for the lower bump, 1 for the upper.")
    table: Literal["report", "pieces"] = Field(
        "report", description="Integrals and norm, or the pieces of the collar."
    )


class EquidistParams(SurfaceParams):
    """Horizontal segments of length A e^T against the bump of a curve's collar."""

    normalize: bool = Field(True, description="Rescale the surface to unit area.")
    T: list[float] = Field(min_length=1, description="Flow horizons.")
    A: float = Field(1.0, gt=0.0, description="Scale of the segment length.")
    curve: str = Field(description="Curve whose collar carries the bump.")
    delta: float | None = Field(None, gt=0.0, description="Taper length of the bump.")
    side: int = Field(0, ge=0, le=1, description="0 for the lower bump, 1 for the upper.")
    starts: int = Field(1, ge=1, description="Number of random starting points.")
    seed: int = Field(settings.DEFAULT_SEED, description="Seed of the starting points.")

    @field_validator("T", mode="before")
    @classmethod
    def _as_list(cls, value: Any) -> Any:
        return value if isinstance(value, list | tuple) else [value]

    @field_validator("T")
    @classmethod
    def _non_negative(cls, value: list[float]) -> list[float]:
        if any(horizon < 0.0 for horizon in value):
            error_msg = "horizons must be non-negative"
            raise ValueError(error_msg)
        return value


class EstimateParams(CommandParams):
    qs: str = Field(description="Starting surface q_s.")
    r: float = Field(gt=0.0, description="Flow time between q_s and q_e.")
    alpha: str = Field(description="Curve measured against Re q_s.")
    beta: str = Field(description="Curve measured against Im q_e.")
    theta: float = Field(0.0, description="Rotation of q_s in radians.")
    seed: int = Field(settings.DEFAULT_SEED, description="Recorded in the output row.")


class ItineraryParams(CommandParams):
    """Itinerary of one orbit, or the sampler checked on synthetic traces."""

    surface: str | None = Field(None, description="Surface whose orbit is sampled.")
    synthetic: int | None = Field(None, ge=1, description="Number of synthetic traces.")
    theta: float = Field(0.0, description="Rotation angle in radians.")
    T: float = Field(gt=0.0, description="Horizon.")
    rho: float = Field(gt=0.0, lt=1.0, description="First sample at rho T.")
    epsilon: float = Field(gt=0.0, description="Relative spacing bound.")
    s: float = Field(gt=0.0, description="Minimal spacing and enlargement time.")
    dt: float = Field(settings.ORBIT_TIME_STEP, gt=0.0, description="Trace time step.")
    delta: float = Field(0.1, gt=0.0, description="K is {ell_min >= delta}.")
    max_outside: float | None = Field(
        None, ge=0.0, description="Time outside K of synthetic traces, rho epsilon T - 2 dt."
    )
    seed: int = Field(settings.DEFAULT_SEED, description="Seed of the synthetic traces.")


class TraintrackParams(SurfaceParams):
    """Dual train track, or the convexity probe of a curve against its carried measures."""

    delaunay: bool = Field(False, description="Use the Delaunay triangulation.")
    table: Literal["branches", "switches", "convexity"] = Field(
        "branches", description="Branch weights, the switch table or the convexity probe."
    )
    curve: str | None = Field(None, description="Curve alpha of the convexity probe.")
    pairs: int = Field(10, ge=1, description="Random measure pairs of the convexity probe.")
    seed: int = Field(settings.DEFAULT_SEED, description="Seed of the measure pairs.")


class BatchParams(CommandParams):
    config: str = Field(description="Experiment file.")
    workers: int = Field(settings.BATCH_WORKERS, ge=1, description="Rows run concurrently.")
