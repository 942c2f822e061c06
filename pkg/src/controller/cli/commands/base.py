"""Registry of subcommands and helpers shared by their handlers."""

import argparse
import logging
from collections.abc import Callable
from typing import Any, Literal, get_args, get_origin

from pandas import DataFrame
from pydantic import BaseModel, ConfigDict

from src.controller.cli.schemas.params import CommandParams
from src.controller.errors.exceptions import UsageError
from src.repository.files import load_curve
from src.service.geodesic.domain.curves import CurveClass
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.surface.service import SurfaceService

logger = logging.getLogger(__name__)


def _identity(result: Any) -> DataFrame:
    return result


class Command(BaseModel):
    """A subcommand: its flags, handler and the way its result is rendered.

    Attributes:
        name (str): Subcommand name.
        help (str): One line shown by --help.
        params (type[CommandParams]): Flags and their validation.
        handler (Callable): Runs the command on validated parameters.
        to_frame (Callable): Turns the handler result into CSV rows.
        to_text (Callable | None): Text printed instead of CSV on stdout.
        columns (list[str]): Result columns, used for header-only batch output.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    help: str
    params: type[CommandParams]
    handler: Callable[[Any], Any]
    to_frame: Callable[[Any], DataFrame] = _identity
    to_text: Callable[[Any], str] | None = None
    columns: list[str] = []


COMMANDS: dict[str, Command] = {}


def register(command: Command) -> Command:
    COMMANDS[command.name] = command
    return command


def add_arguments(parser: argparse.ArgumentParser, params: type[BaseModel]) -> None:
    """Declare one argument per field of a parameter model.

    Values stay strings; pydantic converts and checks them. Unset flags are left out
    of the namespace so the model defaults apply.
    """
    for name, field in params.model_fields.items():
        extra = field.json_schema_extra if isinstance(field.json_schema_extra, dict) else {}
        if extra.get("positional"):
            parser.add_argument(name, help=field.description)
            continue
        kwargs: dict[str, Any] = {"dest": name, "help": field.description}
        annotation = field.annotation
        if annotation is bool:
            kwargs["action"] = argparse.BooleanOptionalAction
        elif get_origin(annotation) is list:
            kwargs["nargs"] = "+"
        elif get_origin(annotation) is Literal:
            kwargs["choices"] = [str(choice) for choice in get_args(annotation)]
        parser.add_argument(f"--{name.replace('_', '-')}", default=argparse.SUPPRESS, **kwargs)


def flag_keys(values: dict[str, Any]) -> dict[str, Any]:
    """Config keys written like flags (`max-length`) as field names (`max_length`)."""
    return {key.lstrip("-").replace("-", "_"): value for key, value in values.items()}


def open_surface(
    name: str, *, theta: float = 0.0, t: float = 0.0, normalize: bool = False
) -> HalfTranslationSurface:
    surface = SurfaceService.load(name)
    if normalize:
        surface = SurfaceService.normalize(surface)
    if theta or t:
        surface = SurfaceService.transform(surface, t=t, theta=theta)
    return surface


def surface_of_curve(curve: str, surface: str | None) -> str:
    """The surface named on the command line, or the one the curve file was written for.

    Raises:
        UsageError: If neither names a surface.
    """
    if surface is not None:
        return surface
    written_for = load_curve(curve).surface
    if not written_for:
        error_msg = f"Curve '{curve}' does not name its surface; pass --surface"
        raise UsageError(error_msg)
    return written_for


def open_curve(
    params: CommandParams, curve: str | None = None
) -> tuple[HalfTranslationSurface, CurveClass]:
    """Surface and validated curve of the parameters of a curve command."""
    curve = getattr(params, "curve", None) if curve is None else curve
    surface = open_surface(
        surface_of_curve(curve, getattr(params, "surface", None)),
        theta=getattr(params, "theta", 0.0),
        t=getattr(params, "t", 0.0),
        normalize=getattr(params, "normalize", False),
    )
    return surface, GeodesicService.load_curve(surface, curve)
