"""Subcommands; importing a module registers its commands."""

from src.controller.cli.commands import (
    batch,
    collar,
    ergodic,
    geodesic,
    surface,
    traintrack,
)
from src.controller.cli.commands.base import COMMANDS

__all__ = ["COMMANDS", "batch", "collar", "ergodic", "geodesic", "surface", "traintrack"]
