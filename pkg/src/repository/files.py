"""Reading `key: JSON` text files and writing CSV results.

A file is a sequence of lines `key: value` where the value is JSON and may span several
lines; a new entry starts at a line whose first token is an identifier followed by a
colon. Lines starting with `#` are comments.
"""

import logging
import re
from pathlib import Path
from typing import TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError
from pydantic_core import from_json

from src.repository.exceptions import MalformedFileError, SurfaceFileNotFoundError
from src.repository.models.files import CurveFile, ExperimentFile, SurfaceFile

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).parent / "fixtures"
FLOAT_FORMAT = "%.12g"

_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)$")

FileModel = TypeVar("FileModel", bound=BaseModel)


def resolve_path(name: str | Path, suffix: str) -> Path:
    """Path of a file, falling back to the shipped fixtures for bare names.

    Args:
        name (str | Path): A path, or a fixture name such as `torus` or `l3_vertical`.
        suffix (str): Extension tried for fixture names, e.g. `.surf`.

    Raises:
        SurfaceFileNotFoundError: If neither the path nor the fixture exists.
    """
    path = Path(name)
    if path.is_file():
        return path
    for candidate in (FIXTURES_DIR / path.name, FIXTURES_DIR / f"{path.name}{suffix}"):
        if candidate.is_file():
            return candidate
    error_msg = f"File '{name}' not found"
    raise SurfaceFileNotFoundError(error_msg)


def parse_key_values(text: str) -> dict:
    """Parse the `key: JSON` format into a dictionary.

    Raises:
        MalformedFileError: On duplicated keys, text outside an entry, or invalid JSON.
    """
    entries: dict[str, list[str]] = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _KEY.match(line)
        if match and not line.startswith(("[", "{", '"')):
            current = match.group(1)
            if current in entries:
                error_msg = f"Key '{current}' appears twice (line {number})"
                raise MalformedFileError(error_msg)
            entries[current] = [match.group(2)]
        elif current is None:
            error_msg = f"Line {number} does not start with a key: {line!r}"
            raise MalformedFileError(error_msg)
        else:
            entries[current].append(line)
    parsed = {}
    for key, chunks in entries.items():
        value = " ".join(chunks).strip()
        try:
            parsed[key] = from_json(value, allow_inf_nan=False)
        except ValueError as error:
            error_msg = f"Value of '{key}' is not valid JSON: {error}"
            raise MalformedFileError(error_msg) from error
    return parsed


def _load(name: str | Path, suffix: str, model: type[FileModel]) -> FileModel:
    path = resolve_path(name, suffix)
    logger.debug("Reading %s as %s", path, model.__name__)
    try:
        return model.model_validate(parse_key_values(path.read_text(encoding="utf-8")))
    except ValidationError as error:
        error_msg = f"{path} does not match the {model.__name__} schema: {error}"
        logger.exception(error_msg)
        raise MalformedFileError(error_msg) from error


def load_surface(name: str | Path) -> SurfaceFile:
    return _load(name, ".surf", SurfaceFile)


def load_curve(name: str | Path) -> CurveFile:
    return _load(name, ".curve", CurveFile)


def load_experiment(name: str | Path) -> ExperimentFile:
    return _load(name, ".exp", ExperimentFile)


def dump_surface(surface_file: SurfaceFile) -> str:
    """Serialise a surface file back to the `key: JSON` format."""
    lines = [f"name: {from_json_dump(surface_file.name)}"] if surface_file.name else []
    triangles = ",\n  ".join(
        "[" + ", ".join(f"[{x!r}, {y!r}]" for x, y in triangle) + "]"
        for triangle in surface_file.triangles
    )
    gluings = ",\n  ".join(
        f"[[{a[0]}, {a[1]}], [{b[0]}, {b[1]}], {'true' if flip else 'false'}]"
        for a, b, flip in surface_file.gluings
    )
    lines.append(f"triangles: [\n  {triangles}\n]")
    lines.append(f"gluings: [\n  {gluings}\n]")
    return "\n".join(lines) + "\n"


def from_json_dump(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_csv(frame: pd.DataFrame, output: str | Path | None) -> str:
    """Render a DataFrame as CSV, writing it to `output` when given.

    Returns:
        str: The CSV text.
    """
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if output is not None:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Wrote %d rows to %s", len(frame), path)
    return text
