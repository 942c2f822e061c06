"""The batch subcommand: one command run over a grid of parameters.

An experiment file names a command, its flags, a seed and an output path. List values
are swept and the rows of the Cartesian product run concurrently; the CSV keeps the
input order. A failing row is flagged in the `status` and `error` columns and the other
rows still run.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any
from uuid import uuid4

import pandas as pd
from asgi_correlation_id import correlation_id
from pandas import DataFrame

from src.controller.cli.commands.base import COMMANDS, Command, flag_keys, register
from src.controller.cli.schemas.params import BatchParams
from src.controller.errors.exception_manager import describe_exception
from src.controller.errors.exceptions import UsageError
from src.repository.files import load_experiment, write_csv
from src.repository.models.files import ExperimentFile

logger = logging.getLogger(__name__)

ROW_COLUMNS = ["row", "status", "error"]


def _run_row(command: Command, index: int, values: dict[str, Any], seed: int) -> DataFrame:
    correlation_id.set(uuid4().hex)
    logger.info("Batch row %d of '%s': %s", index, command.name, values)
    info = {"row": index, "status": "ok", "error": "", **values}
    params = flag_keys(values)
    if "seed" in command.params.model_fields:
        params.setdefault("seed", seed)
    try:
        frame = command.to_frame(command.handler(command.params.model_validate(params)))
    except Exception as error:
        logger.exception("Batch row %d failed", index)
        return pd.DataFrame([{**info, "status": "failed", "error": describe_exception(error)}])
    if frame.empty:
        return pd.DataFrame([info])
    frame = frame.drop(columns=[key for key in values if key in frame.columns])
    prefix = pd.DataFrame([info] * len(frame))
    return pd.concat([prefix, frame.reset_index(drop=True)], axis=1)


def run_experiment(experiment: ExperimentFile, workers: int) -> DataFrame:
    """Run every row of an experiment.

    Args:
        experiment (ExperimentFile): Command, swept parameters and seed.
        workers (int): Rows run concurrently.

    Raises:
        UsageError: If the command is unknown or is itself a batch.

    Returns:
        DataFrame: `row`, `status`, `error`, the parameters, then the command's columns.
    """
    command = COMMANDS.get(experiment.command)
    if command is None or command.name == "batch":
        error_msg = f"'{experiment.command}' cannot be run in a batch"
        raise UsageError(error_msg)
    grid = experiment.grid()
    columns = ROW_COLUMNS + list(experiment.parameters)
    logger.info("Batch of %d rows of '%s' on %d workers", len(grid), command.name, workers)
    if not grid:
        return pd.DataFrame(columns=columns + [c for c in command.columns if c not in columns])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        frames = list(
            pool.map(
                lambda item: _run_row(command, item[0], item[1], experiment.seed),
                enumerate(grid),
            )
        )
    result = pd.concat(frames, ignore_index=True)
    failed = int((result.drop_duplicates("row")["status"] == "failed").sum())
    if failed:
        logger.warning("%d of %d batch rows failed", failed, len(grid))
    return result.reindex(columns=columns + [c for c in result.columns if c not in columns])


def batch(params: BatchParams) -> DataFrame:
    experiment = load_experiment(params.config)
    frame = run_experiment(experiment, params.workers)
    if params.output is None and experiment.output is not None:
        write_csv(frame, experiment.output)
    return frame


register(
    Command(
        name="batch",
        help="Run a command over the parameter grid of an experiment file.",
        params=BatchParams,
        handler=batch,
        columns=ROW_COLUMNS,
    )
)
