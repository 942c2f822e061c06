from __future__ import annotations

import io
import math

import pandas as pd
import pytest

from src.app import main, run_command
from src.controller.errors.exception_mapper import (
    EXIT_DOMAIN_ERROR,
    EXIT_OK,
    EXIT_USAGE_ERROR,
)


def _write_experiment(tmp_path, body: str):
    path = tmp_path / "grid.exp"
    path.write_text(body, encoding="utf-8")
    return str(path)


def _read_csv(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text))


def test_intersect_prints_the_certified_interval(capsys):
    code = main(["intersect", "torus_h", "torus_23"])

    assert code == EXIT_OK
    assert capsys.readouterr().out == "I=3 n=0 m=0 interval=[3,3]\n"


def test_unknown_command_is_a_usage_error(capsys):
    code = main(["wobble"])

    assert code == EXIT_USAGE_ERROR
    assert "error=UsageError" in capsys.readouterr().err


def test_out_of_range_flag_is_a_usage_error(capsys):
    code = main(["saddles", "--surface", "torus", "--max-length", "-1"])

    assert code == EXIT_USAGE_ERROR
    assert "error=ValidationError" in capsys.readouterr().err


def test_missing_surface_is_a_domain_error(capsys):
    code = main(["intersect", "torus_h", "torus_23", "--surface", "no_such_surface"])

    assert code == EXIT_DOMAIN_ERROR
    assert capsys.readouterr().out == ""


def test_saddles_lists_the_unit_connections():
    frame = _read_csv(run_command(["saddles", "--surface", "torus", "--max-length", "1.1"]))

    assert len(frame) == 6
    assert frame["length"].tolist() == pytest.approx([1.0] * 6)


def test_traintrack_convexity_table():
    argv = ["traintrack", "--surface", "torus", "--table", "convexity", "--curve", "torus_23"]

    frame = _read_csv(run_command([*argv, "--pairs", "2", "--seed", "0"]))

    assert len(frame) == 2
    assert not frame["violated"].any()
    assert (frame["at_sum_lo"] <= frame["at_v_hi"] + frame["at_w_hi"]).all()


def test_traintrack_convexity_needs_a_curve(capsys):
    code = main(["traintrack", "--surface", "torus", "--table", "convexity"])

    assert code == EXIT_USAGE_ERROR
    assert "needs --curve" in capsys.readouterr().err


def test_estimate_on_the_torus_has_no_residual():
    text = run_command(
        [
            "estimate",
            "--qs",
            "torus",
            "--r",
            repr(math.log(3.0)),
            "--alpha",
            "torus_h",
            "--beta",
            "torus_13",
        ]
    )
    row = _read_csv(text).iloc[0]

    assert row["predicted"] == pytest.approx(3.0)
    assert (row["actual_lo"], row["actual_hi"]) == (3, 3)
    assert row["residual"] == pytest.approx(0.0, abs=1e-9)


def test_output_flag_writes_the_csv_instead_of_printing(tmp_path):
    target = tmp_path / "out" / "bounds.csv"

    text = run_command(["intersect", "torus_h", "torus_v", "--output", str(target)])

    assert text == ""
    assert _read_csv(target.read_text(encoding="utf-8"))["I"].tolist() == [1]


def test_batch_over_an_empty_sweep_writes_only_the_header(tmp_path):
    config = _write_experiment(
        tmp_path,
        'command: "intersect"\nalpha: "torus_h"\nbeta: "torus_23"\nsurface: []\n',
    )

    text = run_command(["batch", "--config", config])

    header = text.strip().split(",")
    assert text.count("\n") == 1
    assert header[:3] == ["row", "status", "error"]
    assert {"surface", "I", "lower", "upper"} <= set(header)


def test_batch_flags_a_failing_row_and_runs_the_rest(tmp_path):
    config = _write_experiment(
        tmp_path,
        "\n".join(
            [
                "# one good surface, one missing",
                'command: "intersect"',
                'alpha: "torus_h"',
                'beta: "torus_23"',
                'surface: ["torus", "no_such_surface", "torus"]',
            ]
        ),
    )

    frame = _read_csv(run_command(["batch", "--config", config, "--workers", "2"]))

    assert frame["row"].tolist() == [0, 1, 2]
    assert frame["status"].tolist() == ["ok", "failed", "ok"]
    assert frame.loc[1, "error"].startswith("error=SurfaceFileNotFoundError")
    assert frame.loc[frame["status"] == "ok", "I"].tolist() == [3, 3]


def test_batch_rejects_unknown_commands(tmp_path, capsys):
    config = _write_experiment(tmp_path, 'command: "wobble"\n')

    assert main(["batch", "--config", config]) == EXIT_USAGE_ERROR
    assert "cannot be run in a batch" in capsys.readouterr().err
