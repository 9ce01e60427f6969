from __future__ import annotations

import io
import json

import numpy as np
import pandas as pd
import pytest

import robustglm.features.sensitivity.commands as psc_commands
from robustglm.features.mt import pipeline
from robustglm.features.simulator.commands import scenario_from_args
from robustglm.main import create_parser, main


@pytest.fixture
def csv_path(tmp_path, clean_data):
    frame = pd.DataFrame({"y": clean_data.y, "x1": clean_data.X[:, 1], "x2": clean_data.X[:, 2]})
    path = tmp_path / "counts.csv"
    frame.to_csv(path, index=False)
    return path


def _write(tmp_path, name, frame):
    path = tmp_path / name
    frame.to_csv(path, index=False)
    return path


def test_fit_lst_writes_a_document(csv_path, capsys):
    code = main(["fit", "--data", str(csv_path), "--response", "y", "--estimator", "lst"])
    out = capsys.readouterr().out
    assert code == 0
    doc = json.loads(out)
    assert doc["estimator"] == "lst"
    assert list(doc["coefficients"]) == ["(Intercept)", "x1", "x2"]
    assert doc["n"] == 200 and doc["p"] == 3
    assert "timings" not in doc["telemetry"]


def test_fit_ml_without_finite_maximiser_exits_2(tmp_path, capsys):
    path = _write(tmp_path, "zeros.csv", pd.DataFrame({"y": [0] * 12, "x": np.linspace(-1, 1, 12)}))
    assert main(["fit", "--data", str(path), "--response", "y", "--estimator", "ml"]) == 2
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize(
    "extra",
    [
        ["--response", "missing"],
        ["--response", "y", "--bogus"],
        ["--response", "y", "--estimator", "best"],
        ["--response", "y", "--alpha", "0.7"],
    ],
)
def test_bad_input_exits_1(csv_path, extra):
    assert main(["fit", "--data", str(csv_path), *extra]) == 1


def test_negative_response_exits_1(tmp_path):
    path = _write(tmp_path, "neg.csv", pd.DataFrame({"y": [1, -2, 3], "x": [0.1, 0.2, 0.3]}))
    assert main(["fit", "--data", str(path), "--response", "y"]) == 1


def test_missing_file_exits_1(tmp_path):
    assert main(["fit", "--data", str(tmp_path / "nope.csv"), "--response", "y"]) == 1


def test_smt_output_is_byte_identical_for_a_seed(csv_path, capsys):
    args = ["fit", "--data", str(csv_path), "--response", "y", "--estimator", "smt", "--seed", "7", "--subsamples", "50"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_fmt_output_does_not_depend_on_threads(csv_path, tmp_path):
    outputs = []
    for threads in ("1", "3"):
        out = tmp_path / f"fit-{threads}.json"
        args = ["fit", "--data", str(csv_path), "--response", "y", "--threads", threads, "--output", str(out)]
        assert main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_psc_table(csv_path, capsys):
    assert main(["psc", "--data", str(csv_path), "--response", "y"]) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == [
        "index", "e_i", "z_1", "z_2", "z_3", "flagged_1", "flagged_2", "flagged_3", "flagged",
    ]
    assert len(frame) == 200
    assert set(frame["flagged"].unique()) <= {0, 1}


def test_psc_component_count(csv_path, capsys):
    assert main(["psc", "--data", str(csv_path), "--response", "y", "--components", "1"]) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert "z_1" in frame.columns and "z_2" not in frame.columns


def test_simulate_small_grid(capsys):
    args = ["simulate", "--n", "60", "--p", "3", "--reps", "2", "--y0-grid", "0:20:10", "--subsamples", "20"]
    assert main(args) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert len(frame) == 6
    assert set(frame["estimator"]) == {"fmt", "ml"}
    assert frame["mean_time_s"].isna().all()


def test_simulate_clean(capsys):
    assert main(["simulate", "--n", "60", "--p", "3", "--reps", "2", "--eps", "0"]) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert len(frame) == 2
    assert frame["y0"].isna().all()


@pytest.mark.parametrize("grid", ["1:2", "5:1:1", "0:10:0", "a:b:c"])
def test_simulate_rejects_bad_grid(grid):
    assert main(["simulate", "--y0-grid", grid]) == 1


def test_simulate_with_timings_adds_the_p90_column(capsys):
    args = ["simulate", "--n", "60", "--p", "3", "--reps", "3", "--y0-grid", "0:0:1", "--estimators", "ml", "--timings"]
    assert main(args) == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns)[-1] == "p90_time_s"
    assert (frame["p90_time_s"] > 0).all()
    assert (frame["mean_time_s"] > 0).all()


@pytest.mark.parametrize("flag", ["--paper-scale", "--full-scale"])
def test_large_scale_flag_keeps_explicit_sizes(flag):
    args = create_parser().parse_args(["simulate", flag, "--reps", "2"])
    sc = scenario_from_args(args)
    assert (sc.n, sc.p, sc.reps) == (1000, 100, 2)


def test_large_scale_flag_sets_every_size():
    sc = scenario_from_args(create_parser().parse_args(["simulate", "--paper-scale"]))
    assert (sc.n, sc.p, sc.reps) == (1000, 100, 1000)


def test_help_and_version(capsys):
    assert main(["--help"]) == 0
    assert main(["--version"]) == 0
    assert "robustglm" in capsys.readouterr().out


def test_command_is_required():
    assert main([]) == 1


def test_thread_cap_reaches_table_builds(csv_path, monkeypatch, capsys):
    seen = []

    def spying(real):
        def spy(*args, **kwargs):
            seen.append(kwargs.get("threads"))
            return real(*args, **kwargs)

        return spy

    monkeypatch.setattr(pipeline, "get_m_table", spying(pipeline.get_m_table))
    monkeypatch.setattr(psc_commands, "get_m_table", spying(psc_commands.get_m_table))
    assert main(["fit", "--data", str(csv_path), "--response", "y", "--estimator", "lst", "--threads", "1"]) == 0
    assert main(["psc", "--data", str(csv_path), "--response", "y", "--threads", "1"]) == 0
    assert seen == [1, 1, 1]
