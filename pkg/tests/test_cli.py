import os

import pandas as pd
import pytest

from app.import_utils import save_dataset, save_model, save_scenario
from app.simulate import generate_dataset
import cli
from cli import EXIT_CONFIG, EXIT_FIT, EXIT_IO, EXIT_OK, EXIT_UNEXPECTED, build_parser, main
from tests.utils import constant_scenario, make_dataset, make_model, write_csv

GRID = [0, 2, 4, 6, 8, 10, 12, 14, 16]


@pytest.fixture
def scenario_file(tmp_path):
    path = str(tmp_path / "scenario.json")
    save_scenario(constant_scenario([3.0, 15.0], 0.5, 40, seed=5), path)
    return path


@pytest.fixture
def model_file(tmp_path):
    path = str(tmp_path / "model.json")
    save_model(make_model(GRID, [[3.0], [5.0], [9.0]]), path)
    return path


def test_parser_defaults():
    args = build_parser().parse_args(["scan", "--data", "data.csv"])
    assert args.seed is None
    assert args.out_dir == "out"
    assert args.segments == 1000
    assert args.degree == 3
    assert args.min_groups == 2
    assert args.max_groups == 10


def test_simulate(tmp_path, scenario_file):
    out = str(tmp_path / "out")
    assert main(["simulate", "--spec", scenario_file, "--out-dir", out]) == EXIT_OK

    data = pd.read_csv(os.path.join(out, "data.csv"))
    assert list(data.columns) == ["id", "time", "score"]
    assert len(data) == 40 * 9
    assert os.path.exists(os.path.join(out, "labels.csv"))
    assert os.path.exists(os.path.join(out, "run_metadata.json"))


def test_fit_then_abt(tmp_path, scenario_file):
    out = str(tmp_path / "out")
    assert main(["simulate", "--spec", scenario_file, "--out-dir", out]) == EXIT_OK
    data = os.path.join(out, "data.csv")

    assert (
        main(["fit", "--data", data, "--groups", "2", "--degree", "0", "--out-dir", out])
        == EXIT_OK
    )
    assert os.path.exists(os.path.join(out, "model.json"))

    model = os.path.join(out, "model.json")
    assert main(["abt", "--model", model, "--pair", "2,1", "--out-dir", out]) == EXIT_OK
    abt = pd.read_csv(os.path.join(out, "abt.csv"), dtype=str)
    assert list(abt.columns) == ["interval_start", "interval_end", "area"]
    assert len(abt) == 9
    assert abt["interval_start"].iloc[-1] == "total"
    # groups near 3 and 15 over 16 weeks
    assert float(abt["area"].iloc[-1]) == pytest.approx(12 * 16, rel=0.05)

    args = ["abt", "--model", model, "--data", data, "--individual", "1", "--group", "1"]
    assert main(args + ["--out", "ind.csv", "--out-dir", out]) == EXIT_OK
    assert len(pd.read_csv(os.path.join(out, "ind.csv"))) == 9


def test_dist(tmp_path, model_file):
    out = str(tmp_path / "out")
    assert main(["dist", "--model", model_file, "--out-dir", out]) == EXIT_OK
    dist = pd.read_csv(os.path.join(out, "dist.csv"), dtype=str)
    assert list(dist.columns) == ["pair", "interval", "area"]
    assert len(dist) == 3 * 8
    assert dist["pair"].iloc[0] == "1-2"

    assert (
        main(["dist", "--model", model_file, "--summary", "--out", "s.csv", "--out-dir", out])
        == EXIT_OK
    )
    summary = pd.read_csv(os.path.join(out, "s.csv"))
    assert list(summary.columns) == ["pair", "mean", "sd", "min", "max"]
    assert summary["mean"].tolist() == pytest.approx([4.0, 12.0, 8.0])
    assert summary["sd"].tolist() == pytest.approx([0, 0, 0], abs=1e-12)


def test_abt_single_interval(tmp_path, model_file):
    out = str(tmp_path / "out")
    args = ["abt", "--model", model_file, "--pair", "3,1", "--out-dir", out]
    assert main(args + ["--interval", "2"]) == EXIT_OK

    abt = pd.read_csv(os.path.join(out, "abt.csv"))
    assert list(abt.columns) == ["interval_start", "interval_end", "area"]
    assert len(abt) == 1
    assert (abt["interval_start"][0], abt["interval_end"][0]) == (2, 4)
    # constants 9 and 3 over a 2-week interval
    assert abt["area"][0] == pytest.approx(12.0, abs=1e-12)


def test_abt_invalid_interval(tmp_path, model_file):
    out = str(tmp_path / "out")
    args = ["abt", "--model", model_file, "--pair", "3,1", "--out-dir", out]
    assert main(args + ["--interval", "0"]) == EXIT_CONFIG
    assert main(args + ["--interval", "9"]) == EXIT_CONFIG
    assert main(["abt", "--model", model_file, "--interval", "1", "--out-dir", out]) == EXIT_CONFIG
    assert not os.path.exists(os.path.join(out, "abt.csv"))


def test_dist_needs_two_groups(tmp_path):
    model = str(tmp_path / "one.json")
    save_model(make_model(GRID, [[3.0]]), model)
    out = str(tmp_path / "out")

    assert main(["dist", "--model", model, "--out-dir", out]) == EXIT_CONFIG
    assert not os.path.exists(os.path.join(out, "dist.csv"))


def test_internal_value_error_is_not_a_config_error(tmp_path, model_file, monkeypatch):
    def broken(*args, **kwargs):
        raise ValueError("bug")

    monkeypatch.setattr(cli, "pairwise_distributions", broken)

    assert main(["dist", "--model", model_file, "--out-dir", str(tmp_path)]) == EXIT_UNEXPECTED


def test_abt_invalid_arguments(tmp_path, model_file):
    out = str(tmp_path / "out")
    assert main(["abt", "--model", model_file, "--out-dir", out]) == EXIT_CONFIG
    assert main(["abt", "--model", model_file, "--pair", "1", "--out-dir", out]) == EXIT_CONFIG
    assert main(["abt", "--model", model_file, "--pair", "0,1", "--out-dir", out]) == EXIT_CONFIG
    assert main(["abt", "--model", model_file, "--pair", "1,4", "--out-dir", out]) == EXIT_CONFIG
    assert not os.path.exists(os.path.join(out, "abt.csv"))


def test_malformed_spec_exits_2_without_output(tmp_path):
    spec = write_csv(tmp_path / "bad.json", ['{"grid": [0, 2], "groups": []'])
    out = str(tmp_path / "out")

    assert main(["pipeline", "--spec", spec, "--out-dir", out]) == EXIT_CONFIG
    assert not os.path.exists(out) or os.listdir(out) == []


def test_invalid_flags_exit_2(tmp_path, scenario_file):
    out = str(tmp_path / "out")
    args = ["pipeline", "--spec", scenario_file, "--out-dir", out]
    assert main(args + ["--degree", "4"]) == EXIT_CONFIG
    assert main(args + ["--segments", "0"]) == EXIT_CONFIG
    assert not os.path.exists(out)


def test_single_individual_exits_3(tmp_path):
    data = str(tmp_path / "one.csv")
    save_dataset(make_dataset(GRID, [[5] * 9]), data)

    assert main(["pipeline", "--data", data, "--out-dir", str(tmp_path / "out")]) == EXIT_FIT


@pytest.mark.parametrize("command", ["pipeline", "report", "scan"])
def test_every_fit_failing_exits_3_without_output(tmp_path, command):
    # a cubic cannot be fitted on two time points
    data = str(tmp_path / "short.csv")
    save_dataset(make_dataset([0, 2], [[1, 2], [3, 4], [5, 6], [7, 8]]), data)
    out = str(tmp_path / "out")

    args = [command, "--data", data, "--max-groups", "3", "--out-dir", out]
    assert main(args) == EXIT_FIT
    assert not os.path.exists(out) or os.listdir(out) == []


def test_missing_file_exits_4(tmp_path):
    missing = str(tmp_path / "nope.csv")
    assert main(["scan", "--data", missing, "--out-dir", str(tmp_path)]) == EXIT_IO


def test_pipeline_is_deterministic(tmp_path):
    data = str(tmp_path / "data.csv")
    dataset, _ = generate_dataset(constant_scenario([3.0, 15.0], 0.5, 40, seed=5))
    save_dataset(dataset, data)

    outputs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        args = ["pipeline", "--data", data, "--degree", "1", "--max-groups", "3"]
        assert main(args + ["--starts", "2", "--segments", "100", "--out-dir", out]) == EXIT_OK
        outputs.append(
            {
                f: open(os.path.join(out, f), "rb").read()
                for f in sorted(os.listdir(out))
                if f != "run_metadata.json"
            }
        )

    assert outputs[0] == outputs[1]
    assert "fit_indices.csv" in outputs[0]
    assert "curves_K2.csv" in outputs[0]
