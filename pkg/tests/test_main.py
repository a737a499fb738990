import pytest
from click.testing import CliRunner

from main import cli
from reporting import ACCURACY_HEADER


@pytest.fixture
def runner():
    return CliRunner()


def outputs(tmp_path):
    return [
        "--accuracy-csv",
        str(tmp_path / "accuracy.csv"),
        "--dot-file",
        str(tmp_path / "network.dot"),
    ]


def test_run_constant_setting(runner, tmp_path):
    result = runner.invoke(cli, ["run", *outputs(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "final_accuracy=1.000 ceiling=1.000" in result.output

    lines = (tmp_path / "accuracy.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(ACCURACY_HEADER)
    assert len(lines) == 601
    assert all(len(line.split(",")) == 8 for line in lines)

    dot = (tmp_path / "network.dot").read_text(encoding="utf-8")
    assert dot.startswith("digraph temporal_memory {")
    assert "->" in dot


def test_run_noisy_setting_reports_ceiling(runner, tmp_path):
    args = ["run", "--setting", "3", "--m", "4", "--k", "2", "--p", "2", "--n", "50"]
    result = runner.invoke(cli, [*args, *outputs(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "ceiling=0.500" in result.output
    assert len((tmp_path / "accuracy.csv").read_text().splitlines()) == 301


def test_run_with_config_file(runner, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("setting = 2\nm = 4\nn = 20\n", encoding="utf-8")
    result = runner.invoke(cli, ["run", "--config", str(config), *outputs(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "ceiling=0.875" in result.output


def test_bad_flag_value(runner, tmp_path):
    result = runner.invoke(cli, ["run", "--m", "banana", *outputs(tmp_path)])
    assert result.exit_code == 2
    assert "--m" in result.output


def test_bad_config_file_value(runner, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("m = banana\n", encoding="utf-8")
    result = runner.invoke(cli, ["run", "--config", str(config), *outputs(tmp_path)])
    assert result.exit_code == 2
    assert "m: " in result.output


def test_alphabet_too_small(runner, tmp_path):
    result = runner.invoke(cli, ["run", "--alphabet", "AB", *outputs(tmp_path)])
    assert result.exit_code == 2
    assert "too small" in result.output


def test_unwritable_output(runner, tmp_path):
    args = ["run", "--n", "5", "--accuracy-csv", str(tmp_path / "missing" / "accuracy.csv")]
    result = runner.invoke(cli, [*args, "--dot-file", str(tmp_path / "network.dot")])
    assert result.exit_code == 1
    assert "cannot write output" in result.output


def test_sweep(runner, tmp_path):
    path = tmp_path / "sweep.csv"
    args = ["sweep", "--m-values", "3,4", "--k-values", "1,2", "--n", "30"]
    result = runner.invoke(cli, [*args, "--sweep-csv", str(path)])
    assert result.exit_code == 0, result.output

    first = path.read_bytes()
    lines = first.decode("utf-8").splitlines()
    assert lines[0] == "m,k,final_accuracy,ceiling"
    assert [line.split(",")[:2] for line in lines[1:]] == [
        ["3", "1"],
        ["3", "2"],
        ["4", "1"],
        ["4", "2"],
    ]
    assert len(result.output.splitlines()) == 4

    runner.invoke(cli, [*args, "--sweep-csv", str(path)])
    assert path.read_bytes() == first


def test_sweep_empty_range(runner, tmp_path):
    args = ["sweep", "--m-values", "", "--sweep-csv", str(tmp_path / "sweep.csv")]
    result = runner.invoke(cli, args)
    assert result.exit_code == 2
    assert not (tmp_path / "sweep.csv").exists()


def test_verbose_flag(runner, tmp_path):
    result = runner.invoke(cli, ["-v", "run", "--n", "3", *outputs(tmp_path)])
    assert result.exit_code == 0, result.output
