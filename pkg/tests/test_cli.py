import json
from pathlib import Path

import yaml
from typer.testing import CliRunner

from covshrink.cli import EXIT_CONFIG_ERROR, EXIT_NUMERICAL_ERROR, app, get_config_path, parse_seeds

runner = CliRunner()


def write_profile(directory: Path, **overrides) -> Path:
    """
    write a small experiment profile into the given directory
    """
    values = {
        "name": "cli",
        "n": 8,
        "t": 32,
        "cv": {"k_folds": 2, "t_out": 4},
        "cross": {"kind": "two-peak"},
        "auto_true": {"kind": "exp-decay", "tau": 1.5},
        "methods": [{"kind": "ledoit-peche"}, {"kind": "isotonic"}, {"kind": "exp-decay-fit", "grid": [1.0, 2.0]}],
        "seeds": [1],
        "output_dir": str(directory / "results"),
    }
    values.update(overrides)
    path = directory / "profile.yaml"
    path.write_text(yaml.safe_dump(values), encoding="utf-8")
    return path


def test_app_help():
    """
    test --help option
    """
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("run", "verify-mp", "verify-srect"):
        assert command in result.output


def test_run(tmp_path: Path):
    """
    test running an experiment with seed and output overrides
    """
    path = write_profile(tmp_path)
    out = tmp_path / "override"
    result = runner.invoke(app, ["run", "--config", str(path), "--seeds", "3,4", "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.joinpath("report.json").read_text(encoding="utf-8"))
    assert report["completed_seeds"] == [3, 4]
    assert [method["name"] for method in report["methods"]] == ["ledoit-peche", "isotonic", "exp-decay-fit"]
    assert out.joinpath("seed_4", "spectra_isotonic.csv").is_file()
    assert not tmp_path.joinpath("results").exists()


def test_run_with_log_level(tmp_path: Path):
    """
    test the global log level option
    """
    path = write_profile(tmp_path, methods=[])
    result = runner.invoke(app, ["--log-level", "debug", "run", "--config", str(path)])
    assert result.exit_code == 0, result.output
    result = runner.invoke(app, ["--log-level", "verbose", "run", "--config", str(path)])
    assert result.exit_code != 0


def test_invalid_config(tmp_path: Path):
    """
    test that unknown keys and missing files exit with the config error code
    """
    path = write_profile(tmp_path, unknown_key=1)
    result = runner.invoke(app, ["run", "--config", str(path)])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert "unknown_key" in result.output
    result = runner.invoke(app, ["run", "--config", str(tmp_path / "missing.yaml")])
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_invalid_seeds(tmp_path: Path):
    """
    test that malformed and out of range seeds are rejected
    """
    path = write_profile(tmp_path)
    result = runner.invoke(app, ["run", "--config", str(path), "--seeds", "one,two"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    result = runner.invoke(app, ["run", "--config", str(path), "--seeds=-1"])
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_failing_experiment(tmp_path: Path):
    """
    test that a run without a completed seed exits with the numerical error code
    """
    matrix = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]
    path = write_profile(tmp_path, n=3, cross={"kind": "explicit", "matrix": matrix})
    result = runner.invoke(app, ["run", "--config", str(path)])
    assert result.exit_code == EXIT_NUMERICAL_ERROR
    assert tmp_path.joinpath("results", "report.json").is_file()


def test_explicit_size_mismatch(tmp_path: Path):
    """
    test that an explicit covariance of the wrong size is a profile error
    """
    path = write_profile(tmp_path, n=3, cross={"kind": "explicit", "matrix": [[1.0, 0.0], [0.0, 1.0]]})
    result = runner.invoke(app, ["run", "--config", str(path)])
    assert result.exit_code == EXIT_CONFIG_ERROR
    assert not tmp_path.joinpath("results", "report.json").exists()


def test_verify_mp():
    """
    test the Marčenko-Pastur check on a small instance
    """
    result = runner.invoke(app, ["verify-mp", "--q", "0.5", "--n", "40", "--draws", "10"])
    assert result.exit_code == 0, result.output
    assert "Max residual" in result.output
    result = runner.invoke(app, ["verify-mp", "--n", "40", "--draws", "10", "--tau", "2", "--high", "3"])
    assert result.exit_code == 0, result.output


def test_verify_mp_invalid_model():
    """
    test that a negative decay time exits with the config error code
    """
    result = runner.invoke(app, ["verify-mp", "--n", "40", "--draws", "10", "--tau", "-1"])
    assert result.exit_code == EXIT_CONFIG_ERROR
    result = runner.invoke(app, ["verify-mp", "--n", "40", "--draws", "5"])
    assert result.exit_code == EXIT_CONFIG_ERROR


def test_verify_srect():
    """
    test the S-transform check on a small instance
    """
    result = runner.invoke(app, ["verify-srect", "--n", "20", "--t", "40", "--draws", "20"])
    assert result.exit_code == 0, result.output
    assert "S_W(z) vs 1/(1+qz)" in result.output


def test_get_config_path():
    """
    test that shipped profiles are found by name
    """
    assert get_config_path("example1").name == "example1.yaml"
    assert get_config_path("mp_check.yaml").is_file()
    assert get_config_path("no-such-profile") == Path("no-such-profile")


def test_parse_seeds():
    """
    test parsing of comma separated seeds
    """
    assert parse_seeds(None) is None
    assert parse_seeds("1, 2,3") == [1, 2, 3]
