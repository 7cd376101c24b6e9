import pytest
from click.testing import CliRunner

from app.cli import EXIT_CONFIGURATION, EXIT_DIVERGED, cli
from app.models.network_model import NetworkParams, value_and_gradient
from app.utils.csv_io import read_frame, read_metrics_csv
from app.utils.exceptions import TrainingError

TINY_TOML = """
[problem]
name = "low_frequency"

[embedding]
kind = "{kind}"
{frequencies}

[constraint]
strategy = "{strategy}"

[network]
hidden = [8, 8]

[training]
iterations = 3
learning_rate = 1e-3
log_every = 1

[collocation]
n_pde = 64
n_ic = 16
n_bc = 16

[evaluation]
nx = 16
nt = 8
series_terms = 20

[seeds]
weights = 0
collocation = 1
frequencies = 2
"""


def write_config(directory, stem, kind="identity", strategy="soft", frequencies=""):
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}.toml"
    path.write_text(TINY_TOML.format(kind=kind, strategy=strategy, frequencies=frequencies))
    return path


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:  # click >= 8.2 always keeps stderr separate
        return CliRunner()


# Test the module entry point exposes all four commands
def test_cli_lists_commands(runner):
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("run", "suite", "probe", "oracle"):
        assert command in result.output


# Test the oracle command writes one row per grid point
def test_oracle_command(runner, tmp_path):
    out = tmp_path / "oracle.csv"
    result = runner.invoke(cli, ["oracle", "polynom3", "--nx", "5", "--nt", "3", "--terms", "10", "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_frame(out)
    assert list(frame.columns) == ["x", "t", "u"]
    assert len(frame) == 15


# Test an unknown problem exits with the configuration code
def test_oracle_unknown_problem(runner, tmp_path):
    result = runner.invoke(cli, ["oracle", "nope", "--out", str(tmp_path / "x.csv")])
    assert result.exit_code == EXIT_CONFIGURATION


# Test a run writes metrics, loss history and checkpoint
def test_run_command(runner, tmp_path):
    path = write_config(tmp_path / "configs", "tiny_soft")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["run", str(path), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    rows = read_metrics_csv(out / "tiny_soft_metrics.csv")
    assert rows[0].strategy == "soft" and rows[0].iters == 3
    assert len(read_frame(out / "tiny_soft_loss_history.csv")) == 4
    assert (out / "tiny_soft_checkpoint.npz").exists()


# Test seed overrides reach the run
def test_run_seed_override(runner, tmp_path):
    path = write_config(tmp_path / "configs", "tiny_soft")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["run", str(path), "--out", str(out), "--seed-override", "weights=9"])
    assert result.exit_code == 0, result.stderr
    assert read_metrics_csv(out / "tiny_soft_metrics.csv")[0].seed_w == 9


# Test configuration problems exit with code 1
def test_run_bad_config(runner, tmp_path):
    path = write_config(tmp_path / "configs", "bad", kind="random_cos_sin", strategy="new_hc",
                        frequencies="n_frequencies = 4")
    result = runner.invoke(cli, ["run", str(path), "--out", str(tmp_path / "results")])
    assert result.exit_code == EXIT_CONFIGURATION
    assert "error" in result.stderr


# Test a missing config file exits with code 1
def test_run_missing_config(runner, tmp_path):
    result = runner.invoke(cli, ["run", str(tmp_path / "missing.toml")])
    assert result.exit_code == EXIT_CONFIGURATION


# Test a diverged run still writes its outputs and exits with code 2
def test_run_diverged(runner, tmp_path, mocker):
    calls = {"count": 0}

    def flaky(params, evaluator, batch_id=0):
        calls["count"] += 1
        if calls["count"] == 2:
            raise TrainingError("Non-finite loss", batch_id=batch_id)
        return value_and_gradient(params, evaluator, batch_id)

    mocker.patch("app.services.experiment_service.value_and_gradient", side_effect=flaky)
    path = write_config(tmp_path / "configs", "tiny_soft")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["run", str(path), "--out", str(out)])
    assert result.exit_code == EXIT_DIVERGED
    assert (out / "tiny_soft_metrics.csv").exists()


# Test a probe needs at least ten measured iterations
def test_probe_too_few_iterations(runner, tmp_path):
    path = write_config(tmp_path / "configs", "tiny_soft")
    result = runner.invoke(cli, ["probe", str(path), "--iters", "5"])
    assert result.exit_code == EXIT_CONFIGURATION


# Test a probe reports milliseconds per iteration
def test_probe(runner, tmp_path):
    path = write_config(tmp_path / "configs", "tiny_soft")
    result = runner.invoke(cli, ["probe", str(path), "--warmup", "1", "--iters", "10"])
    assert result.exit_code == 0, result.stderr
    assert "ms/iteration" in result.output


# Test a suite writes the comparison table and every run's histories and checkpoint
def test_suite_command(runner, tmp_path):
    configs = tmp_path / "configs"
    write_config(configs, "tiny_soft")
    write_config(configs, "tiny_hard", kind="hc_cosine", strategy="new_hc", frequencies="n_frequencies = 3")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["suite", str(configs), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    table = read_frame(out / "comparison.csv")
    assert sorted(table["strategy"]) == ["new_hc", "soft"]
    assert (out / "tiny_hard_loss_history.csv").exists()
    for label in ("tiny_soft", "tiny_hard"):
        checkpoint = NetworkParams.load(out / f"{label}_checkpoint.npz")
        assert checkpoint.layer_sizes[-1] == 1
        assert (out / f"{label}_metrics.csv").exists()


# Test an empty suite directory is a configuration error
def test_suite_empty(runner, tmp_path):
    result = runner.invoke(cli, ["suite", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIGURATION
