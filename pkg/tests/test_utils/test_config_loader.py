from pathlib import Path

import pytest

from app.dependencies import get_settings
from app.schemas.embedding_schemas import EmbeddingKind
from app.utils.config_loader import build_run_config, load_run_config, parse_seed_overrides
from app.utils.exceptions import ConfigurationError

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

TOML = """
[problem]
name = "polynom3"

[embedding]
kind = "hc_cosine"
n_frequencies = 20
sigma = 20.0

[constraint]
strategy = "new_hc"

[seeds]
weights = 3
collocation = 4
frequencies = 5
"""


# Test seed overrides parse into integers
def test_parse_seed_overrides():
    assert parse_seed_overrides(["weights=3", "frequencies = 7"]) == {"weights": 3, "frequencies": 7}
    assert parse_seed_overrides(None) == {}


@pytest.mark.parametrize("pairs", [["weights"], ["learning_rate=1"], ["weights=abc"]])
def test_parse_seed_overrides_invalid(pairs):
    with pytest.raises(ConfigurationError):
        parse_seed_overrides(pairs)


# Test a TOML run file with defaults from settings
def test_load_run_config_defaults(tmp_path):
    path = tmp_path / "polynom3_new_hc.toml"
    path.write_text(TOML)
    settings = get_settings()
    config = load_run_config(path)
    assert config.label == "polynom3_new_hc"
    assert config.embedding.kind == EmbeddingKind.HC_COSINE
    assert config.training.iterations == settings.desk_iterations
    assert config.training.learning_rate == settings.learning_rate
    assert (config.evaluation.nx, config.evaluation.nt) == (settings.eval_nx, settings.eval_nt)


# Test the paper-scale preset and seed overrides
def test_paper_scale_and_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(TOML)
    config = load_run_config(path, paper_scale=True, seed_overrides={"weights": 11})
    assert config.network.hidden == [100, 100, 100]
    assert (config.collocation.n_pde, config.collocation.n_ic, config.collocation.n_bc) == (20000, 500, 1000)
    assert config.training.iterations == 1_000_000
    assert config.seeds.weights == 11 and config.seeds.frequencies == 5


# Test a wall-clock budget survives the paper-scale preset
def test_paper_scale_keeps_wall_clock():
    raw = {"training": {"wall_clock_seconds": 30.0}, "seeds": {"weights": 0, "collocation": 0, "frequencies": 0}}
    config = build_run_config(raw, paper_scale=True)
    assert config.training.iterations is None
    assert config.training.wall_clock_seconds == 30.0


# Test configuration failures
def test_load_run_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_config(tmp_path / "missing.toml")
    broken = tmp_path / "broken.toml"
    broken.write_text("[problem\nname=")
    with pytest.raises(ConfigurationError):
        load_run_config(broken)
    no_seeds = tmp_path / "no_seeds.toml"
    no_seeds.write_text("[problem]\nname = \"low_frequency\"\n")
    with pytest.raises(ConfigurationError):
        load_run_config(no_seeds)


# Test every shipped configuration loads
@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    config = load_run_config(path)
    assert config.label == path.stem
