import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import tomli
from pydantic import ValidationError

from app.dependencies import get_settings
from app.schemas.run_schemas import RunConfig
from app.utils.exceptions import ConfigurationError
from settings.config import Settings

logger = logging.getLogger(__name__)

SEED_KEYS = ("weights", "collocation", "frequencies")


def parse_seed_overrides(pairs: Optional[Iterable[str]]) -> Dict[str, int]:
    """``["weights=3", "frequencies=7"]`` -> ``{"weights": 3, "frequencies": 7}``"""
    overrides = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or key not in SEED_KEYS:
            raise ConfigurationError(f"Seed override must look like k=v with k in {SEED_KEYS}, got '{pair}'")
        try:
            overrides[key] = int(value)
        except ValueError:
            raise ConfigurationError(f"Seed override '{pair}' needs an integer value") from None
    return overrides


def build_run_config(raw: Dict[str, Any], paper_scale: bool = False,
                     seed_overrides: Optional[Dict[str, int]] = None,
                     settings: Optional[Settings] = None) -> RunConfig:
    """Validate a sectioned mapping into a RunConfig, applying scale presets and seed overrides."""
    settings = settings or get_settings()
    raw = {section: dict(values) if isinstance(values, dict) else values for section, values in raw.items()}
    training = raw.setdefault("training", {})
    training.setdefault("learning_rate", settings.learning_rate)
    training.setdefault("log_every", settings.log_every)
    if "iterations" not in training and "wall_clock_seconds" not in training:
        training["iterations"] = settings.desk_iterations
    evaluation = raw.setdefault("evaluation", {})
    evaluation.setdefault("nx", settings.eval_nx)
    evaluation.setdefault("nt", settings.eval_nt)
    evaluation.setdefault("series_terms", settings.series_terms)
    if paper_scale:
        raw["network"] = {"hidden": list(settings.paper_hidden_layers)}
        collocation = raw.setdefault("collocation", {})
        collocation.update(n_pde=settings.paper_n_pde, n_ic=settings.paper_n_ic, n_bc=settings.paper_n_bc)
        if "wall_clock_seconds" not in training:
            training["iterations"] = settings.paper_iterations
    if seed_overrides:
        raw.setdefault("seeds", {}).update(seed_overrides)
    try:
        return RunConfig(**raw)
    except ValidationError as error:
        raise ConfigurationError(f"Invalid run configuration: {error}") from error


def load_run_config(path: Union[str, Path], paper_scale: bool = False,
                    seed_overrides: Optional[Dict[str, int]] = None,
                    settings: Optional[Settings] = None) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            raw = tomli.load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"Config file {path} does not exist") from None
    except tomli.TOMLDecodeError as error:
        raise ConfigurationError(f"Config file {path} is not valid TOML: {error}") from error
    raw.setdefault("name", path.stem)
    config = build_run_config(raw, paper_scale, seed_overrides, settings)
    logger.debug(f"Loaded run config {config.label} from {path}")
    return config
