import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from app.dependencies import get_settings
from app.schemas.constraint_schemas import Strategy
from app.schemas.embedding_schemas import EmbeddingKind
from app.schemas.run_schemas import MetricsRow, RunConfig, RunMetrics
from app.services.experiment_service import ExperimentService
from app.utils.csv_io import metrics_frame
from app.utils.exceptions import ConfigurationError

settings = get_settings()
logger = logging.getLogger(__name__)

REFERENCE_RULES = ("best_soft", "soft_identity")


def _run_config(config: RunConfig, out_dir: Optional[Path] = None) -> RunMetrics:
    if out_dir is None:
        return ExperimentService.run(config)
    metrics, params = ExperimentService.run_with_checkpoint(config)
    return ExperimentService.save_run(metrics, params, out_dir)


class ComparisonService:

    @classmethod
    def select_reference(cls, rows: Sequence[MetricsRow], rule: str = "best_soft") -> MetricsRow:
        """Reference run among one problem's rows: the most accurate soft run, or the plain soft run."""
        if rule not in REFERENCE_RULES:
            raise ConfigurationError(f"Unknown reference rule '{rule}'; expected one of {REFERENCE_RULES}")
        soft = [row for row in rows if row.strategy == Strategy.SOFT.value]
        if rule == "soft_identity":
            soft = [row for row in soft if row.embedding_kind == EmbeddingKind.IDENTITY.value]
        if not soft:
            problem = rows[0].problem if rows else "?"
            raise ConfigurationError(f"No reference run ({rule}) for problem {problem}")
        scored = [row for row in soft if row.rel_l2 is not None]
        if not scored:
            return soft[0]
        return min(scored, key=lambda row: row.rel_l2)

    @classmethod
    def with_improvements(cls, rows: Sequence[MetricsRow], rule: str = "best_soft") -> List[MetricsRow]:
        """Attach improvement_pct relative to each problem's reference run; order is preserved."""
        by_problem: Dict[str, List[MetricsRow]] = {}
        for row in rows:
            by_problem.setdefault(row.problem, []).append(row)
        references = {}
        for problem, problem_rows in by_problem.items():
            references[problem] = cls.select_reference(problem_rows, rule)
            logger.info(f"Reference for {problem}: {references[problem].strategy}/"
                        f"{references[problem].embedding_kind} n_freq={references[problem].n_freq}")
        result = []
        for row in rows:
            reference = references[row.problem]
            improvement = None
            if row.rel_l2 is not None and reference.rel_l2 is not None and row.rel_l2 > 0 and reference.rel_l2 > 0:
                improvement = ExperimentService.relative_improvement(row.rel_l2, reference.rel_l2)
            result.append(row.model_copy(update={"improvement_pct": improvement}))
        return result

    @classmethod
    def comparison_table(cls, metrics: Sequence[RunMetrics], rule: str = "best_soft") -> pd.DataFrame:
        rows = [ExperimentService.metrics_row(m) for m in metrics]
        return metrics_frame(cls.with_improvements(rows, rule))

    @classmethod
    def equalize_wall_clock(cls, configs: Sequence[RunConfig], warmup: Optional[int] = None,
                            measured_iters: Optional[int] = None) -> List[RunConfig]:
        """
        Give every run of a problem the time its plain soft run needs for the configured
        iteration count, as measured by a timing probe.
        """
        budgets: Dict[str, float] = {}
        for config in configs:
            if config.problem.name in budgets:
                continue
            reference = next(
                (c for c in configs if c.problem.name == config.problem.name
                 and c.constraint.strategy == Strategy.SOFT and c.embedding.kind == EmbeddingKind.IDENTITY),
                None,
            ) or next((c for c in configs if c.problem.name == config.problem.name
                       and c.constraint.strategy == Strategy.SOFT), None)
            if reference is None or reference.training.iterations is None:
                raise ConfigurationError(f"Fixed-time mode needs a soft run with an iteration budget for {config.problem.name}")
            ms = ExperimentService.timing_probe(reference, warmup, measured_iters)
            budgets[config.problem.name] = ms * reference.training.iterations / 1000.0
            logger.info(f"Fixed-time budget for {config.problem.name}: {budgets[config.problem.name]:.2f} s")
        return [
            config.model_copy(update={"training": config.training.model_copy(
                update={"iterations": None, "wall_clock_seconds": budgets[config.problem.name]})})
            for config in configs
        ]

    @classmethod
    def compare_suite(cls, configs: Sequence[RunConfig], reference: str = "best_soft", workers: Optional[int] = None,
                      fixed_time: bool = False, out_dir: Optional[Path] = None) -> Tuple[pd.DataFrame, List[RunMetrics]]:
        """Train every configuration; with ``out_dir`` each run also writes its CSVs and best-loss checkpoint."""
        if not configs:
            raise ConfigurationError("A suite needs at least one run configuration")
        if reference not in REFERENCE_RULES:
            raise ConfigurationError(f"Unknown reference rule '{reference}'; expected one of {REFERENCE_RULES}")
        configs = list(configs)
        if fixed_time:
            configs = cls.equalize_wall_clock(configs)
        workers = settings.suite_workers if workers is None else workers
        logger.info(f"Running suite of {len(configs)} configurations with {workers} worker(s)")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                metrics = list(pool.map(partial(_run_config, out_dir=out_dir), configs))
        else:
            metrics = [_run_config(config, out_dir) for config in configs]
        return cls.comparison_table(metrics, reference), metrics
