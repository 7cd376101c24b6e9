import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from app.dependencies import get_settings
from app.models.network_model import NetworkParams, NetworkTensors, value_and_gradient
from app.models.optimizer_model import AdamState, adam_step
from app.models.pinn_model import PinnModel
from app.models.problem_model import CollocationSet, DiffusionProblem
from app.models.series_model import FourierSeriesSolution
from app.schemas.constraint_schemas import ConstraintSpec, Geometry, Strategy
from app.schemas.embedding_schemas import EmbeddingKind, EmbeddingSpec
from app.schemas.run_schemas import LossRecord, MetricsRow, RunConfig, RunMetrics
from app.services.embedding_service import EmbeddingService
from app.services.oracle_service import OracleService
from app.services.problem_service import ProblemService
from app.utils.csv_io import write_loss_history, write_metrics_csv
from app.utils.exceptions import ConfigurationError, TrainingError
from settings.config import Settings

settings = get_settings()
logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    config: RunConfig
    problem: DiffusionProblem
    embedding: EmbeddingSpec
    canonicalization: str
    pinn: PinnModel
    initial_params: NetworkParams
    collocation: CollocationSet
    solution: Optional[FourierSeriesSolution]

    def collocation_for(self, iteration: int) -> CollocationSet:
        if not self.config.collocation.resample or iteration == 0:
            return self.collocation
        return ProblemService.sample_collocation(self.config.collocation, self.config.seeds.collocation + iteration)

    def loss_evaluator(self, collocation: CollocationSet, batch_id: int):
        def evaluate(network: NetworkTensors):
            return ProblemService.composite_loss(self.pinn.bind(network), self.problem, collocation,
                                                 self.config.loss_weights, batch_id)
        return evaluate


class ExperimentService:

    @classmethod
    def _constraint_for(cls, config: RunConfig, problem: DiffusionProblem) -> ConstraintSpec:
        constraint = config.constraint
        if constraint.geometry == Geometry.HYPERRECT or constraint.domain_lo != [0.0] or constraint.domain_hi != [1.0]:
            raise ConfigurationError("Training runs are defined on the unit interval [0, 1]")
        fluxes = {"flux_lo": problem.flux_lo, "flux_hi": problem.flux_hi}
        if constraint.geometry == Geometry.ONE_SIDED_LO:
            fluxes["flux_hi"] = None
        elif constraint.geometry == Geometry.ONE_SIDED_HI:
            fluxes["flux_lo"] = None
        return constraint.model_copy(update=fluxes)

    @classmethod
    def prepare(cls, config: RunConfig) -> RunContext:
        """Resolve everything random in a run from its three seeds."""
        problem = ProblemService.from_section(config.problem)
        embedding, canonicalization = EmbeddingService.resolve(config.embedding, config.seeds.frequencies)
        pinn = PinnModel(embedding, cls._constraint_for(config, problem))
        params = pinn.initial_params(config.network.hidden, config.seeds.weights)
        collocation = ProblemService.sample_collocation(config.collocation, config.seeds.collocation)
        solution = None
        try:
            solution = OracleService.solve(problem, config.evaluation.series_terms)
        except ConfigurationError as error:
            logger.warning(f"Relative L2 will be missing for {config.label}: {error}")
        return RunContext(config, problem, embedding, canonicalization, pinn, params, collocation, solution)

    @classmethod
    def run(cls, config: RunConfig) -> RunMetrics:
        return cls.run_with_checkpoint(config)[0]

    @classmethod
    def run_with_checkpoint(cls, config: RunConfig) -> Tuple[RunMetrics, NetworkParams]:
        """Full-batch Adam; returns the metrics and the lowest-loss parameters seen."""
        context = cls.prepare(config)
        training = config.training
        log_every = training.log_every or settings.log_every
        logger.info(
            f"Run {config.label}: problem={context.problem.name} strategy={config.constraint.strategy.value} "
            f"embedding={context.embedding.kind.value} n_freq={context.embedding.size} seeds={config.seeds.model_dump()}"
        )
        params = context.initial_params
        state = AdamState.initial(params, training.learning_rate)
        best_params, best_loss, best_iteration = params, float("inf"), 0
        history: List[LossRecord] = []
        diverged = False
        iteration = 0
        start = time.perf_counter()
        while True:
            collocation = context.collocation_for(iteration)
            try:
                losses, grads = value_and_gradient(params, context.loss_evaluator(collocation, iteration), iteration)
            except TrainingError as error:
                diverged = True
                logger.warning(f"Run {config.label} diverged at iteration {iteration}: {error}")
                break
            total, pde, ic, bc = (loss.item() for loss in losses)
            history.append(LossRecord(iteration=iteration, total=total, pde=pde, ic=ic, bc=bc))
            if total < best_loss:
                best_params, best_loss, best_iteration = params, total, iteration
            if settings.debug or (iteration % log_every == 0 and iteration > 0):
                logger.info(f"{config.label} iteration {iteration}: loss={total:.6e} best={best_loss:.6e} @ {best_iteration}")
            if cls._budget_exhausted(training, iteration, time.perf_counter() - start):
                break
            try:
                params, state = adam_step(params, grads, state)
            except TrainingError as error:
                diverged = True
                logger.warning(f"Run {config.label} diverged in the update after iteration {iteration}: {error}")
                break
            iteration += 1
        elapsed = time.perf_counter() - start

        rel_l2 = None
        if context.solution is not None and history:
            rel_l2 = OracleService.relative_l2_error(
                lambda x, t: context.pinn.predict(best_params, x, t), context.solution,
                config.evaluation.nx, config.evaluation.nt,
            )
        if diverged:
            logger.error(f"Run {config.label} aborted; keeping checkpoint from iteration {best_iteration}")
        metrics = RunMetrics(
            config=config,
            problem=context.problem.name,
            strategy=config.constraint.strategy.value,
            embedding_kind=context.embedding.kind.value,
            frequencies=list(context.embedding.frequencies or []),
            n_freq=context.embedding.size,
            sigma=None if context.embedding.kind == EmbeddingKind.IDENTITY else context.embedding.sigma,
            seeds=config.seeds,
            iterations=iteration,
            loss_history=history,
            best_loss=best_loss,
            best_loss_iteration=best_iteration,
            rel_l2=rel_l2,
            ms_per_iter=1000.0 * elapsed / max(len(history), 1),
            total_seconds=elapsed,
            max_bc_diagnostic=max((record.bc for record in history), default=0.0),
            diverged=diverged,
            eval_grid=(config.evaluation.nx, config.evaluation.nt),
            collocation_resampled=config.collocation.resample,
            frequency_canonicalization=context.canonicalization,
        )
        logger.info(
            f"Run {config.label} finished: best_loss={best_loss:.6e} at {best_iteration}, rel_l2={rel_l2}, "
            f"{metrics.ms_per_iter:.2f} ms/iter over {iteration} iterations"
        )
        return metrics, best_params

    @classmethod
    def _budget_exhausted(cls, training, iteration: int, elapsed: float) -> bool:
        if training.iterations is not None:
            return iteration >= training.iterations
        return elapsed >= training.wall_clock_seconds

    @classmethod
    def relative_improvement(cls, err: float, err_ref: float) -> float:
        """100·(1 − err/err_ref): +50 means half the reference error, −100 means twice."""
        if not (err > 0 and err_ref > 0):
            raise ConfigurationError(f"Errors must be positive, got {err} and {err_ref}")
        return 100.0 * (1.0 - err / err_ref)

    @classmethod
    def timing_probe(cls, config: RunConfig, warmup: Optional[int] = None,
                     measured_iters: Optional[int] = None) -> float:
        """Mean wall-clock milliseconds per loss+gradient+Adam iteration after a warm-up."""
        warmup = settings.probe_warmup if warmup is None else warmup
        measured_iters = settings.probe_iterations if measured_iters is None else measured_iters
        if measured_iters < 10:
            raise ConfigurationError(f"A timing probe needs at least 10 measured iterations, got {measured_iters}")
        context = cls.prepare(config)
        params = context.initial_params
        state = AdamState.initial(params, config.training.learning_rate)

        def step(iteration: int):
            nonlocal params, state
            collocation = context.collocation_for(iteration)
            _, grads = value_and_gradient(params, context.loss_evaluator(collocation, iteration), iteration)
            params, state = adam_step(params, grads, state)

        for iteration in range(warmup):
            step(iteration)
        start = time.perf_counter()
        for iteration in range(warmup, warmup + measured_iters):
            step(iteration)
        ms = 1000.0 * (time.perf_counter() - start) / measured_iters
        logger.info(f"Timing probe {config.label}: {ms:.3f} ms/iteration over {measured_iters} iterations")
        return ms

    @classmethod
    def metrics_row(cls, metrics: RunMetrics, improvement_pct: Optional[float] = None) -> MetricsRow:
        return MetricsRow(
            problem=metrics.problem,
            strategy=metrics.strategy,
            embedding_kind=metrics.embedding_kind,
            n_freq=metrics.n_freq,
            sigma=metrics.sigma,
            seed_w=metrics.seeds.weights,
            seed_c=metrics.seeds.collocation,
            seed_f=metrics.seeds.frequencies,
            iters=metrics.iterations,
            ms_per_iter=metrics.ms_per_iter,
            best_loss=metrics.best_loss,
            rel_l2=metrics.rel_l2,
            improvement_pct=improvement_pct,
        )

    @classmethod
    def save_run(cls, metrics: RunMetrics, params: NetworkParams, out_dir: Union[str, Path]) -> RunMetrics:
        """Metrics CSV, loss-history CSV and the best-loss checkpoint under ``out_dir``."""
        out_dir = Path(out_dir)
        label = metrics.config.label
        write_metrics_csv([cls.metrics_row(metrics)], out_dir / f"{label}_metrics.csv")
        write_loss_history(metrics.loss_history, out_dir / f"{label}_loss_history.csv")
        checkpoint = params.save(out_dir / f"{label}_checkpoint.npz")
        return metrics.model_copy(update={"checkpoint_path": str(checkpoint)})

    @classmethod
    def method_grid(cls, problem: str, seeds: dict, iterations: Optional[int] = None,
                    settings_: Optional[Settings] = None, sizes: Tuple[int, int] = (20, 50)) -> List[RunConfig]:
        """The nine benchmark methods for one problem: three strategies × three embeddings."""
        settings_ = settings_ or settings
        base = {
            "problem": {"name": problem},
            "network": {"hidden": list(settings_.desk_hidden_layers)},
            "training": {"iterations": settings_.desk_iterations if iterations is None else iterations,
                         "learning_rate": settings_.learning_rate},
            "collocation": {"n_pde": settings_.desk_n_pde, "n_ic": settings_.desk_n_ic, "n_bc": settings_.desk_n_bc},
            "seeds": seeds,
            "evaluation": {"nx": settings_.eval_nx, "nt": settings_.eval_nt, "series_terms": settings_.series_terms},
        }
        sigma = settings_.frequency_sigma
        random_embeddings = [{"kind": EmbeddingKind.IDENTITY}] + [
            {"kind": EmbeddingKind.RANDOM_COS_SIN, "n_frequencies": n, "sigma": sigma} for n in sizes
        ]
        hc_embeddings = [{"kind": EmbeddingKind.HC_COSINE, "frequencies": [1.0]}] + [
            {"kind": EmbeddingKind.HC_COSINE, "n_frequencies": n, "sigma": sigma} for n in sizes
        ]
        methods = [(Strategy.SOFT, e) for e in random_embeddings]
        methods += [(Strategy.EXISTING_HC, e) for e in random_embeddings]
        methods += [(Strategy.NEW_HC, e) for e in hc_embeddings]
        configs = []
        for strategy, embedding in methods:
            spec = EmbeddingSpec(**embedding)
            name = f"{problem}-{strategy.value}-{spec.kind.value}-{spec.size if spec.kind != EmbeddingKind.IDENTITY else 0}"
            configs.append(RunConfig(name=name, embedding=spec,
                                     constraint=ConstraintSpec(strategy=strategy), **base))
        return configs
