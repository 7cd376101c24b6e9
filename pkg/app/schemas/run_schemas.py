from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.schemas.constraint_schemas import ConstraintSpec
from app.schemas.embedding_schemas import EmbeddingSpec
from app.schemas.problem_schemas import CollocationCounts, LossWeights, ProblemSection

METRICS_COLUMNS = [
    "problem", "strategy", "embedding_kind", "n_freq", "sigma", "seed_w", "seed_c", "seed_f",
    "iters", "ms_per_iter", "best_loss", "rel_l2", "improvement_pct",
]
LOSS_HISTORY_COLUMNS = ["iteration", "total", "pde", "ic", "bc"]


class NetworkSection(BaseModel):
    hidden: List[int] = Field(default_factory=lambda: [50, 50, 50], min_length=1, example=[50, 50, 50])

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_widths(self) -> "NetworkSection":
        if any(width <= 0 for width in self.hidden):
            raise ValueError("hidden widths must be positive")
        return self


class TrainingSection(BaseModel):
    iterations: Optional[int] = Field(None, ge=0, example=20000)
    wall_clock_seconds: Optional[float] = Field(None, gt=0)
    learning_rate: float = Field(default=1e-4, gt=0)
    log_every: Optional[int] = Field(None, ge=1)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_budget(self) -> "TrainingSection":
        if (self.iterations is None) == (self.wall_clock_seconds is None):
            raise ValueError("exactly one of iterations or wall_clock_seconds must be set")
        return self


class SeedSection(BaseModel):
    weights: int = Field(..., example=0)
    collocation: int = Field(..., example=1)
    frequencies: int = Field(..., example=2)

    class Config:
        frozen = True


class EvaluationSection(BaseModel):
    nx: int = Field(default=256, ge=2)
    nt: int = Field(default=101, ge=2)
    series_terms: int = Field(default=200, ge=1)

    class Config:
        frozen = True


class RunConfig(BaseModel):
    name: Optional[str] = Field(None, example="low_frequency-new_hc-1")
    problem: ProblemSection = Field(default_factory=ProblemSection)
    embedding: EmbeddingSpec = Field(default_factory=EmbeddingSpec)
    constraint: ConstraintSpec = Field(default_factory=ConstraintSpec)
    network: NetworkSection = Field(default_factory=NetworkSection)
    training: TrainingSection
    collocation: CollocationCounts = Field(default_factory=CollocationCounts)
    seeds: SeedSection
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    loss_weights: LossWeights = Field(default_factory=LossWeights)

    class Config:
        frozen = True

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return f"{self.problem.name}-{self.constraint.strategy.value}-{self.embedding.kind.value}-{self.embedding.size}"


class LossRecord(BaseModel):
    iteration: int
    total: float
    pde: float
    ic: float
    bc: float


class RunMetrics(BaseModel):
    config: RunConfig
    problem: str
    strategy: str
    embedding_kind: str
    frequencies: List[float] = Field(default_factory=list)
    n_freq: int = 0
    sigma: Optional[float] = None
    seeds: SeedSection
    iterations: int = Field(..., description="Completed optimizer steps")
    loss_history: List[LossRecord] = Field(default_factory=list)
    best_loss: float
    best_loss_iteration: int
    rel_l2: Optional[float] = Field(None, description="Relative L2 error of the best-loss checkpoint")
    ms_per_iter: float
    total_seconds: float
    max_bc_diagnostic: float = 0.0
    diverged: bool = False
    eval_grid: Tuple[int, int] = (256, 101)
    collocation_resampled: bool = False
    frequency_canonicalization: str = ""
    checkpoint_path: Optional[str] = None


class MetricsRow(BaseModel):
    problem: str
    strategy: str
    embedding_kind: str
    n_freq: int
    sigma: Optional[float] = None
    seed_w: int
    seed_c: int
    seed_f: int
    iters: int
    ms_per_iter: float
    best_loss: float
    rel_l2: Optional[float] = None
    improvement_pct: Optional[float] = None


class ImprovementRequest(BaseModel):
    err: float = Field(..., gt=0, example=0.5)
    err_ref: float = Field(..., gt=0, example=1.0)


class ImprovementResponse(BaseModel):
    improvement_pct: float = Field(..., example=50.0)


class ComparisonRequest(BaseModel):
    configs: List[RunConfig] = Field(..., min_length=1)
    reference: str = Field(default="best_soft")
    fixed_time: bool = Field(default=False)


class ComparisonResponse(BaseModel):
    rows: List[MetricsRow]
