from typing import List

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Desk-scale defaults (CI-runnable)
    desk_hidden_layers: List[int] = Field(default=[50, 50, 50], description="Hidden widths of the desk-scale network")
    desk_n_pde: int = Field(default=4000, description="Interior collocation points at desk scale")
    desk_n_ic: int = Field(default=200, description="Initial-condition points at desk scale")
    desk_n_bc: int = Field(default=200, description="Boundary points at desk scale")
    desk_iterations: int = Field(default=20000, description="Adam iterations at desk scale")

    # Full-scale values, selected with --paper-scale
    paper_hidden_layers: List[int] = Field(default=[100, 100, 100], description="Hidden widths at full scale")
    paper_n_pde: int = Field(default=20000, description="Interior collocation points at full scale")
    paper_n_ic: int = Field(default=500, description="Initial-condition points at full scale")
    paper_n_bc: int = Field(default=1000, description="Boundary points at full scale")
    paper_iterations: int = Field(default=1_000_000, description="Adam iterations at full scale")

    # Training and evaluation
    learning_rate: float = Field(default=1e-4, description="Fixed Adam learning rate")
    frequency_sigma: float = Field(default=20.0, description="Standard deviation of sampled embedding frequencies")
    eval_nx: int = Field(default=256, description="Spatial points of the relative L2 evaluation grid")
    eval_nt: int = Field(default=101, description="Temporal points of the relative L2 evaluation grid")
    series_terms: int = Field(default=200, description="Truncation of the cosine series oracle")
    quadrature_tolerance: float = Field(default=1e-12, description="Absolute tolerance per Fourier coefficient")

    # Harness
    output_dir: str = Field(default="results", description="Directory for metrics, loss histories and checkpoints")
    log_every: int = Field(default=1000, description="Iterations between progress log lines")
    probe_warmup: int = Field(default=5, description="Unmeasured iterations before a timing probe")
    probe_iterations: int = Field(default=20, description="Measured iterations of a timing probe")
    suite_workers: int = Field(default=1, description="Parallel worker processes for suites")
    debug: bool = Field(default=False, description="Debug mode logs every iteration")

    class Config:
        env_file = ".env"
        env_file_encoding = 'utf-8'


settings = Settings()
