from typing import Dict, Optional

from pydantic import BaseModel, Field, model_validator


class LossWeights(BaseModel):
    lambda_pde: float = Field(default=1.0, gt=0)
    lambda_ic: float = Field(default=1.0, gt=0)
    lambda_bc: float = Field(default=1.0, gt=0)

    class Config:
        frozen = True


class CollocationCounts(BaseModel):
    n_pde: int = Field(default=4000, ge=1, example=4000)
    n_ic: int = Field(default=200, ge=1, example=200)
    n_bc: int = Field(default=200, ge=1, example=200)
    resample: bool = Field(default=False, description="Draw a fresh collocation set every iteration")

    class Config:
        frozen = True


class ProblemSection(BaseModel):
    """Either a built-in benchmark name or a custom initial condition with its diffusivity."""
    name: str = Field(default="low_frequency", example="multiscale")
    expression: Optional[str] = Field(None, example="cos(3*pi*x)")
    diffusivity: Optional[float] = Field(None, gt=0)
    flux_lo: float = Field(default=0.0)
    flux_hi: float = Field(default=0.0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_custom(self) -> "ProblemSection":
        if self.expression is not None and self.diffusivity is None:
            raise ValueError("custom problems need an explicit diffusivity")
        return self


class ProblemSummary(BaseModel):
    name: str = Field(..., example="low_frequency")
    expression: str = Field(..., example="cos(2*pi*x)")
    diffusivity: float = Field(..., example=0.025330295910584444)
    flux_lo: float = 0.0
    flux_hi: float = 0.0
    modes: Optional[Dict[int, float]] = Field(None, description="Exact cosine coefficients when the initial condition is a finite sum of modes")


class OracleRequest(BaseModel):
    nx: int = Field(default=256, ge=2)
    nt: int = Field(default=101, ge=2)
    terms: int = Field(default=200, ge=1)


class OracleSample(BaseModel):
    x: float
    t: float
    u: float
