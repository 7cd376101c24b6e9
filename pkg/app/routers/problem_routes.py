"""
Benchmark problems and their cosine-series reference solutions.

The built-in problems are the five zero-flux benchmarks; the oracle endpoint samples the
series solution on a uniform (x, t) grid over the unit square.
"""

from typing import List

from fastapi import APIRouter, Depends, HTTPException, status
from starlette.concurrency import run_in_threadpool

from app.dependencies import get_settings
from app.schemas.problem_schemas import OracleRequest, OracleSample, ProblemSummary
from app.services.oracle_service import OracleService
from app.services.problem_service import ProblemService
from app.utils.exceptions import ConfigurationError
from settings.config import Settings

router = APIRouter()


def _problem_or_404(name: str):
    try:
        return ProblemService.builtin_problem(name)
    except ConfigurationError as error:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(error))


@router.get("/problems", response_model=List[ProblemSummary], tags=["Problems"])
async def list_problems():
    return [ProblemService.summary(ProblemService.builtin_problem(name)) for name in ProblemService.builtin_names()]


@router.get("/problems/{name}", response_model=ProblemSummary, tags=["Problems"])
async def get_problem(name: str):
    return ProblemService.summary(_problem_or_404(name))


@router.post("/problems/{name}/oracle", response_model=List[OracleSample], tags=["Problems"])
async def sample_oracle(name: str, request: OracleRequest, settings: Settings = Depends(get_settings)):
    """Series solution sampled on an nx × nt grid (x-major)."""
    problem = _problem_or_404(name)
    solution = await run_in_threadpool(OracleService.solve, problem, request.terms, settings.quadrature_tolerance)
    frame = OracleService.grid_frame(solution, request.nx, request.nt)
    return [OracleSample(**record) for record in frame.to_dict(orient="records")]
