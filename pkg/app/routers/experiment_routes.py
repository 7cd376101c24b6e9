from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from app.schemas.run_schemas import (ComparisonRequest, ComparisonResponse, ImprovementRequest,
                                     ImprovementResponse, RunConfig, RunMetrics)
from app.services.comparison_service import ComparisonService
from app.services.experiment_service import ExperimentService

router = APIRouter()


@router.post("/runs", response_model=RunMetrics, tags=["Experiments"])
async def create_run(config: RunConfig):
    """Train one configuration to its budget and return the run metrics."""
    return await run_in_threadpool(ExperimentService.run, config)


@router.post("/improvements", response_model=ImprovementResponse, tags=["Experiments"])
async def relative_improvement(request: ImprovementRequest):
    return ImprovementResponse(improvement_pct=ExperimentService.relative_improvement(request.err, request.err_ref))


@router.post("/comparisons", response_model=ComparisonResponse, tags=["Experiments"])
async def compare(request: ComparisonRequest):
    """Run a suite and report every run against its problem's reference run."""
    _, metrics = await run_in_threadpool(
        ComparisonService.compare_suite, request.configs, request.reference, 1, request.fixed_time
    )
    rows = ComparisonService.with_improvements(
        [ExperimentService.metrics_row(m) for m in metrics], request.reference
    )
    return ComparisonResponse(rows=rows)
