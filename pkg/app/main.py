from fastapi import FastAPI
from starlette.middleware.cors import CORSMiddleware
from starlette.responses import JSONResponse

from app.routers import experiment_routes, problem_routes
from app.utils.common import setup_logging
from app.utils.exceptions import ConfigurationError, NumericError, TrainingError

app = FastAPI(
    title="PINN Neumann Benchmark",
    description="Physics-informed solvers for the 1D diffusion equation with Neumann boundary "
                "conditions: soft constraints, derivative-based hard constraints and cosine-embedding "
                "hard constraints, checked against a cosine-series oracle.",
    version="0.1.0",
    license_info={"name": "MIT", "url": "https://opensource.org/licenses/MIT"},
)
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup_event():
    setup_logging()


@app.exception_handler(ConfigurationError)
async def configuration_error_handler(request, exc):
    return JSONResponse(status_code=400, content={"message": str(exc)})


@app.exception_handler(NumericError)
async def numeric_error_handler(request, exc):
    return JSONResponse(status_code=422, content={"message": str(exc)})


@app.exception_handler(TrainingError)
async def training_error_handler(request, exc):
    return JSONResponse(status_code=409, content={"message": str(exc)})


@app.exception_handler(Exception)
async def exception_handler(request, exc):
    return JSONResponse(status_code=500, content={"message": "An unexpected error occurred."})


app.include_router(problem_routes.router)
app.include_router(experiment_routes.router)
