"""
Shared fixtures.

- `async_client`: asynchronous HTTP client bound to the FastAPI application.
- `network_factory`: reproducible Glorot-initialised networks of a given shape.
- `tiny_config`: a run configuration small enough to train for a few iterations in a test.
- `fd`: central finite differences for checking exact derivatives.
"""

import numpy as np
import pytest
from httpx import ASGITransport, AsyncClient

from app.main import app
from app.models.network_model import NetworkParams
from app.schemas.run_schemas import RunConfig


# this is what creates the http client for your api tests
@pytest.fixture(scope="function")
async def async_client():
    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://testserver") as client:
        yield client


@pytest.fixture
def network_factory():
    def make(layer_sizes, seed=0):
        return NetworkParams.glorot(tuple(layer_sizes), seed)
    return make


@pytest.fixture
def tiny_config_data():
    return {
        "name": "tiny",
        "problem": {"name": "low_frequency"},
        "embedding": {"kind": "identity"},
        "constraint": {"strategy": "soft"},
        "network": {"hidden": [8, 8]},
        "training": {"iterations": 3, "learning_rate": 1e-3, "log_every": 1},
        "collocation": {"n_pde": 64, "n_ic": 16, "n_bc": 16},
        "seeds": {"weights": 0, "collocation": 1, "frequencies": 2},
        "evaluation": {"nx": 16, "nt": 8, "series_terms": 20},
    }


@pytest.fixture
def tiny_config(tiny_config_data):
    return RunConfig(**tiny_config_data)


@pytest.fixture
def fd():
    def central(f, x, h=1e-5):
        return (f(x + h) - f(x - h)) / (2.0 * h)
    return central


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
