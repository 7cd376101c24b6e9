import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.models.problem_model import CollocationSet, DiffusionProblem
from app.models.tensor import Tensor, data_of, mean_square
from app.schemas.problem_schemas import CollocationCounts, LossWeights, ProblemSection, ProblemSummary
from app.utils.exceptions import ConfigurationError, TrainingError
from app.utils.expression_parser import parse_expression

logger = logging.getLogger(__name__)

FULL_SCALE_COLLOCATION = CollocationCounts(n_pde=20000, n_ic=500, n_bc=1000)


def _cosine_sum(modes: Dict[int, float]):
    def g(x):
        x = np.asarray(x, dtype=np.float64)
        return sum(coefficient * np.cos(j * np.pi * x) for j, coefficient in modes.items())
    return g


def _polynom3(x):
    x = np.asarray(x, dtype=np.float64)
    return 3.0 * x ** 2 - 2.0 * x ** 3


def _polynom4(x):
    x = np.asarray(x, dtype=np.float64)
    return 16.0 * x ** 4 - 32.0 * x ** 3 + 16.0 * x ** 2


BUILTIN_PROBLEMS = {
    "low_frequency": lambda: DiffusionProblem(
        "low_frequency", _cosine_sum({2: 1.0}), (2.0 * np.pi) ** -2,
        expression="cos(2*pi*x)", modes={2: 1.0}),
    "high_frequency": lambda: DiffusionProblem(
        "high_frequency", _cosine_sum({50: 1.0}), (50.0 * np.pi) ** -2,
        expression="cos(50*pi*x)", modes={50: 1.0}),
    "multiscale": lambda: DiffusionProblem(
        "multiscale", _cosine_sum({2: 1.0, 50: 0.1}), (50.0 * np.pi) ** -2,
        expression="cos(2*pi*x) + 0.1*cos(50*pi*x)", modes={2: 1.0, 50: 0.1}),
    "polynom3": lambda: DiffusionProblem(
        "polynom3", _polynom3, np.pi ** -2, expression="3*x**2 - 2*x**3"),
    "polynom4": lambda: DiffusionProblem(
        "polynom4", _polynom4, np.pi ** -2, expression="16*x**4 - 32*x**3 + 16*x**2"),
}


class ProblemService:

    @classmethod
    def builtin_names(cls) -> List[str]:
        return list(BUILTIN_PROBLEMS)

    @classmethod
    def builtin_problem(cls, name: str) -> DiffusionProblem:
        try:
            return BUILTIN_PROBLEMS[name]()
        except KeyError:
            raise ConfigurationError(f"Unknown problem '{name}'; built-ins are {cls.builtin_names()}") from None

    @classmethod
    def from_section(cls, section: ProblemSection) -> DiffusionProblem:
        """Built-in by name, or a custom problem parsed from its expression."""
        if section.expression is None:
            problem = cls.builtin_problem(section.name)
            if section.flux_lo or section.flux_hi:
                logger.warning(f"Ignoring fluxes given for built-in problem {section.name}")
            return problem
        return DiffusionProblem(
            name=section.name,
            initial_condition=parse_expression(section.expression),
            diffusivity=section.diffusivity,
            flux_lo=section.flux_lo,
            flux_hi=section.flux_hi,
            expression=section.expression,
        )

    @classmethod
    def summary(cls, problem: DiffusionProblem) -> ProblemSummary:
        return ProblemSummary(name=problem.name, expression=problem.expression,
                              diffusivity=problem.diffusivity, flux_lo=problem.flux_lo,
                              flux_hi=problem.flux_hi, modes=problem.modes)

    @classmethod
    def sample_collocation(cls, counts: Optional[CollocationCounts] = None, seed: int = 0) -> CollocationSet:
        counts = counts or FULL_SCALE_COLLOCATION
        rng = np.random.default_rng(seed)
        pde_x = rng.uniform(0.0, 1.0, counts.n_pde)
        pde_t = rng.uniform(0.0, 1.0, counts.n_pde)
        ic_x = rng.uniform(0.0, 1.0, counts.n_ic)
        bc_side = rng.integers(0, 2, counts.n_bc)
        bc_t = rng.uniform(0.0, 1.0, counts.n_bc)
        return CollocationSet(pde_x, pde_t, ic_x, bc_side, bc_t, seed)

    @classmethod
    def _checked(cls, residual, label: str, batch_id: int):
        values = data_of(residual)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise TrainingError(
                f"Non-finite {label} residual at point {int(bad[0])} of collocation batch {batch_id}",
                batch_id=batch_id, point_index=int(bad[0]),
            )
        return residual

    @classmethod
    def composite_loss(cls, model, problem: DiffusionProblem, colloc: CollocationSet,
                       weights: Optional[LossWeights] = None, batch_id: int = 0) -> Tuple[Tensor, Tensor, Tensor, Tensor]:
        """
        (total, pde_mse, ic_mse, bc_mse) for ``model(x, t, spatial_order, time_order)``.
        Only boundary ends the model does not enforce itself contribute to the total.
        """
        weights = weights or LossWeights()
        interior = model(colloc.pde_x, colloc.pde_t, spatial_order=2, time_order=1)
        pde_residual = cls._checked(interior.dt - problem.diffusivity * interior.d2, "PDE", batch_id)

        initial = model(colloc.ic_x, np.zeros_like(colloc.ic_x), spatial_order=0, time_order=0)
        ic_residual = cls._checked(initial.value - problem.initial_condition(colloc.ic_x), "IC", batch_id)

        boundary = model(colloc.bc_x, colloc.bc_t, spatial_order=1, time_order=0)
        bc_residual = cls._checked(boundary.d1 - problem.flux(colloc.bc_side), "BC", batch_id)

        pde_mse, ic_mse, bc_mse = mean_square(pde_residual), mean_square(ic_residual), mean_square(bc_residual)
        total = weights.lambda_pde * pde_mse + weights.lambda_ic * ic_mse
        sides = getattr(model, "penalized_sides", None)
        if sides is None:
            sides = () if getattr(model, "enforces_boundary", False) else (0, 1)
        penalized = np.isin(colloc.bc_side, sides).reshape(data_of(bc_residual).shape)
        if penalized.all():
            total = total + weights.lambda_bc * bc_mse
        elif penalized.any():
            # mean over the penalized points only
            masked = mean_square(bc_residual * penalized.astype(np.float64)) * (penalized.size / penalized.sum())
            total = total + weights.lambda_bc * masked
        return total, pde_mse, ic_mse, bc_mse
