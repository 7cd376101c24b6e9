import logging
import warnings
from typing import Callable, Dict, Optional, Union

import numpy as np
import pandas as pd
from scipy.integrate import IntegrationWarning, quad

from app.dependencies import get_settings
from app.models.problem_model import DiffusionProblem
from app.models.series_model import FourierSeriesSolution
from app.utils.exceptions import ConfigurationError, NumericError

logger = logging.getLogger(__name__)
settings = get_settings()

QUADRATURE_SLACK = 100.0

Predictor = Callable[[np.ndarray, np.ndarray], np.ndarray]


class OracleService:
    """Cosine-series solutions of the zero-flux diffusion problem on [0, 1]."""

    @classmethod
    def fourier_coefficients(cls, g: Callable, terms: int, tolerance: Optional[float] = None,
                             modes: Optional[Dict[int, float]] = None) -> np.ndarray:
        """aⱼ = 2∫₀¹ g(x) cos(πjx) dx for j = 0..terms; exact when ``modes`` lists g's cosine terms."""
        if terms < 1:
            raise ConfigurationError(f"Series truncation must be at least 1, got {terms}")
        if modes is not None:
            coefficients = np.zeros(terms + 1)
            for j, amplitude in modes.items():
                if j == 0:
                    coefficients[0] = 2.0 * amplitude
                elif j <= terms:
                    coefficients[j] = amplitude
            return coefficients
        tolerance = settings.quadrature_tolerance if tolerance is None else tolerance
        coefficients = np.empty(terms + 1)
        for j in range(terms + 1):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", IntegrationWarning)
                if j == 0:
                    integral, error = quad(g, 0.0, 1.0, epsabs=tolerance, epsrel=tolerance, limit=200)
                else:
                    integral, error = quad(g, 0.0, 1.0, weight="cos", wvar=np.pi * j,
                                           epsabs=tolerance, epsrel=tolerance, limit=200)
            issues = [str(w.message) for w in caught if issubclass(w.category, IntegrationWarning)]
            if not np.isfinite(integral) or (issues and error > QUADRATURE_SLACK * tolerance):
                raise NumericError(f"Quadrature for coefficient {j} did not converge (error estimate {error:.3g}): "
                                   f"{'; '.join(issues)}", index=j)
            if issues:
                logger.warning(f"Tolerated quadrature warning for coefficient {j} (error estimate {error:.3g})")
            coefficients[j] = 2.0 * integral
        return coefficients

    @classmethod
    def solve(cls, problem: DiffusionProblem, terms: Optional[int] = None,
              tolerance: Optional[float] = None) -> FourierSeriesSolution:
        if not problem.has_zero_flux:
            raise ConfigurationError(f"No cosine-series oracle for {problem.name}: fluxes are nonzero")
        terms = settings.series_terms if terms is None else terms
        coefficients = cls.fourier_coefficients(problem.initial_condition, terms, tolerance, problem.modes)
        logger.debug(f"Series oracle for {problem.name}: {np.count_nonzero(coefficients)} nonzero of {terms + 1} coefficients")
        return FourierSeriesSolution(coefficients, problem.diffusivity)

    @classmethod
    def series_eval(cls, solution: FourierSeriesSolution, x, t) -> Union[float, np.ndarray]:
        value = solution.jet(x, t).value
        return float(value) if np.ndim(value) == 0 else value

    @classmethod
    def evaluation_grid(cls, nx: int, nt: int):
        if nx < 2 or nt < 2:
            raise ConfigurationError(f"Evaluation grid needs at least 2×2 points, got {nx}×{nt}")
        x, t = np.meshgrid(np.linspace(0.0, 1.0, nx), np.linspace(0.0, 1.0, nt), indexing="ij")
        return x.reshape(-1), t.reshape(-1)

    @classmethod
    def relative_l2_error(cls, model: Union[Predictor, FourierSeriesSolution], solution: FourierSeriesSolution,
                          grid_nx: int = 256, grid_nt: int = 101) -> float:
        """‖model − solution‖₂ / ‖solution‖₂ on a uniform (x, t) grid over [0, 1]²."""
        x, t = cls.evaluation_grid(grid_nx, grid_nt)
        exact = cls.series_eval(solution, x, t)
        if isinstance(model, FourierSeriesSolution):
            predicted = cls.series_eval(model, x, t)
        else:
            predicted = np.asarray(model(x, t), dtype=np.float64).reshape(-1)
        norm = np.linalg.norm(exact)
        if norm == 0.0:
            raise NumericError("Reference solution vanishes on the evaluation grid")
        return float(np.linalg.norm(predicted - exact) / norm)

    @classmethod
    def residual_self_check(cls, solution: FourierSeriesSolution, x, t) -> float:
        """Max |∂ₜu − D∂²ₓu| of the truncated series at the sample points."""
        jet = solution.jet(x, t)
        return float(np.max(np.abs(jet.dt - solution.diffusivity * jet.d2)))

    @classmethod
    def grid_frame(cls, solution: FourierSeriesSolution, nx: int = 256, nt: int = 101) -> pd.DataFrame:
        x, t = cls.evaluation_grid(nx, nt)
        return pd.DataFrame({"x": x, "t": t, "u": cls.series_eval(solution, x, t)})
