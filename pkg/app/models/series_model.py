from dataclasses import dataclass

import numpy as np

from app.models.network_model import SpatialJet
from app.utils.exceptions import ConfigurationError


@dataclass(frozen=True)
class FourierSeriesSolution:
    """u(x, t) = a₀/2 + Σ_{j=1..N} aⱼ exp(−Dπ²j²t) cos(πjx)"""
    coefficients: np.ndarray
    diffusivity: float

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=np.float64)
        if coefficients.ndim != 1 or coefficients.size < 2:
            raise ConfigurationError("A series solution needs a₀ and at least one mode")
        if not np.all(np.isfinite(coefficients)):
            raise ConfigurationError("Series coefficients must be finite")
        if not self.diffusivity > 0:
            raise ConfigurationError(f"Diffusivity must be positive, got {self.diffusivity}")
        coefficients.flags.writeable = False
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def truncation(self) -> int:
        return self.coefficients.size - 1

    def truncated(self, terms: int) -> "FourierSeriesSolution":
        return FourierSeriesSolution(self.coefficients[: terms + 1], self.diffusivity)

    def jet(self, x, t) -> SpatialJet:
        """Term-wise exact value and derivatives; x and t broadcast against each other."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(t, dtype=np.float64))
        modes = np.flatnonzero(self.coefficients[1:]) + 1
        a = self.coefficients[modes]
        rate = np.pi * modes
        decay = np.exp(-self.diffusivity * rate ** 2 * t[..., None])
        cos, sin = np.cos(rate * x[..., None]), np.sin(rate * x[..., None])
        weighted = a * decay
        value = 0.5 * self.coefficients[0] + np.sum(weighted * cos, axis=-1)
        d1 = -np.sum(weighted * rate * sin, axis=-1)
        d2 = -np.sum(weighted * rate ** 2 * cos, axis=-1)
        dt = -self.diffusivity * np.sum(weighted * rate ** 2 * cos, axis=-1)
        d1t = self.diffusivity * np.sum(weighted * rate ** 3 * sin, axis=-1)
        return SpatialJet(value, d1, d2, dt, d1t)


class SeriesModel:
    """Adapter exposing a series solution through the model-call interface used by the losses."""
    enforces_boundary = False

    def __init__(self, solution: FourierSeriesSolution):
        self.solution = solution

    def __call__(self, x, t, spatial_order: int = 2, time_order: int = 1, dim: int = 0) -> SpatialJet:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[:, 0]
        return self.solution.jet(x, t)
