from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from app.utils.exceptions import ConfigurationError


@dataclass(frozen=True)
class DiffusionProblem:
    """∂ₜu = D ∂²ₓu on [0, 1] with u(x, 0) = g(x), ∂ₓu(0, t) = A and ∂ₓu(1, t) = B."""
    name: str
    initial_condition: Callable = field(repr=False)
    diffusivity: float
    flux_lo: float = 0.0
    flux_hi: float = 0.0
    expression: str = ""
    # g = sum_j modes[j] * cos(j pi x) when g is a finite cosine sum
    modes: Optional[Dict[int, float]] = None

    def __post_init__(self):
        if not (self.diffusivity > 0 and np.isfinite(self.diffusivity)):
            raise ConfigurationError(f"Diffusivity must be positive, got {self.diffusivity}")

    @property
    def has_zero_flux(self) -> bool:
        return self.flux_lo == 0.0 and self.flux_hi == 0.0

    def flux(self, side: np.ndarray) -> np.ndarray:
        """Neumann data per boundary point; side 0 is x=0, side 1 is x=1."""
        return np.where(np.asarray(side) == 0, self.flux_lo, self.flux_hi).astype(np.float64)


@dataclass(frozen=True)
class CollocationSet:
    pde_x: np.ndarray
    pde_t: np.ndarray
    ic_x: np.ndarray
    bc_side: np.ndarray
    bc_t: np.ndarray
    seed: int

    def __post_init__(self):
        if self.pde_x.shape != self.pde_t.shape or self.bc_side.shape != self.bc_t.shape:
            raise ConfigurationError("Collocation coordinate arrays have mismatched lengths")
        for array in (self.pde_x, self.pde_t, self.ic_x, self.bc_side, self.bc_t):
            array.flags.writeable = False

    @property
    def n_pde(self) -> int:
        return self.pde_x.size

    @property
    def n_ic(self) -> int:
        return self.ic_x.size

    @property
    def n_bc(self) -> int:
        return self.bc_t.size

    @property
    def bc_x(self) -> np.ndarray:
        return self.bc_side.astype(np.float64)
