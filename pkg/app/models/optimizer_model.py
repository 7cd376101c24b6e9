from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from app.models.network_model import NetworkParams
from app.utils.exceptions import ConfigurationError, TrainingError


@dataclass(frozen=True)
class AdamState:
    """Moment estimates kept in the same interleaved order as ``NetworkParams.arrays()``."""
    first_moment: Tuple[np.ndarray, ...]
    second_moment: Tuple[np.ndarray, ...]
    step_count: int = 0
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f"Learning rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigurationError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0:
            raise ConfigurationError("Adam epsilon must be positive")

    @classmethod
    def initial(cls, params: NetworkParams, learning_rate: float = 1e-4, beta1: float = 0.9,
                beta2: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        zeros = tuple(np.zeros_like(array) for array in params.arrays())
        return cls(zeros, tuple(np.zeros_like(array) for array in zeros), 0,
                   learning_rate, beta1, beta2, epsilon)


def adam_step(params: NetworkParams, grads: NetworkParams, state: AdamState) -> Tuple[NetworkParams, AdamState]:
    """One bias-corrected Adam update; returns new params and state, inputs are left untouched."""
    if grads.layer_sizes != params.layer_sizes:
        raise ConfigurationError(f"Gradient shape {grads.layer_sizes} does not match {params.layer_sizes}")
    step = state.step_count + 1
    first_correction = 1.0 - state.beta1 ** step
    second_correction = 1.0 - state.beta2 ** step
    updated, first_moment, second_moment = [], [], []
    for value, grad, m, v in zip(params.arrays(), grads.arrays(), state.first_moment, state.second_moment):
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / first_correction
        v_hat = v / second_correction
        updated.append(value - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        first_moment.append(m)
        second_moment.append(v)
    if not all(np.all(np.isfinite(array)) for array in updated):
        raise TrainingError(f"Adam step {step} produced non-finite parameters")
    new_state = replace(state, first_moment=tuple(first_moment), second_moment=tuple(second_moment), step_count=step)
    return NetworkParams.from_arrays(params.layer_sizes, updated), new_state
