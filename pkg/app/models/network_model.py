"""
Dense tanh networks and their spatial jets.

The trainable state is an immutable ``NetworkParams``. Spatial derivatives are obtained
by pushing truncated Taylor coefficients (value, d/dx, d²/dx², d/dt, d²/dxdt) through the
layers; every coefficient is a ``Tensor`` so that parameter gradients flow through the
derivative channels as well as through the value.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from app.models.tensor import Tensor, data_of, leaves
from app.utils.exceptions import ConfigurationError, TrainingError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1

Channel = Union[Tensor, np.ndarray]


@dataclass(frozen=True)
class NetworkParams:
    layer_sizes: Tuple[int, ...]
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = tuple(int(size) for size in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(size <= 0 for size in sizes):
            raise ConfigurationError(f"Invalid layer sizes {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ConfigurationError("Number of weight/bias arrays does not match layer sizes")
        frozen_weights, frozen_biases = [], []
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            weight = np.array(weight, dtype=np.float64)
            bias = np.array(bias, dtype=np.float64)
            if weight.shape != (sizes[index], sizes[index + 1]) or bias.shape != (sizes[index + 1],):
                raise ConfigurationError(
                    f"Layer {index}: expected weight {(sizes[index], sizes[index + 1])} and bias "
                    f"{(sizes[index + 1],)}, got {weight.shape} and {bias.shape}"
                )
            if not (np.all(np.isfinite(weight)) and np.all(np.isfinite(bias))):
                raise ConfigurationError(f"Layer {index} contains non-finite entries")
            weight.flags.writeable = False
            bias.flags.writeable = False
            frozen_weights.append(weight)
            frozen_biases.append(bias)
        object.__setattr__(self, "weights", tuple(frozen_weights))
        object.__setattr__(self, "biases", tuple(frozen_biases))

    @classmethod
    def glorot(cls, layer_sizes: Sequence[int], seed: int) -> "NetworkParams":
        """Glorot-uniform weights and zero biases, reproducible per seed."""
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(tuple(layer_sizes), tuple(weights), tuple(biases))

    @classmethod
    def zeros_like(cls, params: "NetworkParams") -> "NetworkParams":
        return cls.from_arrays(params.layer_sizes, [np.zeros_like(array) for array in params.arrays()])

    @classmethod
    def from_arrays(cls, layer_sizes: Sequence[int], arrays: Sequence[np.ndarray]) -> "NetworkParams":
        """Inverse of ``arrays()``: (W0, b0, W1, b1, ...)."""
        return cls(tuple(layer_sizes), tuple(arrays[0::2]), tuple(arrays[1::2]))

    def arrays(self) -> List[np.ndarray]:
        interleaved = []
        for weight, bias in zip(self.weights, self.biases):
            interleaved.extend((weight, bias))
        return interleaved

    @property
    def input_width(self) -> int:
        return self.layer_sizes[0]

    @property
    def parameter_count(self) -> int:
        return sum(array.size for array in self.arrays())

    def save(self, path: Union[str, Path]) -> Path:
        """Write a versioned ``.npz`` checkpoint; float64 arrays round-trip bit-exactly."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "format_version": np.array(CHECKPOINT_FORMAT_VERSION),
            "layer_sizes": np.array(self.layer_sizes, dtype=np.int64),
        }
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            payload[f"W{index}"] = weight
            payload[f"b{index}"] = bias
        with open(path, "wb") as handle:
            np.savez(handle, **payload)
        logger.info(f"Checkpoint written to {path} ({self.parameter_count} parameters)")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NetworkParams":
        with np.load(Path(path)) as archive:
            version = int(archive["format_version"])
            if version != CHECKPOINT_FORMAT_VERSION:
                raise ConfigurationError(f"Unsupported checkpoint format version {version}")
            sizes = tuple(int(size) for size in archive["layer_sizes"])
            count = len(sizes) - 1
            weights = tuple(archive[f"W{index}"] for index in range(count))
            biases = tuple(archive[f"b{index}"] for index in range(count))
        return cls(sizes, weights, biases)


class NetworkTensors(NamedTuple):
    """Network parameters lifted onto the tape."""
    weights: List[Tensor]
    biases: List[Tensor]

    @classmethod
    def constant(cls, params: NetworkParams) -> "NetworkTensors":
        return cls([Tensor(w) for w in params.weights], [Tensor(b) for b in params.biases])

    @classmethod
    def trainable(cls, params: NetworkParams) -> "NetworkTensors":
        return cls(leaves(params.weights), leaves(params.biases))


@dataclass(frozen=True)
class FeatureJet:
    """Input features and their first/second derivatives along one spatial coordinate, shape (N, k)."""
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


@dataclass(frozen=True)
class SpatialJet:
    value: Channel
    d1: Optional[Channel] = None
    d2: Optional[Channel] = None
    dt: Optional[Channel] = None
    d1t: Optional[Channel] = None

    def shifted(self, value: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> "SpatialJet":
        """Add an explicit (parameter-free) function of x to the jet."""
        return replace(
            self,
            value=self.value + value,
            d1=None if self.d1 is None else self.d1 + d1,
            d2=None if self.d2 is None else self.d2 + d2,
        )

    def numpy(self) -> "SpatialJet":
        return SpatialJet(*(None if channel is None else data_of(channel) for channel in
                            (self.value, self.d1, self.d2, self.dt, self.d1t)))


def _maybe_matmul(channel: Optional[Channel], weight: Tensor) -> Optional[Tensor]:
    return None if channel is None else channel @ weight


def propagate_jet(network: NetworkTensors, features: FeatureJet, aux: np.ndarray,
                  spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
    """
    Push the jet of the input through the tanh layers.

    ``aux`` holds the untransformed extra inputs; its first column is the time coordinate and
    seeds the ``dt`` channel. The output layer is linear.
    """
    value = np.hstack([features.value, aux])
    width = value.shape[1]
    expected = network.weights[0].shape[0]
    if width != expected:
        raise ConfigurationError(f"Network expects {expected} inputs, got {width}")
    padding = np.zeros_like(aux)
    a: Channel = value
    a_x: Optional[Channel] = np.hstack([features.d1, padding]) if spatial_order >= 1 else None
    a_xx: Optional[Channel] = np.hstack([features.d2, padding]) if spatial_order >= 2 else None
    a_t: Optional[Channel] = None
    if time_order >= 1 and aux.shape[1] >= 1:
        a_t = np.zeros_like(value)
        a_t[:, features.value.shape[1]] = 1.0
    a_xt: Optional[Channel] = None

    last = len(network.weights) - 1
    for index, (weight, bias) in enumerate(zip(network.weights, network.biases)):
        z = a @ weight + bias
        z_x = _maybe_matmul(a_x, weight)
        z_xx = _maybe_matmul(a_xx, weight)
        z_t = _maybe_matmul(a_t, weight)
        z_xt = _maybe_matmul(a_xt, weight)
        if index == last:
            a, a_x, a_xx, a_t, a_xt = z, z_x, z_xx, z_t, z_xt
            break
        s = z.tanh()
        ds = 1.0 - s * s
        dds = -2.0 * s * ds if (z_xx is not None or (z_x is not None and z_t is not None)) else None
        a = s
        a_x = None if z_x is None else ds * z_x
        a_t = None if z_t is None else ds * z_t
        a_xx = None if z_xx is None else dds * z_x * z_x + ds * z_xx
        if z_x is not None and z_t is not None:
            a_xt = dds * z_x * z_t
            if z_xt is not None:
                a_xt = a_xt + ds * z_xt
        else:
            a_xt = None

    def _column(channel: Optional[Channel]) -> Optional[Channel]:
        return None if channel is None else channel.reshape(-1)

    return SpatialJet(_column(a), _column(a_x), _column(a_xx), _column(a_t), _column(a_xt))


def forward(params: NetworkParams, inputs: Union[Sequence[float], np.ndarray]) -> Union[float, np.ndarray]:
    """Plain evaluation of the tanh MLP; a 1-D input gives a float, a batch (N, width) gives (N,)."""
    batch = np.asarray(inputs, dtype=np.float64)
    single = batch.ndim == 1
    batch = np.atleast_2d(batch)
    if batch.shape[1] != params.input_width:
        raise ConfigurationError(f"Network expects {params.input_width} inputs, got {batch.shape[1]}")
    activation = batch
    last = len(params.weights) - 1
    for index, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        activation = activation @ weight + bias
        if index != last:
            activation = np.tanh(activation)
    output = activation[:, 0]
    return float(output[0]) if single else output


def forward_jet(params: NetworkParams, x, aux_inputs, embedding=None, dim: int = 0) -> SpatialJet:
    """
    Exact value, d/dx and d²/dx² of the (embedded) network output at x, plus d/dt and d²/dxdt
    where t is the first auxiliary input. Scalars in give floats out.
    """
    from app.services.embedding_service import EmbeddingService

    x_array = np.asarray(x, dtype=np.float64)
    single = x_array.ndim == 0
    x_batch = x_array.reshape(-1, 1) if x_array.ndim <= 1 else x_array
    count = x_batch.shape[0]
    aux = np.asarray(aux_inputs, dtype=np.float64)
    if aux.ndim == 0:
        aux = np.full((count, 1), float(aux))
    elif aux.ndim == 1:
        aux = aux.reshape(-1, 1) if aux.shape[0] == count and not single else np.tile(aux, (count, 1))
    features = EmbeddingService.feature_jet(embedding, x_batch, dim)
    jet = propagate_jet(NetworkTensors.constant(params), features, aux).numpy()
    if single:
        return SpatialJet(*(None if channel is None else float(channel[0]) for channel in
                            (jet.value, jet.d1, jet.d2, jet.dt, jet.d1t)))
    return jet


LossEvaluator = Callable[[NetworkTensors], Union[Tensor, Tuple[Tensor, ...]]]


def value_and_gradient(params: NetworkParams, loss_evaluator: LossEvaluator,
                       batch_id: int = 0) -> Tuple[Union[Tensor, Tuple[Tensor, ...]], NetworkParams]:
    """
    Evaluate ``loss_evaluator`` on tape-tracked parameters and return its outputs together with
    dL/dθ shaped like ``params``. When the evaluator returns a tuple, its first entry is the loss.
    """
    network = NetworkTensors.trainable(params)
    outputs = loss_evaluator(network)
    loss = outputs[0] if isinstance(outputs, tuple) else outputs
    loss = Tensor.lift(loss)
    value = float(loss.data)
    if not np.isfinite(value):
        raise TrainingError(f"Non-finite loss {value} on collocation batch {batch_id}", batch_id=batch_id)
    loss.backward()
    grads = [
        np.zeros_like(leaf.data) if leaf.grad is None else leaf.grad
        for pair in zip(network.weights, network.biases) for leaf in pair
    ]
    if not all(np.all(np.isfinite(grad)) for grad in grads):
        raise TrainingError(f"Non-finite gradient of loss {value} on collocation batch {batch_id}", batch_id=batch_id)
    return outputs, NetworkParams.from_arrays(params.layer_sizes, grads)


def loss_gradient(params: NetworkParams, loss_evaluator: LossEvaluator, batch_id: int = 0) -> NetworkParams:
    return value_and_gradient(params, loss_evaluator, batch_id)[1]
