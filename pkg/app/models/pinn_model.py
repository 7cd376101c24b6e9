from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.models.network_model import NetworkParams, NetworkTensors, SpatialJet, propagate_jet
from app.schemas.constraint_schemas import ConstraintSpec
from app.schemas.embedding_schemas import EmbeddingKind, EmbeddingSpec
from app.services.constraint_service import ConstraintService
from app.services.embedding_service import EmbeddingService


class EmbeddedNetwork:
    """The inner model: spatial embedding followed by the tanh network, time passed through."""

    def __init__(self, embedding: EmbeddingSpec, network: NetworkTensors):
        self.embedding = embedding
        self.network = network

    def __call__(self, x: np.ndarray, t: np.ndarray, spatial_order: int = 2, time_order: int = 1,
                 dim: int = 0) -> SpatialJet:
        features = EmbeddingService.feature_jet(self.embedding, x, dim)
        aux = np.asarray(t, dtype=np.float64).reshape(-1, 1)
        return propagate_jet(self.network, features, aux, spatial_order, time_order)


class BoundModel:
    """A PINN model with fixed parameters (tape-tracked or constant), evaluated under its strategy."""

    def __init__(self, pinn: "PinnModel", network: NetworkTensors):
        self.pinn = pinn
        self.inner = EmbeddedNetwork(pinn.embedding, network)

    @property
    def enforces_boundary(self) -> bool:
        return self.pinn.enforces_boundary

    @property
    def penalized_sides(self) -> Tuple[int, ...]:
        return self.pinn.constraint.penalized_sides

    def __call__(self, x, t, spatial_order: int = 2, time_order: int = 1, dim: int = 0) -> SpatialJet:
        return ConstraintService.apply(self.pinn.constraint, self.inner, x, t, spatial_order, time_order, dim)


class PinnModel:
    def __init__(self, embedding: Optional[EmbeddingSpec], constraint: ConstraintSpec):
        self.embedding = embedding or EmbeddingSpec(kind=EmbeddingKind.IDENTITY,
                                                    domain_lo=constraint.domain_lo,
                                                    domain_hi=constraint.domain_hi)
        self.constraint = constraint
        ConstraintService.check_compatibility(constraint, self.embedding)

    @property
    def enforces_boundary(self) -> bool:
        return self.constraint.enforces_boundary

    def input_width(self) -> int:
        return EmbeddingService.output_width(self.embedding) + 1

    def layer_sizes(self, hidden: Sequence[int]) -> Tuple[int, ...]:
        return (self.input_width(), *hidden, 1)

    def initial_params(self, hidden: Sequence[int], seed: int) -> NetworkParams:
        return NetworkParams.glorot(self.layer_sizes(hidden), seed)

    def bind(self, params: Union[NetworkParams, NetworkTensors]) -> BoundModel:
        network = NetworkTensors.constant(params) if isinstance(params, NetworkParams) else params
        return BoundModel(self, network)

    def predict(self, params: NetworkParams, x, t) -> np.ndarray:
        """Values of the constrained model at matching arrays of points and times."""
        x = np.asarray(x, dtype=np.float64)
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), x.shape[:1] if x.ndim > 1 else x.shape)
        jet = self.bind(params)(x, t, spatial_order=0, time_order=0)
        return np.asarray(jet.numpy().value, dtype=np.float64)
