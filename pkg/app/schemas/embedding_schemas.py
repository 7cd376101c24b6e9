from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class EmbeddingKind(str, Enum):
    IDENTITY = "identity"
    RANDOM_COS_SIN = "random_cos_sin"
    HC_COSINE = "hc_cosine"
    HC_COSINE_ONE_SIDED = "hc_cosine_one_sided"
    HC_COSINE_HYPERRECT = "hc_cosine_hyperrect"


class BoundarySide(str, Enum):
    LO = "lo"
    HI = "hi"


class EmbeddingSpec(BaseModel):
    """
    Spatial input transformation. Either ``frequencies`` is given explicitly or it is sampled
    from ``n_frequencies``, ``sigma`` and the frequency seed when the run is resolved.
    """
    kind: EmbeddingKind = Field(default=EmbeddingKind.IDENTITY, example="hc_cosine")
    frequencies: Optional[List[float]] = Field(None, example=[1, 5, 12])
    n_frequencies: Optional[int] = Field(None, ge=1, example=20)
    sigma: float = Field(default=20.0, gt=0, description="Scale of the Gaussian frequency distribution")
    rng_seed: Optional[int] = Field(None, description="Frequency seed; runs take it from [seeds]")
    domain_lo: List[float] = Field(default_factory=lambda: [0.0], min_length=1, example=[0.0])
    domain_hi: List[float] = Field(default_factory=lambda: [1.0], min_length=1, example=[1.0])
    side: BoundarySide = Field(default=BoundarySide.LO, description="Constrained end for hc_cosine_one_sided")
    passthrough_dims: List[int] = Field(default_factory=list, description="Hyperrectangle dimensions fed to the network untransformed")

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_domain(self) -> "EmbeddingSpec":
        if len(self.domain_lo) != len(self.domain_hi):
            raise ValueError("domain_lo and domain_hi must have the same length")
        if any(lo >= hi for lo, hi in zip(self.domain_lo, self.domain_hi)):
            raise ValueError("domain_lo must be strictly below domain_hi in every dimension")
        if self.kind != EmbeddingKind.IDENTITY and self.frequencies is None and self.n_frequencies is None:
            raise ValueError(f"{self.kind.value} embedding needs frequencies or n_frequencies")
        if self.frequencies is not None and len(self.frequencies) == 0:
            raise ValueError("frequency list must not be empty")
        if any(dim < 0 or dim >= len(self.domain_lo) for dim in self.passthrough_dims):
            raise ValueError("passthrough_dims out of range")
        return self

    @property
    def dimension(self) -> int:
        return len(self.domain_lo)

    @property
    def size(self) -> int:
        """Number of frequencies n."""
        if self.frequencies is not None:
            return len(self.frequencies)
        return self.n_frequencies or 0

    @property
    def is_derivative_vanishing(self) -> bool:
        return self.kind in (EmbeddingKind.HC_COSINE, EmbeddingKind.HC_COSINE_HYPERRECT,
                             EmbeddingKind.HC_COSINE_ONE_SIDED)
