from enum import Enum
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

Flux = Union[float, List[float]]


class Strategy(str, Enum):
    SOFT = "soft"
    EXISTING_HC = "existing_hc"
    NEW_HC = "new_hc"


class Geometry(str, Enum):
    UNIT_INTERVAL = "unit_interval"
    GENERAL_INTERVAL = "general_interval"
    ONE_SIDED_LO = "one_sided_lo"
    ONE_SIDED_HI = "one_sided_hi"
    HYPERRECT = "hyperrect"


class HyperrectShift(str, Enum):
    PROFILED = "profiled"
    VERBATIM = "verbatim"


class ConstraintSpec(BaseModel):
    strategy: Strategy = Field(default=Strategy.SOFT, example="new_hc")
    geometry: Geometry = Field(default=Geometry.UNIT_INTERVAL, example="unit_interval")
    flux_lo: Optional[Flux] = Field(None, description="Neumann data A (per dimension on hyperrectangles)")
    flux_hi: Optional[Flux] = Field(None, description="Neumann data B (per dimension on hyperrectangles)")
    domain_lo: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    domain_hi: List[float] = Field(default_factory=lambda: [1.0], min_length=1)
    normalized_shift: bool = Field(default=False, description="Divide interval shift terms by (β−α)² so the achieved flux equals the data")
    hyperrect_shift: HyperrectShift = Field(
        default=HyperrectShift.PROFILED,
        description="profiled: each face flux is carried by a shift in its own coordinate only, so d=1 reduces "
                    "to the interval transform; verbatim: the literal product-form shift over all coordinates",
    )

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_geometry(self) -> "ConstraintSpec":
        if len(self.domain_lo) != len(self.domain_hi):
            raise ValueError("domain_lo and domain_hi must have the same length")
        if any(lo >= hi for lo, hi in zip(self.domain_lo, self.domain_hi)):
            raise ValueError("domain_lo must be strictly below domain_hi in every dimension")
        if self.geometry == Geometry.ONE_SIDED_LO and self.flux_hi is not None:
            raise ValueError("one_sided_lo carries a single flux (flux_lo)")
        if self.geometry == Geometry.ONE_SIDED_HI and self.flux_lo is not None:
            raise ValueError("one_sided_hi carries a single flux (flux_hi)")
        if self.geometry == Geometry.UNIT_INTERVAL and (self.domain_lo != [0.0] or self.domain_hi != [1.0]):
            raise ValueError("unit_interval geometry requires the domain [0, 1]")
        if self.geometry != Geometry.HYPERRECT and len(self.domain_lo) != 1:
            raise ValueError(f"{self.geometry.value} geometry is one-dimensional")
        return self

    @property
    def dimension(self) -> int:
        return len(self.domain_lo)

    @property
    def enforces_boundary(self) -> bool:
        """True when every boundary face is built into the model."""
        return not self.penalized_sides

    @property
    def penalized_sides(self) -> Tuple[int, ...]:
        """Boundary ends (0 lower, 1 upper) whose flux the loss still has to train."""
        if self.strategy == Strategy.SOFT:
            return (0, 1)
        if self.geometry == Geometry.ONE_SIDED_LO:
            return (1,)
        if self.geometry == Geometry.ONE_SIDED_HI:
            return (0,)
        return ()
