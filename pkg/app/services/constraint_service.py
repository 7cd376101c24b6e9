"""
Hard Neumann constraints.

A constrained model is ``u(x, t) = u_inner(x, t) + correction(x, t) + shift(x)`` where the
inner model is the (embedded) network and ``shift`` is a fixed polynomial carrying the flux
data. Models are callables ``model(x, t, spatial_order, time_order, dim) -> SpatialJet`` taking
a batch of points ``x`` with shape (N, d) and times ``t`` with shape (N,).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from app.models.network_model import SpatialJet
from app.schemas.constraint_schemas import ConstraintSpec, Geometry, HyperrectShift, Strategy
from app.schemas.embedding_schemas import BoundarySide, EmbeddingKind, EmbeddingSpec
from app.utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

Model = Callable[..., SpatialJet]

UNIT_SPEC = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.UNIT_INTERVAL)


@dataclass(frozen=True)
class ShiftTerm:
    """``coefficient * prod_k factors[k](x_k)``"""
    coefficient: float
    factors: Tuple[Polynomial, ...]

    def jet(self, x: np.ndarray, dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        value = np.full(x.shape[0], self.coefficient)
        d1 = value.copy()
        d2 = value.copy()
        for k, factor in enumerate(self.factors):
            column = x[:, k]
            if k == dim:
                value = value * factor(column)
                d1 = d1 * factor.deriv(1)(column)
                d2 = d2 * factor.deriv(2)(column)
            else:
                at_k = factor(column)
                value, d1, d2 = value * at_k, d1 * at_k, d2 * at_k
        return value, d1, d2


def _as_points(x, dimension: int) -> np.ndarray:
    points = np.asarray(x, dtype=np.float64)
    if points.ndim == 0:
        return points.reshape(1, 1)
    if points.ndim == 1:
        return points.reshape(-1, dimension) if dimension > 1 and points.size == dimension else points.reshape(-1, 1)
    return points


def _as_times(t, count: int) -> np.ndarray:
    times = np.asarray(t, dtype=np.float64).reshape(-1)
    return np.full(count, float(times[0])) if times.size == 1 and count != 1 else times


class ConstraintService:

    @classmethod
    def fluxes(cls, spec: ConstraintSpec) -> Tuple[np.ndarray, np.ndarray]:
        """(A, B) as length-d arrays; absent data means zero flux."""
        d = spec.dimension
        result = []
        for name, flux in (("flux_lo", spec.flux_lo), ("flux_hi", spec.flux_hi)):
            values = np.zeros(d) if flux is None else np.atleast_1d(np.asarray(flux, dtype=np.float64))
            if values.size == 1 and d > 1:
                values = np.full(d, float(values[0]))
            if values.size != d:
                raise ConfigurationError(f"{name} has {values.size} entries, domain has {d} dimensions")
            result.append(values)
        return result[0], result[1]

    @classmethod
    def shift_terms(cls, spec: ConstraintSpec) -> List[ShiftTerm]:
        """Polynomial shift whose boundary derivatives carry the flux data."""
        flux_lo, flux_hi = cls.fluxes(spec)
        lo, hi = np.asarray(spec.domain_lo), np.asarray(spec.domain_hi)
        if spec.geometry == Geometry.ONE_SIDED_LO:
            return [ShiftTerm(float(flux_lo[0]), (Polynomial.fromroots([lo[0]]),))]
        if spec.geometry == Geometry.ONE_SIDED_HI:
            return [ShiftTerm(float(flux_hi[0]), (Polynomial.fromroots([hi[0]]),))]
        if spec.geometry in (Geometry.UNIT_INTERVAL, Geometry.GENERAL_INTERVAL):
            scale = (hi[0] - lo[0]) ** 2 if spec.normalized_shift else 1.0
            return [
                ShiftTerm(float(flux_lo[0]) / scale, (Polynomial.fromroots([lo[0], hi[0], hi[0]]),)),
                ShiftTerm(float(flux_hi[0]) / scale, (Polynomial.fromroots([lo[0], lo[0], hi[0]]),)),
            ]
        return cls._hyperrect_terms(spec, flux_lo, flux_hi, lo, hi)

    @classmethod
    def _hyperrect_terms(cls, spec: ConstraintSpec, flux_lo: np.ndarray, flux_hi: np.ndarray,
                         lo: np.ndarray, hi: np.ndarray) -> List[ShiftTerm]:
        d = spec.dimension
        terms = []
        profiled = spec.hyperrect_shift == HyperrectShift.PROFILED
        for i in range(d):
            lo_factors, hi_factors = [], []
            for j in range(d):
                if j == i:
                    lo_roots = [lo[i], hi[i], hi[i]] if profiled else [lo[i]]
                    hi_roots = [lo[i], lo[i], hi[i]] if profiled else [hi[i]]
                else:
                    lo_roots = [hi[j], hi[j]]
                    hi_roots = [lo[j], lo[j]]
                lo_factors.append(Polynomial.fromroots(lo_roots))
                hi_factors.append(Polynomial.fromroots(hi_roots))
            terms.append(ShiftTerm(float(flux_lo[i]), tuple(lo_factors)))
            terms.append(ShiftTerm(float(flux_hi[i]), tuple(hi_factors)))
        return terms

    @classmethod
    def shift_jet(cls, terms: Sequence[ShiftTerm], x: np.ndarray, dim: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        value = np.zeros(x.shape[0])
        d1, d2 = value.copy(), value.copy()
        for term in terms:
            if term.coefficient == 0.0:
                continue
            v, a, b = term.jet(x, dim)
            value, d1, d2 = value + v, d1 + a, d2 + b
        return value, d1, d2

    @classmethod
    def check_compatibility(cls, spec: ConstraintSpec, embedding: Optional[EmbeddingSpec]) -> None:
        if spec.strategy == Strategy.EXISTING_HC and spec.geometry != Geometry.UNIT_INTERVAL:
            raise ConfigurationError("existing_hc is defined on the unit interval only")
        if spec.strategy != Strategy.NEW_HC or embedding is None:
            return
        kind = embedding.kind
        if spec.geometry in (Geometry.UNIT_INTERVAL, Geometry.GENERAL_INTERVAL):
            required = EmbeddingKind.HC_COSINE
        elif spec.geometry == Geometry.HYPERRECT:
            required = EmbeddingKind.HC_COSINE_HYPERRECT
        else:
            required = EmbeddingKind.HC_COSINE_ONE_SIDED
        if kind != required:
            raise ConfigurationError(
                f"new_hc on {spec.geometry.value} needs a {required.value} embedding, got {kind.value}"
            )
        expected_side = BoundarySide.HI if spec.geometry == Geometry.ONE_SIDED_HI else BoundarySide.LO
        if kind == EmbeddingKind.HC_COSINE_ONE_SIDED and embedding.side != expected_side:
            raise ConfigurationError(f"{spec.geometry.value} needs the embedding constrained at side {expected_side.value}")
        if list(embedding.domain_lo) != list(spec.domain_lo) or list(embedding.domain_hi) != list(spec.domain_hi):
            raise ConfigurationError("Embedding and constraint domains differ")

    @classmethod
    def existing_hc_transform(cls, model: Model, x, t, spec: Optional[ConstraintSpec] = None,
                              spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
        """Subtract the inner model's own boundary slopes with the canonical cubic profiles."""
        spec = spec or UNIT_SPEC.model_copy(update={"strategy": Strategy.EXISTING_HC})
        if spec.geometry != Geometry.UNIT_INTERVAL:
            raise ConfigurationError("existing_hc is defined on the unit interval only")
        points = _as_points(x, 1)
        times = _as_times(t, points.shape[0])
        inner = model(points, times, spatial_order=spatial_order, time_order=time_order, dim=0)
        at_lo = model(np.zeros_like(points), times, spatial_order=1, time_order=time_order, dim=0)
        at_hi = model(np.ones_like(points), times, spatial_order=1, time_order=time_order, dim=0)

        column = points[:, 0]
        profile_lo, profile_hi = Polynomial.fromroots([0.0, 1.0, 1.0]), Polynomial.fromroots([0.0, 0.0, 1.0])
        p = [profile_lo.deriv(k)(column) for k in range(3)]
        q = [profile_hi.deriv(k)(column) for k in range(3)]
        slope_lo, slope_hi = at_lo.d1, at_hi.d1

        value = inner.value - p[0] * slope_lo - q[0] * slope_hi
        d1 = None if inner.d1 is None else inner.d1 - p[1] * slope_lo - q[1] * slope_hi
        d2 = None if inner.d2 is None else inner.d2 - p[2] * slope_lo - q[2] * slope_hi
        dt = d1t = None
        if inner.dt is not None:
            dt = inner.dt - p[0] * at_lo.d1t - q[0] * at_hi.d1t
        if inner.d1t is not None:
            d1t = inner.d1t - p[1] * at_lo.d1t - q[1] * at_hi.d1t
        corrected = SpatialJet(value, d1, d2, dt, d1t)
        return corrected.shifted(*cls.shift_jet(cls.shift_terms(spec), points))

    @classmethod
    def new_hc_transform(cls, model: Model, x, t, spec: Optional[ConstraintSpec] = None,
                         spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
        spec = spec or UNIT_SPEC
        cls.check_compatibility(spec, getattr(model, "embedding", None))
        points = _as_points(x, spec.dimension)
        times = _as_times(t, points.shape[0])
        inner = model(points, times, spatial_order=spatial_order, time_order=time_order, dim=0)
        return inner.shifted(*cls.shift_jet(cls.shift_terms(spec), points))

    @classmethod
    def general_interval_transform(cls, model: Model, x, t, spec: ConstraintSpec,
                                   spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
        if spec.geometry not in (Geometry.GENERAL_INTERVAL, Geometry.UNIT_INTERVAL):
            raise ConfigurationError(f"Expected an interval geometry, got {spec.geometry.value}")
        return cls.new_hc_transform(model, x, t, spec, spatial_order, time_order)

    @classmethod
    def one_sided_transform(cls, model: Model, x, t, spec: ConstraintSpec,
                            spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
        if spec.geometry not in (Geometry.ONE_SIDED_LO, Geometry.ONE_SIDED_HI):
            raise ConfigurationError(f"Expected a one-sided geometry, got {spec.geometry.value}")
        return cls.new_hc_transform(model, x, t, spec, spatial_order, time_order)

    @classmethod
    def hyperrect_transform(cls, model: Model, x, t, spec: ConstraintSpec, dim: int = 0,
                            spatial_order: int = 2, time_order: int = 1) -> SpatialJet:
        """Derivative channels are taken along coordinate ``dim``."""
        if spec.geometry != Geometry.HYPERRECT:
            raise ConfigurationError(f"Expected hyperrect geometry, got {spec.geometry.value}")
        cls.check_compatibility(spec, getattr(model, "embedding", None))
        points = _as_points(x, spec.dimension)
        if points.shape[1] != spec.dimension:
            raise ConfigurationError(f"Points have {points.shape[1]} coordinates, domain has {spec.dimension}")
        times = _as_times(t, points.shape[0])
        inner = model(points, times, spatial_order=spatial_order, time_order=time_order, dim=dim)
        return inner.shifted(*cls.shift_jet(cls.shift_terms(spec), points, dim))

    @classmethod
    def apply(cls, spec: ConstraintSpec, model: Model, x, t, spatial_order: int = 2,
              time_order: int = 1, dim: int = 0) -> SpatialJet:
        """Evaluate ``model`` under the boundary strategy of ``spec``."""
        if spec.strategy == Strategy.SOFT:
            points = _as_points(x, spec.dimension)
            return model(points, _as_times(t, points.shape[0]), spatial_order=spatial_order,
                         time_order=time_order, dim=dim)
        if spec.strategy == Strategy.EXISTING_HC:
            return cls.existing_hc_transform(model, x, t, spec, spatial_order, time_order)
        if spec.geometry == Geometry.HYPERRECT:
            return cls.hyperrect_transform(model, x, t, spec, dim, spatial_order, time_order)
        if spec.geometry in (Geometry.ONE_SIDED_LO, Geometry.ONE_SIDED_HI):
            return cls.one_sided_transform(model, x, t, spec, spatial_order, time_order)
        if spec.geometry == Geometry.GENERAL_INTERVAL:
            return cls.general_interval_transform(model, x, t, spec, spatial_order, time_order)
        return cls.new_hc_transform(model, x, t, spec, spatial_order, time_order)

    @classmethod
    def boundary_faces(cls, spec: ConstraintSpec) -> List[Tuple[int, BoundarySide]]:
        if spec.geometry == Geometry.ONE_SIDED_LO:
            return [(0, BoundarySide.LO)]
        if spec.geometry == Geometry.ONE_SIDED_HI:
            return [(0, BoundarySide.HI)]
        return [(i, side) for i in range(spec.dimension) for side in (BoundarySide.LO, BoundarySide.HI)]

    @classmethod
    def expected_flux(cls, spec: ConstraintSpec, dim: int, side: BoundarySide) -> float:
        flux_lo, flux_hi = cls.fluxes(spec)
        return float(flux_lo[dim] if side == BoundarySide.LO else flux_hi[dim])

    @classmethod
    def boundary_derivatives(cls, spec: ConstraintSpec, model: Model, t, grid: int = 5) -> Dict[Tuple[int, str], np.ndarray]:
        """
        Achieved normal derivatives of the constrained model on each constrained face.

        On intervals the faces are single points evaluated at every time in ``t``; on
        hyperrectangles each face is a ``grid``-per-dimension tensor grid at the first time.
        """
        times = np.atleast_1d(np.asarray(t, dtype=np.float64))
        lo, hi = np.asarray(spec.domain_lo), np.asarray(spec.domain_hi)
        achieved = {}
        for dim, side in cls.boundary_faces(spec):
            face_value = lo[dim] if side == BoundarySide.LO else hi[dim]
            if spec.dimension == 1:
                points = np.full((times.size, 1), face_value)
                jet = cls.apply(spec, model, points, times, spatial_order=1, time_order=0, dim=dim)
            else:
                axes = [np.linspace(lo[k], hi[k], grid) for k in range(spec.dimension)]
                axes[dim] = np.array([face_value])
                points = np.stack([axis.reshape(-1) for axis in np.meshgrid(*axes, indexing="ij")], axis=1)
                jet = cls.apply(spec, model, points, times[0], spatial_order=1, time_order=0, dim=dim)
            achieved[(dim, side.value)] = np.asarray(jet.numpy().d1, dtype=np.float64)
        return achieved

    @classmethod
    def max_boundary_violation(cls, spec: ConstraintSpec, model: Model, t, grid: int = 5) -> float:
        worst = 0.0
        for (dim, side), values in cls.boundary_derivatives(spec, model, t, grid).items():
            target = cls.expected_flux(spec, dim, BoundarySide(side))
            worst = max(worst, float(np.max(np.abs(values - target))))
        return worst
