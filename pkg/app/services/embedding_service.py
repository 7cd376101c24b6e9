import logging
from typing import List, Optional, Tuple

import numpy as np

from app.models.network_model import FeatureJet
from app.schemas.embedding_schemas import BoundarySide, EmbeddingKind, EmbeddingSpec
from app.utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

CANONICALIZATION_INTEGER = "round-nearest, absolute value, resample on zero or duplicate"
CANONICALIZATION_REAL = "real-valued Gaussian draws, sign kept"
CANONICALIZATION_ONE_SIDED = "leading 1, absolute value of Gaussian draws"
CANONICALIZATION_EXPLICIT = "explicit list"

MAX_DRAWS_PER_FREQUENCY = 1000


def _cosine_columns(s: np.ndarray, b: np.ndarray, length: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    cos(π b s) and its first two derivatives with respect to x = α + s·length, for s of shape (N, 1).
    The phase is reduced modulo 2 before scaling by π.
    """
    turns = np.mod(s * b, 2.0)
    value = np.cos(np.pi * turns)
    rate = np.pi * b / length
    return value, -rate * np.sin(np.pi * turns), -(rate * rate) * value


class EmbeddingService:
    """Spatial feature maps and their exact derivatives along one coordinate."""

    @classmethod
    def sample_integer_frequencies(cls, n: int, sigma: float, seed: int) -> List[int]:
        if n < 1:
            raise ConfigurationError(f"Need at least one frequency, got {n}")
        rng = np.random.default_rng(seed)
        frequencies = [1]
        seen = {1}
        draws = 0
        while len(frequencies) < n:
            draws += 1
            if draws > MAX_DRAWS_PER_FREQUENCY * n:
                raise ConfigurationError(
                    f"Could not draw {n} distinct nonzero integer frequencies with sigma={sigma}"
                )
            candidate = abs(int(np.rint(rng.normal(0.0, sigma))))
            if candidate == 0 or candidate in seen:
                continue
            seen.add(candidate)
            frequencies.append(candidate)
        return frequencies

    @classmethod
    def sample_real_frequencies(cls, n: int, sigma: float, seed: int) -> List[float]:
        rng = np.random.default_rng(seed)
        return [float(value) for value in rng.normal(0.0, sigma, size=n)]

    @classmethod
    def sample_one_sided_frequencies(cls, n: int, sigma: float, seed: int) -> List[float]:
        rng = np.random.default_rng(seed)
        frequencies = [1.0]
        while len(frequencies) < n:
            candidate = abs(float(rng.normal(0.0, sigma)))
            if candidate != 0.0:
                frequencies.append(candidate)
        return frequencies

    @classmethod
    def validate(cls, spec: EmbeddingSpec) -> None:
        """Frequency rules per kind; raises ConfigurationError."""
        frequencies = spec.frequencies
        if spec.kind == EmbeddingKind.IDENTITY or frequencies is None:
            return
        if not np.all(np.isfinite(frequencies)):
            raise ConfigurationError("Frequencies must be finite")
        if spec.kind in (EmbeddingKind.HC_COSINE, EmbeddingKind.HC_COSINE_HYPERRECT):
            if any(not float(b).is_integer() for b in frequencies):
                raise ConfigurationError(f"{spec.kind.value} needs integer frequencies, got {frequencies}")
        if spec.is_derivative_vanishing:
            if frequencies[0] != 1:
                raise ConfigurationError(f"{spec.kind.value} frequency list must begin with 1, got {frequencies}")
            if any(b == 0 for b in frequencies):
                raise ConfigurationError(f"{spec.kind.value} frequencies must be nonzero")
        if spec.kind not in (EmbeddingKind.HC_COSINE_HYPERRECT,) and spec.dimension != 1:
            raise ConfigurationError(f"{spec.kind.value} embeds a single spatial coordinate")

    @classmethod
    def resolve(cls, spec: EmbeddingSpec, seed: Optional[int] = None) -> Tuple[EmbeddingSpec, str]:
        """Fill in sampled frequencies; returns the concrete spec and how the list was canonicalised."""
        if spec.kind == EmbeddingKind.IDENTITY:
            return spec, CANONICALIZATION_EXPLICIT
        if spec.frequencies is not None:
            cls.validate(spec)
            return spec, CANONICALIZATION_EXPLICIT
        seed = spec.rng_seed if seed is None else seed
        if seed is None:
            raise ConfigurationError("Sampling frequencies needs a seed")
        n = spec.n_frequencies
        if spec.kind == EmbeddingKind.RANDOM_COS_SIN:
            frequencies, rule = cls.sample_real_frequencies(n, spec.sigma, seed), CANONICALIZATION_REAL
        elif spec.kind == EmbeddingKind.HC_COSINE_ONE_SIDED:
            frequencies, rule = cls.sample_one_sided_frequencies(n, spec.sigma, seed), CANONICALIZATION_ONE_SIDED
        else:
            frequencies = [float(b) for b in cls.sample_integer_frequencies(n, spec.sigma, seed)]
            rule = CANONICALIZATION_INTEGER
        resolved = spec.model_copy(update={"frequencies": frequencies, "rng_seed": seed})
        cls.validate(resolved)
        logger.debug(f"Sampled {n} {spec.kind.value} frequencies with seed {seed}: {frequencies}")
        return resolved, rule

    @classmethod
    def output_width(cls, spec: Optional[EmbeddingSpec], dimension: int = 1) -> int:
        if spec is None or spec.kind == EmbeddingKind.IDENTITY:
            return dimension if spec is None else spec.dimension
        n = spec.size
        if spec.kind == EmbeddingKind.RANDOM_COS_SIN:
            return 2 * n
        if spec.kind == EmbeddingKind.HC_COSINE_HYPERRECT:
            constrained = spec.dimension - len(set(spec.passthrough_dims))
            return n * constrained + len(set(spec.passthrough_dims))
        return n

    @classmethod
    def feature_jet(cls, spec: Optional[EmbeddingSpec], x: np.ndarray, dim: int = 0) -> FeatureJet:
        """Features at a batch ``x`` of shape (N, d) with derivatives along coordinate ``dim``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        count, width = x.shape
        if spec is None or spec.kind == EmbeddingKind.IDENTITY:
            if spec is not None and width != spec.dimension:
                raise ConfigurationError(f"Expected {spec.dimension} spatial coordinates, got {width}")
            d1 = np.zeros_like(x)
            if 0 <= dim < width:
                d1[:, dim] = 1.0
            return FeatureJet(x.copy(), d1, np.zeros_like(x))
        if spec.frequencies is None:
            raise ConfigurationError("Embedding frequencies are not resolved")
        if width != spec.dimension:
            raise ConfigurationError(f"Expected {spec.dimension} spatial coordinates, got {width}")
        cls.validate(spec)
        b = np.asarray(spec.frequencies, dtype=np.float64)

        if spec.kind == EmbeddingKind.RANDOM_COS_SIN:
            rate = np.pi * b
            phase = x[:, :1] * rate
            cos, sin = np.cos(phase), np.sin(phase)
            value = np.empty((count, 2 * b.size))
            d1 = np.zeros_like(value)
            value[:, 0::2], value[:, 1::2] = cos, sin
            if dim == 0:
                d1[:, 0::2], d1[:, 1::2] = -rate * sin, rate * cos
            curvature = np.repeat(rate * rate, 2)
            return FeatureJet(value, d1, -curvature * value if dim == 0 else np.zeros_like(value))

        if spec.kind == EmbeddingKind.HC_COSINE_HYPERRECT:
            return cls._hyperrect_jet(spec, x, b, dim)

        lo, hi = spec.domain_lo[0], spec.domain_hi[0]
        half = spec.kind == EmbeddingKind.HC_COSINE_ONE_SIDED
        mirrored = half and spec.side == BoundarySide.HI
        offset = (hi - x[:, :1]) if mirrored else (x[:, :1] - lo)
        value, d1, d2 = _cosine_columns(offset / (hi - lo), b * (0.5 if half else 1.0), hi - lo)
        if dim != 0:
            return FeatureJet(value, np.zeros_like(value), np.zeros_like(value))
        return FeatureJet(value, -d1 if mirrored else d1, d2)

    @classmethod
    def _hyperrect_jet(cls, spec: EmbeddingSpec, x: np.ndarray, b: np.ndarray, dim: int) -> FeatureJet:
        passthrough = sorted(set(spec.passthrough_dims))
        constrained = [i for i in range(spec.dimension) if i not in passthrough]
        count = x.shape[0]
        per_dim = {}
        for i in constrained:
            lo, hi = spec.domain_lo[i], spec.domain_hi[i]
            per_dim[i] = _cosine_columns((x[:, i:i + 1] - lo) / (hi - lo), b, hi - lo)
        values, d1s, d2s = [], [], []
        # frequency-major: all constrained dimensions for b_1, then for b_2, ...
        for j in range(b.size):
            for i in constrained:
                value, d1, d2 = per_dim[i]
                values.append(value[:, j])
                d1s.append(d1[:, j] if i == dim else np.zeros(count))
                d2s.append(d2[:, j] if i == dim else np.zeros(count))
        for i in passthrough:
            values.append(x[:, i].copy())
            d1s.append(np.full(count, 1.0 if i == dim else 0.0))
            d2s.append(np.zeros(count))
        return FeatureJet(np.column_stack(values), np.column_stack(d1s), np.column_stack(d2s))

    @classmethod
    def embed(cls, spec: Optional[EmbeddingSpec], x) -> np.ndarray:
        """Feature vector at one point (scalar x, or a length-d vector on hyperrectangles)."""
        point = np.atleast_1d(np.asarray(x, dtype=np.float64)).reshape(1, -1)
        return cls.feature_jet(spec, point).value[0]

    @classmethod
    def _checked_embed(cls, kind: EmbeddingKind, x, spec: EmbeddingSpec) -> np.ndarray:
        if spec.kind != kind:
            raise ConfigurationError(f"Expected a {kind.value} embedding, got {spec.kind.value}")
        return cls.embed(spec, x)

    @classmethod
    def random_cos_sin_embed(cls, x: float, spec: EmbeddingSpec) -> np.ndarray:
        return cls._checked_embed(EmbeddingKind.RANDOM_COS_SIN, x, spec)

    @classmethod
    def hc_cosine_embed(cls, x: float, spec: EmbeddingSpec) -> np.ndarray:
        return cls._checked_embed(EmbeddingKind.HC_COSINE, x, spec)

    @classmethod
    def hc_cosine_embed_one_sided(cls, x: float, spec: EmbeddingSpec) -> np.ndarray:
        return cls._checked_embed(EmbeddingKind.HC_COSINE_ONE_SIDED, x, spec)

    @classmethod
    def hc_cosine_embed_hyperrect(cls, x, spec: EmbeddingSpec) -> np.ndarray:
        if np.size(x) != spec.dimension:
            raise ConfigurationError(f"Point has {np.size(x)} coordinates, domain has {spec.dimension}")
        return cls._checked_embed(EmbeddingKind.HC_COSINE_HYPERRECT, x, spec)
