import numpy as np
import pytest

from app.models.network_model import NetworkParams, NetworkTensors, SpatialJet
from app.models.pinn_model import EmbeddedNetwork, PinnModel
from app.schemas.constraint_schemas import ConstraintSpec, Geometry, HyperrectShift, Strategy
from app.schemas.embedding_schemas import BoundarySide, EmbeddingKind, EmbeddingSpec
from app.services.constraint_service import ConstraintService
from app.services.embedding_service import EmbeddingService
from app.utils.exceptions import ConfigurationError


def random_params(sizes, rng):
    params = NetworkParams.glorot(sizes, int(rng.integers(0, 2 ** 31)))
    biases = [rng.normal(0.0, 0.5, size=b.shape) for b in params.biases]
    return NetworkParams(params.layer_sizes, params.weights, tuple(biases))


def inner(embedding, params):
    return EmbeddedNetwork(embedding, NetworkTensors.constant(params))


def hc(frequencies, lo=0.0, hi=1.0):
    return EmbeddingSpec(kind=EmbeddingKind.HC_COSINE, frequencies=frequencies, domain_lo=[lo], domain_hi=[hi])


def linear_probe(points, times, spatial_order=2, time_order=1, dim=0):
    x = points[:, 0]
    return SpatialJet(x.copy(), np.ones_like(x), np.zeros_like(x), np.zeros_like(x), np.zeros_like(x))


def constant_model(c):
    def model(points, times, spatial_order=2, time_order=1, dim=0):
        zeros = np.zeros(points.shape[0])
        return SpatialJet(np.full(points.shape[0], c), zeros, zeros, zeros, zeros)
    return model


def boundary_slopes(pinn, params, t=0.37):
    jet = pinn.bind(params)(np.array([0.0, 1.0]), np.array([t, t]))
    return jet.numpy().d1


# Test both hard-constraint strategies reproduce random fluxes on 200 random networks
def test_boundary_guarantee_on_unit_interval():
    rng = np.random.default_rng(2024)
    for seed in range(200):
        flux_lo, flux_hi = rng.uniform(-3.0, 3.0, size=2)
        t = rng.uniform()
        existing = PinnModel(None, ConstraintSpec(strategy=Strategy.EXISTING_HC, flux_lo=flux_lo, flux_hi=flux_hi))
        slopes = boundary_slopes(existing, random_params(existing.layer_sizes([16, 16]), rng), t)
        assert np.abs(slopes - [flux_lo, flux_hi]).max() < 1e-9

        n = int(rng.integers(1, 6))
        embedding = hc([float(b) for b in EmbeddingService.sample_integer_frequencies(n, 20.0, seed)])
        new = PinnModel(embedding, ConstraintSpec(strategy=Strategy.NEW_HC, flux_lo=flux_lo, flux_hi=flux_hi))
        slopes = boundary_slopes(new, random_params(new.layer_sizes([16, 16]), rng), t)
        assert np.abs(slopes - [flux_lo, flux_hi]).max() < 1e-9


# Test the existing transform on the linear probe u=x
def test_existing_transform_linear_probe():
    x = np.array([0.0, 0.3, 1.0])
    jet = ConstraintService.existing_hc_transform(linear_probe, x, 0.5)
    expected = x - x * (1 - x) ** 2 - x ** 2 * (x - 1)
    assert np.allclose(jet.value, expected, rtol=1e-14, atol=1e-14)
    assert jet.value[1] == pytest.approx(0.216)
    assert jet.d1[0] == pytest.approx(0.0, abs=1e-15)
    assert jet.d1[2] == pytest.approx(0.0, abs=1e-15)


# Test a constant inner model is returned unchanged and both strategies agree on it
def test_constant_model_agreement():
    x = np.linspace(0.0, 1.0, 9)
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, flux_lo=0.4, flux_hi=-1.1)
    existing = ConstraintService.existing_hc_transform(constant_model(2.5), x, 0.1,
                                                       spec.model_copy(update={"strategy": Strategy.EXISTING_HC}))
    new = ConstraintService.new_hc_transform(constant_model(2.5), x, 0.1, spec)
    assert np.array_equal(existing.value, new.value)
    plain = ConstraintService.existing_hc_transform(constant_model(2.5), x, 0.1)
    assert np.all(plain.value == 2.5)


# Test the shift polynomial alone carries the fluxes
def test_shift_polynomial_boundary_derivatives():
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, flux_lo=0.8, flux_hi=-2.0)
    _, d1, _ = ConstraintService.shift_jet(ConstraintService.shift_terms(spec), np.array([[0.0], [1.0]]))
    assert d1 == pytest.approx([0.8, -2.0], abs=1e-15)


# Test new_hc with frequencies (1, 5, 12) and A=2, B=−3
def test_new_hc_example(network_factory):
    embedding = hc([1.0, 5.0, 12.0])
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, flux_lo=2.0, flux_hi=-3.0)
    model = inner(embedding, network_factory((4, 30, 30, 1), seed=12))
    assert ConstraintService.max_boundary_violation(spec, model, np.linspace(0.0, 1.0, 5)) < 1e-10


# Test zero fluxes leave the embedded network untouched
def test_new_hc_zero_flux_is_plain_network(network_factory):
    embedding = hc([1.0, 4.0])
    model = inner(embedding, network_factory((3, 10, 1), seed=3))
    x = np.linspace(0.0, 1.0, 7).reshape(-1, 1)
    transformed = ConstraintService.new_hc_transform(model, x, 0.2)
    plain = model(x, np.full(7, 0.2))
    assert np.array_equal(transformed.numpy().value, plain.numpy().value)


# Test random cos/sin features cannot back a new hard constraint
def test_new_hc_rejects_random_features():
    with pytest.raises(ConfigurationError):
        PinnModel(EmbeddingSpec(kind=EmbeddingKind.RANDOM_COS_SIN, frequencies=[1.0, 3.0]),
                  ConstraintSpec(strategy=Strategy.NEW_HC))


# Test the existing strategy is limited to the unit interval
def test_existing_hc_rejects_other_geometries():
    spec = ConstraintSpec(strategy=Strategy.EXISTING_HC, geometry=Geometry.GENERAL_INTERVAL,
                          domain_lo=[0.0], domain_hi=[2.0])
    with pytest.raises(ConfigurationError):
        ConstraintService.check_compatibility(spec, None)


# Test the general-interval shift follows the polynomial as written: slope 4 at α on (0, 2)
def test_general_interval_shift_scaling():
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.GENERAL_INTERVAL,
                          flux_lo=1.0, domain_lo=[0.0], domain_hi=[2.0])
    _, d1, _ = ConstraintService.shift_jet(ConstraintService.shift_terms(spec), np.array([[0.0]]))
    assert d1[0] == pytest.approx(4.0)
    normalized = spec.model_copy(update={"normalized_shift": True})
    _, d1, _ = ConstraintService.shift_jet(ConstraintService.shift_terms(normalized), np.array([[0.0]]))
    assert d1[0] == pytest.approx(1.0)


# Test normalized general-interval constraints reproduce the fluxes for random networks
def test_general_interval_normalized_fluxes():
    rng = np.random.default_rng(5)
    embedding = hc([1.0, 3.0, 8.0], lo=-1.0, hi=2.0)
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.GENERAL_INTERVAL, flux_lo=0.7,
                          flux_hi=-0.2, domain_lo=[-1.0], domain_hi=[2.0], normalized_shift=True)
    for _ in range(10):
        model = inner(embedding, random_params((4, 12, 12, 1), rng))
        assert ConstraintService.max_boundary_violation(spec, model, [0.0, 0.5, 1.0]) < 1e-9


# Test zero fluxes on any interval give flat boundaries
def test_general_interval_zero_flux(network_factory):
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.GENERAL_INTERVAL,
                          domain_lo=[-1.0], domain_hi=[2.0])
    model = inner(hc([1.0, 6.0], lo=-1.0, hi=2.0), network_factory((3, 10, 1), seed=1))
    derivatives = ConstraintService.boundary_derivatives(spec, model, [0.0, 1.0])
    assert set(derivatives) == {(0, "lo"), (0, "hi")}
    assert all(np.abs(values).max() < 1e-12 for values in derivatives.values())


# Test general_interval on [0, 1] coincides with the unit-interval transform
def test_general_interval_on_unit_interval_matches_new_hc(network_factory):
    model = inner(hc([1.0, 2.0]), network_factory((3, 8, 1), seed=2))
    x = np.linspace(0.0, 1.0, 5).reshape(-1, 1)
    unit = ConstraintService.new_hc_transform(model, x, 0.3, ConstraintSpec(strategy=Strategy.NEW_HC, flux_lo=1.0))
    general = ConstraintService.general_interval_transform(
        model, x, 0.3, ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.GENERAL_INTERVAL, flux_lo=1.0))
    assert np.array_equal(unit.numpy().value, general.numpy().value)
    assert np.array_equal(unit.numpy().d1, general.numpy().d1)


# Test the one-sided constraint fixes the slope at α only
def test_one_sided_flux(network_factory):
    embedding = EmbeddingSpec(kind=EmbeddingKind.HC_COSINE_ONE_SIDED, frequencies=[1.0, 2.5, 7.3])
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.ONE_SIDED_LO, flux_lo=1.5)
    model = inner(embedding, network_factory((4, 20, 20, 1), seed=21))
    assert ConstraintService.max_boundary_violation(spec, model, [0.1, 0.9]) < 1e-10
    far = ConstraintService.one_sided_transform(model, np.array([[1.0]]), 0.1, spec, spatial_order=1)
    assert abs(far.numpy().d1[0]) > 0.0


# Test the mirrored one-sided constraint at β
def test_one_sided_hi_flux(network_factory):
    embedding = EmbeddingSpec(kind=EmbeddingKind.HC_COSINE_ONE_SIDED, frequencies=[1.0, 3.2], side=BoundarySide.HI)
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.ONE_SIDED_HI, flux_hi=-0.6)
    model = inner(embedding, network_factory((3, 10, 1), seed=4))
    assert ConstraintService.max_boundary_violation(spec, model, 0.5) < 1e-10


# Test the one-sided side must match the embedding side
def test_one_sided_side_mismatch():
    embedding = EmbeddingSpec(kind=EmbeddingKind.HC_COSINE_ONE_SIDED, frequencies=[1.0], side=BoundarySide.HI)
    with pytest.raises(ConfigurationError):
        PinnModel(embedding, ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.ONE_SIDED_LO))


def _square_setup(frequencies):
    embedding = EmbeddingSpec(kind=EmbeddingKind.HC_COSINE_HYPERRECT, frequencies=frequencies,
                              domain_lo=[0.0, 0.0], domain_hi=[1.0, 1.0])
    spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.HYPERRECT,
                          domain_lo=[0.0, 0.0], domain_hi=[1.0, 1.0])
    return embedding, spec


# Test zero-flux hyperrectangle constraints on a 5×5 boundary grid for 50 random networks
def test_hyperrect_zero_flux_guarantee():
    rng = np.random.default_rng(77)
    for seed in range(50):
        n = int(rng.integers(1, 4))
        frequencies = [float(b) for b in EmbeddingService.sample_integer_frequencies(n, 10.0, seed)]
        embedding, spec = _square_setup(frequencies)
        width = EmbeddingService.output_width(embedding) + 1
        model = inner(embedding, random_params((width, 12, 12, 1), rng))
        derivatives = ConstraintService.boundary_derivatives(spec, model, rng.uniform(), grid=5)
        assert len(derivatives) == 4
        assert all(values.shape == (5,) for values in derivatives.values())
        assert max(np.abs(values).max() for values in derivatives.values()) < 1e-9


# Test the hyperrectangle shift term example: A₁=1 at (0, 0.5) gives 0.25
@pytest.mark.parametrize("variant", [HyperrectShift.PROFILED, HyperrectShift.VERBATIM])
def test_hyperrect_shift_example(variant):
    _, spec = _square_setup([1.0])
    spec = spec.model_copy(update={"flux_lo": [1.0, 0.0], "flux_hi": [0.0, 0.0], "hyperrect_shift": variant})
    _, d1, _ = ConstraintService.shift_jet(ConstraintService.shift_terms(spec), np.array([[0.0, 0.5]]), dim=0)
    assert d1[0] == pytest.approx(0.25)


# Test flux vectors must match the domain dimension
def test_hyperrect_flux_length_mismatch():
    _, spec = _square_setup([1.0])
    with pytest.raises(ConfigurationError):
        ConstraintService.fluxes(spec.model_copy(update={"flux_lo": [1.0, 2.0, 3.0]}))


# Test a one-dimensional hyperrectangle reduces to the interval transform
def test_hyperrect_one_dimension_matches_interval(network_factory):
    params = network_factory((3, 8, 1), seed=9)
    box = EmbeddingSpec(kind=EmbeddingKind.HC_COSINE_HYPERRECT, frequencies=[1.0, 3.0],
                        domain_lo=[0.0], domain_hi=[2.0])
    box_spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.HYPERRECT, flux_lo=[0.5],
                              flux_hi=[-1.0], domain_lo=[0.0], domain_hi=[2.0])
    interval_spec = ConstraintSpec(strategy=Strategy.NEW_HC, geometry=Geometry.GENERAL_INTERVAL, flux_lo=0.5,
                                   flux_hi=-1.0, domain_lo=[0.0], domain_hi=[2.0])
    x = np.linspace(0.0, 2.0, 6).reshape(-1, 1)
    box_jet = ConstraintService.hyperrect_transform(inner(box, params), x, 0.4, box_spec).numpy()
    interval_jet = ConstraintService.general_interval_transform(
        inner(hc([1.0, 3.0], hi=2.0), params), x, 0.4, interval_spec).numpy()
    assert np.allclose(box_jet.value, interval_jet.value, rtol=1e-14, atol=1e-14)
    assert np.allclose(box_jet.d1, interval_jet.d1, rtol=1e-13, atol=1e-13)


# Test γ₁ features still let a tanh layer fit a strictly monotone target
def test_interior_expressiveness():
    rng = np.random.default_rng(0)
    x = np.linspace(0.05, 0.95, 400).reshape(-1, 1)
    features = EmbeddingService.feature_jet(hc([1.0]), x).value
    hidden = np.tanh(features @ rng.normal(0.0, 3.0, size=(1, 200)) + rng.uniform(-3.0, 3.0, size=200))
    design = np.hstack([hidden, np.ones((400, 1))])
    target = x[:, 0]
    weights, *_ = np.linalg.lstsq(design, target, rcond=None)
    assert np.sqrt(np.mean((design @ weights - target) ** 2)) < 1e-3
