import math

import numpy as np
import pytest

from spryfed.autodiff import Batch, EstimatorKind
from spryfed.autodiff.gradients import (
    combine_directional,
    forward_gradient,
    forward_loss,
    jvp,
    jvp_batch,
    reverse_grad,
    zero_order_grad,
)
from spryfed.exceptions import ArgumentError, StructuralError
from spryfed.model.ModelSpec import Architecture, ModelSpec
from spryfed.model.builder import build_model
from spryfed.utils.seeding import make_generator
from spryfed.validation.toys import QuadraticModel


def random_tangents(store, seed):
    rng = make_generator(seed)
    return {name: rng.standard_normal(store.get(name).shape) for name in store.trainable_names()}


def test_forward_loss_scalar_square():
    model = QuadraticModel(curvature=[1.0], linear=[0.0])
    assert forward_loss(model, model.store(np.array([3.0])), model.batch()) == 9.0


def test_forward_loss_uniform_logits_is_log_classes():
    network, store = build_model(ModelSpec(architecture=Architecture.LOGREG, widths=[5], num_classes=4))
    for name in store.names():
        store.set(name, np.zeros_like(store.get(name)))
    batch = Batch(features=np.ones((7, 5)), labels=np.arange(7) % 4)
    assert forward_loss(network, store, batch) == pytest.approx(math.log(4), abs=1e-15)


def test_forward_loss_matches_reverse_engine(mlp):
    network, store, batch = mlp
    assert abs(forward_loss(network, store, batch) - reverse_grad(network, store, batch).loss) <= 1e-12


def test_forward_loss_rejects_empty_batch(poly):
    model, store, _ = poly
    with pytest.raises(ArgumentError):
        forward_loss(model, store, Batch(features=np.zeros((0, 1)), labels=np.zeros(0)))


def test_forward_loss_rejects_wrong_architecture(mlp):
    network, _, batch = mlp
    _, other = build_model(ModelSpec(architecture=Architecture.MLP, widths=[3, 6], num_classes=3))
    with pytest.raises(StructuralError):
        forward_loss(network, other, batch)


def test_jvp_polynomial(poly):
    model, store, batch = poly
    loss, directional = jvp(model, store, {"w": np.array([1.0, 1.0])}, batch)
    assert loss == 11.0
    assert directional == 8.0


def test_jvp_zero_tangent_is_exactly_zero(mlp):
    network, store, batch = mlp
    zeros = {name: np.zeros(store.get(name).shape) for name in store.trainable_names()}
    loss, directional = jvp(network, store, zeros, batch)
    assert directional == 0.0
    assert loss == forward_loss(network, store, batch)


@pytest.mark.parametrize("seed", range(20))
def test_jvp_agrees_with_reverse_grad(seed, blobs):
    spec = ModelSpec(architecture=Architecture.MLP, widths=[3, 6, 5], num_classes=3, init_seed=seed,
                     activation=["tanh", "relu", "gelu"][seed % 3])
    network, store = build_model(spec)
    tangents = random_tangents(store, 1000 + seed)
    _, directional = jvp(network, store, tangents, blobs.batch())
    grads = reverse_grad(network, store, blobs.batch()).grads
    expected = sum(float(np.sum(grads[n] * tangents[n])) for n in tangents)
    assert abs(directional - expected) <= 1e-9 * (1 + abs(directional))


def test_jvp_agrees_with_reverse_grad_under_lora(lora_mlp):
    network, store, batch = lora_mlp
    tangents = random_tangents(store, 7)
    _, directional = jvp(network, store, tangents, batch)
    grads = reverse_grad(network, store, batch).grads
    assert set(grads) == set(tangents)
    expected = sum(float(np.sum(grads[n] * tangents[n])) for n in tangents)
    assert abs(directional - expected) <= 1e-9 * (1 + abs(directional))


def test_jvp_is_linear_in_the_tangent(mlp):
    network, store, batch = mlp
    v1, v2 = random_tangents(store, 1), random_tangents(store, 2)
    a, b = 0.7, -1.3
    combined = {n: a * v1[n] + b * v2[n] for n in v1}
    _, j1 = jvp(network, store, v1, batch)
    _, j2 = jvp(network, store, v2, batch)
    _, j = jvp(network, store, combined, batch)
    assert j == pytest.approx(a * j1 + b * j2, rel=1e-9)


def test_jvp_missing_tangent_is_structural(mlp):
    network, store, batch = mlp
    tangents = random_tangents(store, 3)
    tangents.pop(store.trainable_names()[0])
    with pytest.raises(StructuralError):
        jvp(network, store, tangents, batch)


def test_jvp_batch_matches_separate_calls(mlp):
    network, store, batch = mlp
    rng = make_generator(11)
    stacked = {n: rng.standard_normal((4,) + store.get(n).shape) for n in store.trainable_names()}
    loss, directional = jvp_batch(network, store, stacked, batch)
    assert loss == pytest.approx(forward_loss(network, store, batch), abs=1e-12)
    for k in range(4):
        _, single = jvp(network, store, {n: t[k] for n, t in stacked.items()}, batch)
        assert directional[k] == pytest.approx(single, rel=1e-10, abs=1e-12)


def test_forward_gradient_scales_tangents():
    estimate = forward_gradient(8.0, {"w": np.array([1.0, 1.0])})
    np.testing.assert_array_equal(estimate.grads["w"], [8.0, 8.0])
    assert estimate.estimator_kind == EstimatorKind.FORWARD
    zero = forward_gradient(0.0, {"w": np.array([1.0, -2.0])})
    np.testing.assert_array_equal(zero.grads["w"], [0.0, 0.0])


def test_combine_directional_averages_in_order():
    directions = [{"w": np.array([1.0, 0.0])}, {"w": np.array([0.0, 1.0])}]
    np.testing.assert_array_equal(combine_directional([2.0, 4.0], directions)["w"], [1.0, 2.0])
    with pytest.raises(StructuralError):
        combine_directional([1.0], directions)


def test_reverse_grad_scalar_square():
    model = QuadraticModel(curvature=[1.0], linear=[0.0])
    result = reverse_grad(model, model.store(np.array([3.0])), model.batch())
    np.testing.assert_array_equal(result.grads["w"], [6.0])
    assert result.loss == 9.0


def test_reverse_grad_of_constant_loss_is_zero():
    model = QuadraticModel(curvature=[0.0, 0.0], linear=[0.0, 0.0])
    result = reverse_grad(model, model.store(np.array([1.5, -2.0])), model.batch())
    np.testing.assert_array_equal(result.grads["w"], [0.0, 0.0])


def test_reverse_grad_matches_central_differences(mlp):
    network, store, batch = mlp
    grads = reverse_grad(network, store, batch).grads
    eps = 1e-5
    for name in store.trainable_names():
        flat = store.get(name).reshape(-1)
        for i in range(flat.size):
            plus, minus = store.clone(), store.clone()
            bumped = flat.copy()
            bumped[i] += eps
            plus.set(name, bumped.reshape(store.get(name).shape))
            bumped[i] -= 2 * eps
            minus.set(name, bumped.reshape(store.get(name).shape))
            numeric = (forward_loss(network, plus, batch) - forward_loss(network, minus, batch)) / (2 * eps)
            analytic = grads[name].reshape(-1)[i]
            assert abs(numeric - analytic) <= max(1e-5, 1e-4 * abs(analytic))


def test_zero_order_matches_forward_gradient_on_linear_loss():
    model = QuadraticModel.linear_only(np.array([3.0]))
    store = model.store(np.array([0.4]))
    v = {"w": np.array([1.7])}
    fd = zero_order_grad(model, store, model.batch(), v, 1e-3)
    _, directional = jvp(model, store, v, model.batch())
    np.testing.assert_allclose(fd.grads["w"], forward_gradient(directional, v).grads["w"], rtol=1e-9)
    assert fd.estimator_kind == EstimatorKind.ZERO_ORDER


def test_zero_order_zero_direction(mlp):
    network, store, batch = mlp
    zeros = {name: np.zeros(store.get(name).shape) for name in store.trainable_names()}
    estimate = zero_order_grad(network, store, batch, zeros, 1e-3)
    assert all(not np.any(g) for g in estimate.grads.values())


@pytest.mark.parametrize("eps", [0.0, -1e-3])
def test_zero_order_rejects_nonpositive_eps(poly, eps):
    model, store, batch = poly
    with pytest.raises(ArgumentError):
        zero_order_grad(model, store, batch, {"w": np.ones(2)}, eps)


def test_zero_order_truncation_error_is_second_order(mlp):
    network, store, batch = mlp
    v = random_tangents(store, 5)
    _, directional = jvp(network, store, v, batch)
    exact = forward_gradient(directional, v).grads

    def error(eps):
        estimate = zero_order_grad(network, store, batch, v, eps).grads
        return sum(float(np.sum((estimate[n] - exact[n]) ** 2)) for n in v) ** 0.5

    ratio = error(1e-2) / error(1e-4)
    assert 1e3 <= ratio <= 1e5
