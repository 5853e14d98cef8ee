from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ArgumentError, NonFiniteError, StructuralError
from ..model.ParamStore import ParamStore
from .Batch import Batch
from .DualTensor import DualTensor
from .Engine import Engine
from .ForwardEngine import ForwardEngine
from .GradEstimate import EstimatorKind, GradEstimate
from .PrimalEngine import PrimalEngine
from .ReverseEngine import ReverseEngine

ModelFn = Callable[[Engine, Mapping[str, Any], Batch], Any]
TensorMap = Mapping[str, np.ndarray]


def _check_inputs(model_fn: ModelFn, params: ParamStore, batch: Batch) -> None:
    if len(batch) == 0:
        raise ArgumentError("Batch must be nonempty")
    expected = getattr(model_fn, "param_shapes", None)
    if expected is not None:
        actual = params.shapes()
        if dict(expected) != actual:
            missing = sorted(set(expected) - set(actual))
            extra = sorted(set(actual) - set(expected))
            wrong = sorted(n for n in set(expected) & set(actual) if tuple(expected[n]) != actual[n])
            raise StructuralError(
                f"Params do not match model architecture (missing={missing}, extra={extra}, wrong_shape={wrong})"
            )


def _evaluate(model_fn: ModelFn, engine: Engine, values: Mapping[str, Any], batch: Batch):
    try:
        return model_fn(engine, values, batch)
    except KeyError as e:
        raise StructuralError(f"Model function requested unknown parameter {e}") from e
    except ValueError as e:
        if isinstance(e, ArgumentError):
            raise
        raise StructuralError(f"Shape mismatch while evaluating model: {e}") from e


def _finite_scalar(value: Any, what: str) -> float:
    scalar = float(np.asarray(value))
    if not np.isfinite(scalar):
        raise NonFiniteError(f"{what} is not finite: {scalar}")
    return scalar


def _check_tangents(params: ParamStore, tangents: TensorMap, lead: int) -> List[str]:
    trainable = params.trainable_names()
    missing = [n for n in trainable if n not in tangents]
    if missing:
        raise StructuralError(f"Missing tangents for trainable params: {missing}")
    extra = [n for n in tangents if n not in set(trainable)]
    if extra:
        raise StructuralError(f"Tangents given for non-trainable params: {extra}")
    for name in trainable:
        shape = np.shape(tangents[name])
        if shape[lead:] != params.get(name).shape:
            raise StructuralError(
                f"Tangent for {name} has shape {shape}, param has {params.get(name).shape}"
            )
    return trainable


def forward_loss(model_fn: ModelFn, params: ParamStore, batch: Batch) -> float:
    """Mean loss over ``batch``."""
    _check_inputs(model_fn, params, batch)
    out = _evaluate(model_fn, PrimalEngine(), params.values(), batch)
    return _finite_scalar(out, "Loss")


def _forward_pass(model_fn: ModelFn, params: ParamStore, tangents: TensorMap,
                  batch: Batch, lead: int) -> DualTensor:
    _check_inputs(model_fn, params, batch)
    trainable = set(_check_tangents(params, tangents, lead))
    engine = ForwardEngine(lead=lead)
    values = {
        entry.name: DualTensor(
            entry.value,
            np.asarray(tangents[entry.name], dtype=np.float64) if entry.name in trainable else None,
            lead,
        )
        for entry in params.entries
    }
    return engine.lift(_evaluate(model_fn, engine, values, batch))


def jvp(model_fn: ModelFn, params: ParamStore, tangents: TensorMap, batch: Batch) -> Tuple[float, float]:
    """Loss and directional derivative along ``tangents`` from one dual-number pass.

    Frozen parameters get an implicit zero tangent.
    """
    out = _forward_pass(model_fn, params, tangents, batch, lead=0)
    loss = _finite_scalar(out.primal, "Loss")
    directional = 0.0 if out.tangent is None else _finite_scalar(out.tangent, "jvp")
    return loss, directional


def jvp_batch(model_fn: ModelFn, params: ParamStore, tangents: TensorMap, batch: Batch) -> Tuple[float, np.ndarray]:
    """Loss and K jvp values for tangents stacked on a leading axis of length K."""
    sizes = {np.shape(t)[0] for t in tangents.values() if np.ndim(t) > 0}
    if len(sizes) > 1:
        raise StructuralError(f"Stacked tangents disagree on K: {sorted(sizes)}")
    count = sizes.pop() if sizes else 0
    out = _forward_pass(model_fn, params, tangents, batch, lead=1)
    loss = _finite_scalar(out.primal, "Loss")
    if out.tangent is None:
        return loss, np.zeros(count)
    directional = np.asarray(out.tangent, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(directional)):
        raise NonFiniteError("jvp batch contains non-finite values")
    return loss, directional


def forward_gradient(jvp_value: float, tangents: TensorMap, loss: Optional[float] = None) -> GradEstimate:
    """``jvp * v`` per parameter."""
    return GradEstimate(
        grads={name: jvp_value * np.asarray(v, dtype=np.float64) for name, v in tangents.items()},
        estimator_kind=EstimatorKind.FORWARD,
        loss=loss,
    )


def combine_directional(coefficients: Sequence[float], directions: Sequence[TensorMap]) -> Dict[str, np.ndarray]:
    """Mean over k of ``coefficients[k] * directions[k]``, accumulated in k order.

    Clients and the server both build gradients through this function so that the
    reconstructed update is bit-identical to the client's.
    """
    if len(coefficients) != len(directions) or not directions:
        raise StructuralError("Need one coefficient per perturbation and at least one perturbation")
    count = len(directions)
    combined: Dict[str, np.ndarray] = {}
    for coefficient, direction in zip(coefficients, directions):
        for name, v in direction.items():
            term = coefficient * v
            combined[name] = term if name not in combined else combined[name] + term
    if count > 1:
        combined = {name: g / count for name, g in combined.items()}
    return combined


def reverse_grad(model_fn: ModelFn, params: ParamStore, batch: Batch) -> GradEstimate:
    """Exact gradients of the mean loss for every trainable parameter."""
    _check_inputs(model_fn, params, batch)
    engine = ReverseEngine()
    leaves = {entry.name: engine.leaf(entry.value, entry.trainable) for entry in params.entries}
    out = engine.lift(_evaluate(model_fn, engine, leaves, batch))
    loss = _finite_scalar(out.value, "Loss")
    cotangents = engine.backward(out)
    grads = {}
    for name in params.trainable_names():
        g = cotangents.get(leaves[name].position)
        grads[name] = np.zeros_like(params.get(name)) if g is None else np.asarray(g, dtype=np.float64)
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteError(f"Gradient for {name} is not finite")
    return GradEstimate(grads=grads, estimator_kind=EstimatorKind.REVERSE, loss=loss)


def perturbed(params: ParamStore, direction: TensorMap, step: float) -> ParamStore:
    """Copy of ``params`` with ``step * direction`` added to the named parameters."""
    store = params.clone()
    for name, v in direction.items():
        store.set(name, params.get(name) + step * np.asarray(v, dtype=np.float64))
    return store


def zero_order_coefficient(model_fn: ModelFn, params: ParamStore, batch: Batch,
                           v: TensorMap, eps: float) -> Tuple[float, float, float]:
    """Central difference ``(f(w+eps v) - f(w-eps v)) / (2 eps)`` and the two losses."""
    if not eps > 0:
        raise ArgumentError(f"eps must be positive, got {eps}")
    _check_tangents(params, v, lead=0)
    loss_plus = forward_loss(model_fn, perturbed(params, v, eps), batch)
    loss_minus = forward_loss(model_fn, perturbed(params, v, -eps), batch)
    return (loss_plus - loss_minus) / (2.0 * eps), loss_plus, loss_minus


def zero_order_grad(model_fn: ModelFn, params: ParamStore, batch: Batch,
                    v: TensorMap, eps: float) -> GradEstimate:
    """Central-difference estimate scaled onto ``v``; exactly two forward passes.

    The reported loss is the midpoint of the two perturbed losses.
    """
    coefficient, loss_plus, loss_minus = zero_order_coefficient(model_fn, params, batch, v, eps)
    return GradEstimate(
        grads={name: coefficient * np.asarray(t, dtype=np.float64) for name, t in v.items()},
        estimator_kind=EstimatorKind.ZERO_ORDER,
        loss=0.5 * (loss_plus + loss_minus),
    )
