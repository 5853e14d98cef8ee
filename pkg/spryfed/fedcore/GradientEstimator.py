from abc import ABC, abstractmethod
from typing import ClassVar, Dict, List, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..autodiff.Batch import Batch
from ..autodiff.GradEstimate import EstimatorKind
from ..autodiff.gradients import (
    ModelFn,
    combine_directional,
    forward_loss,
    jvp,
    perturbed,
    reverse_grad,
    zero_order_coefficient,
)
from ..model.ParamStore import ParamStore
from .PerturbationStream import PerturbationStream

TensorMap = Mapping[str, np.ndarray]


class Estimate(BaseModel):
    """One local step's gradient and the scalars a client would transmit for it.

    Attributes:
        grads: gradient per trainable parameter
        loss: loss at the pre-step weights
        coefficients: one jvp / finite-difference scalar per perturbation used
        draws: how many times the perturbation stream was regenerated
        selected: index of the kept candidate for selecting estimators
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grads: Dict[str, np.ndarray]
    loss: float
    coefficients: List[float] = []
    draws: int = 0
    selected: Optional[int] = None


def trainable_shapes(store: ParamStore) -> Dict[str, tuple]:
    return {name: store.get(name).shape for name in store.trainable_names()}


class GradientEstimator(BaseModel, ABC):
    """Strategy for turning one batch into a local gradient."""
    kind: ClassVar[EstimatorKind]
    replayable: ClassVar[bool] = True

    perturbations: int = Field(default=1, ge=1)

    @abstractmethod
    def estimate(self, model_fn: ModelFn, store: ParamStore, batch: Batch, stream: PerturbationStream,
                 iteration: int, reference: Optional[TensorMap] = None) -> Estimate:
        pass

    def replay(self, coefficients: List[float], stream: PerturbationStream, iteration: int,
               shapes: Dict[str, tuple]) -> Dict[str, np.ndarray]:
        """Server-side gradient rebuilt from transmitted scalars and the shared stream."""
        directions = stream.draw(iteration, shapes, self.perturbations)
        return combine_directional(coefficients, directions)


class ForwardGradientEstimator(GradientEstimator):
    """Average of K forward gradients ``jvp_k * v_k``, one dual-number pass each."""
    kind: ClassVar[EstimatorKind] = EstimatorKind.FORWARD

    def estimate(self, model_fn, store, batch, stream, iteration, reference=None) -> Estimate:
        directions = stream.draw(iteration, trainable_shapes(store), self.perturbations)
        losses, coefficients = [], []
        for direction in directions:
            loss, directional = jvp(model_fn, store, direction, batch)
            losses.append(loss)
            coefficients.append(directional)
        return Estimate(
            grads=combine_directional(coefficients, directions),
            loss=losses[0],
            coefficients=coefficients,
            draws=1,
        )


class ReverseGradientEstimator(GradientEstimator):
    """Exact backprop gradient; nothing to replay from scalars."""
    kind: ClassVar[EstimatorKind] = EstimatorKind.REVERSE
    replayable: ClassVar[bool] = False

    def estimate(self, model_fn, store, batch, stream, iteration, reference=None) -> Estimate:
        result = reverse_grad(model_fn, store, batch)
        return Estimate(grads=result.grads, loss=result.loss)


class ZeroOrderEstimator(GradientEstimator):
    """Average of K central-difference estimates with step ``sigma``.

    Only trainable weights are perturbed.
    """
    kind: ClassVar[EstimatorKind] = EstimatorKind.ZERO_ORDER

    sigma: float = Field(default=1e-3, gt=0.0)

    def _candidates(self, model_fn, store, batch, directions):
        coefficients, midpoints = [], []
        for direction in directions:
            coefficient, loss_plus, loss_minus = zero_order_coefficient(model_fn, store, batch, direction, self.sigma)
            coefficients.append(coefficient)
            midpoints.append(0.5 * (loss_plus + loss_minus))
        return coefficients, midpoints

    def estimate(self, model_fn, store, batch, stream, iteration, reference=None) -> Estimate:
        directions = stream.draw(iteration, trainable_shapes(store), self.perturbations)
        coefficients, midpoints = self._candidates(model_fn, store, batch, directions)
        return Estimate(
            grads=combine_directional(coefficients, directions),
            loss=midpoints[0],
            coefficients=coefficients,
            draws=1,
        )


class SeedTrickEstimator(ZeroOrderEstimator):
    """Zero-order estimate that never keeps a perturbation in memory.

    The perturbation is regenerated from the stream for the ``+sigma`` evaluation,
    again for the ``-sigma`` evaluation and a third time for the update. Both
    evaluations perturb the base weights directly, so the base is untouched.
    """

    def estimate(self, model_fn, store, batch, stream, iteration, reference=None) -> Estimate:
        shapes = trainable_shapes(store)
        plus = [forward_loss(model_fn, perturbed(store, v, self.sigma), batch)
                for v in stream.draw(iteration, shapes, self.perturbations)]
        minus = [forward_loss(model_fn, perturbed(store, v, -self.sigma), batch)
                 for v in stream.draw(iteration, shapes, self.perturbations)]
        directions = stream.draw(iteration, shapes, self.perturbations)
        coefficients = [(p - m) / (2.0 * self.sigma) for p, m in zip(plus, minus)]
        return Estimate(
            grads=combine_directional(coefficients, directions),
            loss=0.5 * (plus[0] + minus[0]),
            coefficients=coefficients,
            draws=3,
        )


class CosineSelectingEstimator(ZeroOrderEstimator):
    """K central-difference candidates; keeps the one best aligned with ``reference``.

    ``reference`` is the previous round's aggregated update restricted to the
    client's trainable parameters. Without a usable reference the first candidate
    is kept.
    """
    replayable: ClassVar[bool] = False

    def estimate(self, model_fn, store, batch, stream, iteration, reference=None) -> Estimate:
        shapes = trainable_shapes(store)
        directions = stream.draw(iteration, shapes, self.perturbations)
        coefficients, midpoints = self._candidates(model_fn, store, batch, directions)
        selected = select_by_cosine(coefficients, directions, reference, list(shapes))
        return Estimate(
            grads=combine_directional([coefficients[selected]], [directions[selected]]),
            loss=midpoints[selected],
            coefficients=[coefficients[selected]],
            draws=1,
            selected=selected,
        )


def select_by_cosine(coefficients: List[float], directions: List[TensorMap],
                     reference: Optional[TensorMap], names: List[str]) -> int:
    """Index of the candidate ``c_k v_k`` with the highest cosine to ``reference`` (first on ties)."""
    if reference is None or len(directions) == 1:
        return 0
    ref = np.concatenate([
        np.ravel(reference[name]) if name in reference else np.zeros(int(np.prod(directions[0][name].shape)))
        for name in names
    ])
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0.0:
        return 0
    best, best_cos = 0, -np.inf
    for k, (coefficient, direction) in enumerate(zip(coefficients, directions)):
        candidate = coefficient * np.concatenate([np.ravel(direction[name]) for name in names])
        norm = float(np.linalg.norm(candidate))
        cosine = float(candidate @ ref) / (norm * ref_norm) if norm > 0.0 else -np.inf
        if cosine > best_cos:
            best, best_cos = k, cosine
    return best
