from enum import Enum
from typing import Dict, Mapping, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..model.ParamStore import ParamStore


class LocalOptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"
    ADAMW = "adamw"


class LocalTrainConfig(BaseModel):
    """Client-side training parameters.

    Attributes:
        lr: local learning rate (eta_l)
        epochs: local epochs per round; ``None`` takes the method's default
        batch_size: local minibatch size
        perturbations: K, perturbations per batch for forward-gradient training
        optimizer: local optimizer
        max_iterations: optional cap on local steps per round
    """
    lr: float = Field(default=0.01, ge=0.0)
    epochs: Optional[int] = Field(default=None, ge=1)
    batch_size: int = Field(default=32, ge=1)
    perturbations: int = Field(default=1, ge=1)
    optimizer: LocalOptimizerKind = LocalOptimizerKind.SGD
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    max_iterations: Optional[int] = Field(default=None, ge=1)


class LocalOptimizer:
    """Applies local steps to a client's ParamStore in place.

    Fresh per client per round. Steps depend only on the gradient sequence, so a
    server replica fed the same gradients ends bit-identical.
    """

    def __init__(self, config: LocalTrainConfig):
        self.config = config
        self.step_count = 0
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}

    def step(self, store: ParamStore, grads: Mapping[str, np.ndarray]) -> None:
        self.step_count += 1
        kind = self.config.optimizer
        for name, grad in grads.items():
            weight = store.get(name)
            if kind == LocalOptimizerKind.SGD:
                if self.config.weight_decay:
                    grad = grad + self.config.weight_decay * weight
                store.set(name, weight - self.config.lr * grad)
            else:
                store.set(name, self._adam(name, weight, grad, decoupled=kind == LocalOptimizerKind.ADAMW))

    def _adam(self, name: str, weight: np.ndarray, grad: np.ndarray, decoupled: bool) -> np.ndarray:
        cfg = self.config
        if cfg.weight_decay and not decoupled:
            grad = grad + cfg.weight_decay * weight
        m = self._m.get(name, np.zeros_like(weight))
        v = self._v.get(name, np.zeros_like(weight))
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        self._m[name], self._v[name] = m, v
        m_hat = m / (1.0 - cfg.beta1 ** self.step_count)
        v_hat = v / (1.0 - cfg.beta2 ** self.step_count)
        update = m_hat / (np.sqrt(v_hat) + cfg.eps)
        if cfg.weight_decay and decoupled:
            update = update + cfg.weight_decay * weight
        return weight - cfg.lr * update
