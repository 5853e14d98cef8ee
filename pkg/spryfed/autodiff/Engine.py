from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from .primitives import PRIMITIVES, Primitive


class Engine(ABC):
    """Evaluation backend a model function is written against.

    A model function has the signature ``model_fn(engine, params, batch)`` and builds
    its loss only from the operations below, so the same function runs as a plain
    forward pass, as a dual-number pass, or on a reverse-mode tape.
    """

    @abstractmethod
    def apply(self, primitive: Primitive, *args: Any) -> Any:
        pass

    @abstractmethod
    def value_of(self, x: Any) -> np.ndarray:
        """Primal array behind an engine value."""
        pass

    def matmul(self, a, b):
        return self.apply(PRIMITIVES["matmul"], a, b)

    def transpose(self, a):
        return self.apply(PRIMITIVES["transpose"], a)

    def add(self, a, b):
        return self.apply(PRIMITIVES["add"], a, b)

    def mul(self, a, b):
        return self.apply(PRIMITIVES["mul"], a, b)

    def scale(self, a, c: float):
        return self.apply(PRIMITIVES["scale"], a, np.asarray(float(c)))

    def tanh(self, a):
        return self.apply(PRIMITIVES["tanh"], a)

    def relu(self, a):
        return self.apply(PRIMITIVES["relu"], a)

    def gelu(self, a):
        return self.apply(PRIMITIVES["gelu"], a)

    def activation(self, kind: str, a):
        return getattr(self, kind)(a)

    def softmax_cross_entropy(self, logits, labels):
        return self.apply(PRIMITIVES["softmax_cross_entropy"], logits, np.asarray(labels))

    def mean(self, a):
        return self.apply(PRIMITIVES["mean"], a)

    def sum(self, a):
        return self.apply(PRIMITIVES["sum"], a)
