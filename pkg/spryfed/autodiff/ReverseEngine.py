from typing import Dict, List, Optional, Sequence

import numpy as np

from .Engine import Engine
from .primitives import Primitive


class Variable:
    """Node on the reverse-mode tape."""
    __slots__ = ("value", "primitive", "inputs", "requires_grad", "position")

    def __init__(self, value: np.ndarray, primitive: Optional[Primitive], inputs: Sequence["Variable"],
                 requires_grad: bool, position: int):
        self.value = value
        self.primitive = primitive
        self.inputs = list(inputs)
        self.requires_grad = requires_grad
        self.position = position


class ReverseEngine(Engine):
    """Records a tape during the forward pass and pulls cotangents back through it."""

    def __init__(self):
        self.tape: List[Variable] = []

    def leaf(self, value: np.ndarray, requires_grad: bool) -> Variable:
        node = Variable(np.asarray(value), None, (), requires_grad, len(self.tape))
        self.tape.append(node)
        return node

    def lift(self, x) -> Variable:
        if isinstance(x, Variable):
            return x
        return self.leaf(np.asarray(x), False)

    def apply(self, primitive, *args):
        inputs = [self.lift(a) for a in args]
        out = primitive.primal(*[node.value for node in inputs])
        requires_grad = any(node.requires_grad for node in inputs)
        node = Variable(out, primitive, inputs, requires_grad, len(self.tape))
        self.tape.append(node)
        return node

    def value_of(self, x):
        return self.lift(x).value

    def backward(self, output: Variable) -> Dict[int, np.ndarray]:
        """Cotangents of ``output`` keyed by tape position, for nodes that require grad."""
        grads: Dict[int, np.ndarray] = {output.position: np.ones_like(output.value, dtype=np.float64)}
        for node in reversed(self.tape[:output.position + 1]):
            g = grads.get(node.position)
            if g is None or node.primitive is None or not node.requires_grad:
                continue
            xs = [inp.value for inp in node.inputs]
            cotangents = node.primitive.adjoint(xs, node.value, g)
            for inp, ct in zip(node.inputs, cotangents):
                if ct is None or not inp.requires_grad:
                    continue
                if inp.position in grads:
                    grads[inp.position] = grads[inp.position] + ct
                else:
                    grads[inp.position] = np.asarray(ct, dtype=np.float64)
        return grads
