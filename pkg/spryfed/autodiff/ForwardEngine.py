import numpy as np

from .DualTensor import DualTensor
from .Engine import Engine


class ForwardEngine(Engine):
    """Forward-mode evaluation: every value is a DualTensor, one pass yields the jvp."""

    def __init__(self, lead: int = 0):
        self.lead = lead

    def lift(self, x) -> DualTensor:
        if isinstance(x, DualTensor):
            return x
        return DualTensor(np.asarray(x), None, self.lead)

    def apply(self, primitive, *args):
        duals = [self.lift(a) for a in args]
        xs = [d.primal for d in duals]
        out = primitive.primal(*xs)
        dxs = [d.tangent for d in duals]
        tangent = None
        if any(dx is not None for dx in dxs):
            tangent = primitive.tangent(xs, dxs, out, self.lead)
            if tangent is not None:
                tangent = np.asarray(tangent, dtype=np.float64)
        return DualTensor(out, tangent, self.lead)

    def value_of(self, x):
        return self.lift(x).primal
