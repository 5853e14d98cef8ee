from typing import Optional

import numpy as np

from ..exceptions import StructuralError


class DualTensor:
    """Primal value paired with its tangent.

    ``tangent`` is ``None`` for an exact zero tangent. When the forward engine runs
    with ``lead`` leading tangent axes the tangent shape is ``lead_shape + primal.shape``.
    """
    __slots__ = ("primal", "tangent", "lead")

    def __init__(self, primal: np.ndarray, tangent: Optional[np.ndarray] = None, lead: int = 0):
        self.primal = primal
        self.tangent = tangent
        self.lead = lead
        if tangent is not None and tangent.shape[lead:] != np.shape(primal):
            raise StructuralError(
                f"Tangent shape {tangent.shape} does not match primal shape {np.shape(primal)}"
            )

    @property
    def shape(self) -> tuple:
        return np.shape(self.primal)

    def tangent_or_zero(self) -> np.ndarray:
        if self.tangent is not None:
            return self.tangent
        return np.zeros(np.shape(self.primal), dtype=np.float64)

    def __repr__(self) -> str:
        return f"DualTensor(shape={self.shape}, lead={self.lead}, zero_tangent={self.tangent is None})"
