from enum import Enum
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict


class EstimatorKind(str, Enum):
    FORWARD = "forward"
    REVERSE = "reverse"
    ZERO_ORDER = "zero_order"


class GradEstimate(BaseModel):
    """Per-parameter gradient (or gradient estimate) keyed by trainable parameter name."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grads: Dict[str, np.ndarray]
    estimator_kind: EstimatorKind
    loss: Optional[float] = None

    def flat(self) -> np.ndarray:
        """Concatenation of all gradients in key order."""
        if not self.grads:
            return np.zeros(0)
        return np.concatenate([np.ravel(g) for g in self.grads.values()])

    def norm_sq(self) -> float:
        flat = self.flat()
        return float(flat @ flat)

    def __str__(self) -> str:
        return f"GradEstimate(kind={self.estimator_kind.value}, params={list(self.grads)}, loss={self.loss})"

    def __repr__(self) -> str:
        return self.__str__()
