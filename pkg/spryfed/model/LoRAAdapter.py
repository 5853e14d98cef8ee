import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..autodiff.Engine import Engine


class LoRAAdapter(BaseModel):
    """Low-rank pair added to a frozen weight: contribution ``(alpha / r) * B @ A``."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    A: np.ndarray
    B: np.ndarray
    r: int = Field(..., gt=0)
    alpha: float = Field(..., gt=0)

    @property
    def scaling(self) -> float:
        return self.alpha / self.r

    def effective_delta(self) -> np.ndarray:
        return self.scaling * (self.B @ self.A)

    def is_identity(self) -> bool:
        return not np.any(self.B)

    @staticmethod
    def forward(engine: Engine, x, a, b, scaling: float):
        """``scaling * x @ A^T @ B^T`` for a batch of row vectors ``x``."""
        low = engine.matmul(x, engine.transpose(a))
        return engine.scale(engine.matmul(low, engine.transpose(b)), scaling)
