from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict


class UpdatedLayers(BaseModel):
    """Per-epoch payload: the client's assigned groups after local training."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    groups: Dict[str, Dict[str, np.ndarray]]
    sample_count: int
    mean_loss: Optional[float] = None
    grad_variance: Optional[float] = None


class JvpRecord(BaseModel):
    """Per-iteration payload: the scalar(s) a client sends after one local step.

    ``coefficients`` holds one jvp (or finite-difference) scalar per perturbation.
    """
    iteration: int
    coefficients: List[float]
    loss: float

    @property
    def jvp(self) -> float:
        return self.coefficients[0]


class ClientUpdate(BaseModel):
    client_id: int
    payload: Union[UpdatedLayers, JvpRecord]

    def __str__(self) -> str:
        return f"ClientUpdate(client_id={self.client_id}, payload={type(self.payload).__name__})"

    def __repr__(self) -> str:
        return self.__str__()
