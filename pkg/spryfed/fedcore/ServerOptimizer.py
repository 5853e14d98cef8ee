from enum import Enum
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..model.ParamStore import ParamStore


class ServerOptimizerKind(str, Enum):
    FEDAVG_MEAN = "fedavg_mean"
    FEDADAM = "fedadam"
    FEDYOGI = "fedyogi"


class ServerOptState(BaseModel):
    """Adaptive server optimizer state; moments are keyed by trainable parameter name.

    Attributes:
        optimizer: update rule
        eta: global learning rate
        beta1: first-moment decay
        beta2: second-moment decay
        tau: adaptability constant
        initial_v: starting second moment; ``None`` means tau**2
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    optimizer: ServerOptimizerKind = ServerOptimizerKind.FEDYOGI
    eta: float = Field(default=1e-2, ge=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.99, ge=0.0, lt=1.0)
    tau: float = Field(default=1e-3, gt=0.0)
    initial_v: Optional[float] = Field(default=None, ge=0.0)
    m: Dict[str, np.ndarray] = {}
    v: Dict[str, np.ndarray] = {}
    steps: int = 0

    def _moments(self, name: str, like: np.ndarray):
        if name not in self.m:
            self.m[name] = np.zeros_like(like)
            start = self.tau ** 2 if self.initial_v is None else self.initial_v
            self.v[name] = np.full_like(like, start)
        return self.m[name], self.v[name]


def server_step(state: ServerOptState, w_r: ParamStore, w_prime: ParamStore) -> ParamStore:
    """Apply the round update ``delta = w' - w_r`` with the configured server rule.

    ``state`` is updated in place; the returned store is new.
    """
    state.steps += 1
    result = w_r.clone()
    for name in w_r.trainable_names():
        if state.optimizer == ServerOptimizerKind.FEDAVG_MEAN:
            result.set(name, w_prime.get(name).copy())
            continue
        weight = w_r.get(name)
        delta = w_prime.get(name) - weight
        m, v = state._moments(name, weight)
        m = state.beta1 * m + (1.0 - state.beta1) * delta
        squared = delta * delta
        if state.optimizer == ServerOptimizerKind.FEDADAM:
            v = state.beta2 * v + (1.0 - state.beta2) * squared
        else:
            v = v - (1.0 - state.beta2) * squared * np.sign(v - squared)
        state.m[name], state.v[name] = m, v
        result.set(name, weight + state.eta * m / (np.sqrt(v) + state.tau))
    return result
