from typing import Any, Dict, Mapping, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..autodiff.Batch import Batch
from ..autodiff.Engine import Engine
from ..exceptions import StructuralError
from ..model.ParamStore import GroupKind, LayerGroup, ParamEntry, ParamStore


class QuadraticModel(BaseModel):
    """``f(w) = sum(curvature * w * w) + sum(linear * w)`` over one vector parameter ``w``.

    Ignores its batch; gradient is ``2 * curvature * w + linear``.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    curvature: np.ndarray
    linear: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "QuadraticModel":
        self.curvature = np.asarray(self.curvature, dtype=np.float64)
        self.linear = np.asarray(self.linear, dtype=np.float64)
        if self.curvature.shape != self.linear.shape or self.curvature.ndim != 1:
            raise StructuralError("curvature and linear must be vectors of equal length")
        return self

    @classmethod
    def linear_only(cls, gradient: np.ndarray) -> "QuadraticModel":
        gradient = np.asarray(gradient, dtype=np.float64)
        return cls(curvature=np.zeros_like(gradient), linear=gradient)

    @property
    def dim(self) -> int:
        return int(self.curvature.shape[0])

    @property
    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {"w": (self.dim,)}

    def __call__(self, engine: Engine, params: Mapping[str, Any], batch: Batch):
        w = params["w"]
        quadratic = engine.sum(engine.mul(engine.mul(w, w), self.curvature))
        return engine.add(quadratic, engine.sum(engine.mul(w, self.linear)))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return 2.0 * self.curvature * np.asarray(w) + self.linear

    def store(self, w: np.ndarray) -> ParamStore:
        return single_param_store(np.asarray(w, dtype=np.float64))

    def batch(self) -> Batch:
        return Batch.empty_input()


def single_param_store(w: np.ndarray, name: str = "w") -> ParamStore:
    return ParamStore(
        entries=[ParamEntry(name=name, value=w, trainable=True)],
        layer_groups=[LayerGroup(name="layer.0", members=[name], kind=GroupKind.DENSE)],
    )
