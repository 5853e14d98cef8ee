from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..autodiff.Batch import Batch
from ..autodiff.Engine import Engine
from ..autodiff.PrimalEngine import PrimalEngine
from .LoRAAdapter import LoRAAdapter
from .ModelSpec import Architecture, ModelSpec


class DenseLayer(BaseModel):
    """Parameter names of one matmul layer and its optional adapter."""
    prefix: str
    d_in: int
    d_out: int
    lora: bool = False

    @property
    def weight(self) -> str:
        return f"{self.prefix}.weight"

    @property
    def bias(self) -> str:
        return f"{self.prefix}.bias"

    @property
    def lora_a(self) -> str:
        return f"{self.prefix}.lora_A"

    @property
    def lora_b(self) -> str:
        return f"{self.prefix}.lora_B"


class Network(BaseModel):
    """Model function built from a ModelSpec.

    Calling the network as ``network(engine, params, batch)`` returns the mean
    softmax cross-entropy over the batch, expressed in engine operations so every
    gradient engine can run it.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: ModelSpec
    hidden: List[DenseLayer]
    head: DenseLayer

    @classmethod
    def from_spec(cls, spec: ModelSpec) -> "Network":
        adapted = spec.lora is not None
        hidden = [
            DenseLayer(prefix=f"layer{i}", d_in=d_in, d_out=d_out, lora=adapted)
            for i, (d_in, d_out) in enumerate(spec.hidden_shapes())
        ]
        head = DenseLayer(
            prefix="head",
            d_in=spec.widths[-1],
            d_out=spec.num_classes,
            lora=adapted and spec.architecture == Architecture.LOGREG,
        )
        return cls(spec=spec, hidden=hidden, head=head)

    @property
    def layers(self) -> List[DenseLayer]:
        return self.hidden + [self.head]

    @property
    def lora_scaling(self) -> float:
        return self.spec.lora.alpha / self.spec.lora.r if self.spec.lora else 1.0

    @property
    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        for layer in self.layers:
            shapes[layer.weight] = (layer.d_out, layer.d_in)
            shapes[layer.bias] = (layer.d_out,)
            if layer.lora:
                shapes[layer.lora_a] = (self.spec.lora.r, layer.d_in)
                shapes[layer.lora_b] = (layer.d_out, self.spec.lora.r)
        return shapes

    def _dense(self, engine: Engine, layer: DenseLayer, params: Mapping[str, Any], x):
        z = engine.add(engine.matmul(x, engine.transpose(params[layer.weight])), params[layer.bias])
        if layer.lora:
            delta = LoRAAdapter.forward(engine, x, params[layer.lora_a], params[layer.lora_b], self.lora_scaling)
            z = engine.add(z, delta)
        return z

    def logits(self, engine: Engine, params: Mapping[str, Any], features):
        h = features
        for layer in self.hidden:
            h = engine.activation(self.spec.activation.value, self._dense(engine, layer, params, h))
        return self._dense(engine, self.head, params, h)

    def __call__(self, engine: Engine, params: Mapping[str, Any], batch: Batch):
        logits = self.logits(engine, params, batch.features)
        return engine.mean(engine.softmax_cross_entropy(logits, batch.labels))

    def predict(self, values: Mapping[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        logits = self.logits(PrimalEngine(), values, np.asarray(features, dtype=np.float64))
        return np.argmax(logits, axis=-1)

    def accuracy(self, values: Mapping[str, np.ndarray], batch: Optional[Batch]) -> float:
        if batch is None or len(batch) == 0:
            return float("nan")
        return float(np.mean(self.predict(values, batch.features) == batch.labels))

    def adapter(self, values: Mapping[str, np.ndarray], layer: DenseLayer) -> Optional[LoRAAdapter]:
        if not layer.lora:
            return None
        return LoRAAdapter(A=values[layer.lora_a], B=values[layer.lora_b],
                           r=self.spec.lora.r, alpha=self.spec.lora.alpha)
