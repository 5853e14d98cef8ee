from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from ..exceptions import ArgumentError


class Architecture(str, Enum):
    LOGREG = "logreg"
    MLP = "mlp"


class Activation(str, Enum):
    TANH = "tanh"
    RELU = "relu"
    GELU = "gelu"


class LoRASpec(BaseModel):
    """Rank and scale of the LoRA adapters (defaults r=1, alpha=1)."""
    r: int = Field(1, gt=0)
    alpha: float = Field(1.0, gt=0)


class ModelSpec(BaseModel):
    """Fully determines a ParamStore given ``init_seed``.

    Attributes:
        architecture: ``logreg`` (single linear layer) or ``mlp``
        widths: input width followed by hidden widths; ``[d]`` for logreg
        activation: hidden nonlinearity of the MLP
        lora: adapter rank/scale, or None for dense finetuning
        num_classes: output classes
        init_seed: seed of the counter-based initialization stream
        train_head: whether the classifier group starts trainable
    """
    architecture: Architecture = Architecture.MLP
    widths: List[int]
    activation: Activation = Activation.TANH
    lora: Optional[LoRASpec] = None
    num_classes: int = Field(..., ge=2)
    init_seed: int = 0
    train_head: bool = True

    def check(self) -> "ModelSpec":
        """Raise ArgumentError unless the spec describes a buildable model."""
        if any(w <= 0 for w in self.widths):
            raise ArgumentError(f"Layer widths must be positive, got {self.widths}")
        if self.architecture == Architecture.LOGREG and len(self.widths) != 1:
            raise ArgumentError("logreg takes exactly one width (the input dimension)")
        if self.architecture == Architecture.MLP and len(self.widths) < 2:
            raise ArgumentError("mlp needs an input width and at least one hidden width")
        if self.lora is not None:
            for d_in, d_out in self.adapted_shapes():
                if self.lora.r > min(d_in, d_out):
                    raise ArgumentError(
                        f"LoRA rank {self.lora.r} exceeds min(d_in={d_in}, d_out={d_out})"
                    )
        return self

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    def hidden_shapes(self) -> List[Tuple[int, int]]:
        if self.architecture == Architecture.LOGREG:
            return []
        return list(zip(self.widths[:-1], self.widths[1:]))

    def adapted_shapes(self) -> List[Tuple[int, int]]:
        """(d_in, d_out) of every matmul that carries a LoRA adapter."""
        if self.architecture == Architecture.LOGREG:
            return [(self.widths[0], self.num_classes)]
        return self.hidden_shapes()
