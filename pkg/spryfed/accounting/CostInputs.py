from enum import Enum
from typing import List

from pydantic import BaseModel, Field, model_validator

from ..exceptions import ArgumentError
from ..fedcore.RoundPlan import CommMode


class CostInputs(BaseModel):
    """Symbols of the communication and computation cost formulas.

    Attributes:
        clients: M, participating clients per round
        layers: L, trainable layer count
        layer_params: w_l, parameters per layer
        matmul_cost: c, cost of one layer's matrix multiplication
        jvp_overhead: v, column-by-column overhead of a jvp
        perturbations: K, perturbations per iteration
        mode: communication frequency
    """
    clients: int = Field(ge=1)
    layers: int = Field(ge=1)
    layer_params: int = Field(ge=1)
    matmul_cost: float = Field(default=1.0, gt=0.0)
    jvp_overhead: float = Field(default=1.0, gt=0.0)
    perturbations: int = Field(default=1, ge=1)
    mode: CommMode = CommMode.PER_EPOCH

    @property
    def total_params(self) -> int:
        """w_g = w_l * L."""
        return self.layer_params * self.layers


class MethodKind(str, Enum):
    BACKPROP = "backprop"
    ZERO_ORDER = "zero_order"
    FORWARD_AD = "forward_ad"


class MemoryInputs(BaseModel):
    """Scalar counts for the analytic memory model.

    Attributes:
        activations: a_1..a_n, activation scalars per sample of each layer
        batch_size: B
        trainable_params: P_t
        total_params: P
        optimizer_multiplier: optimizer state per trainable scalar (Adam keeps 2)
    """
    activations: List[float]
    batch_size: int = Field(ge=1)
    trainable_params: int = Field(ge=0)
    total_params: int = Field(ge=0)
    optimizer_multiplier: float = Field(default=2.0, ge=0.0)

    def check(self) -> "MemoryInputs":
        if not self.activations or any(a <= 0 for a in self.activations):
            raise ArgumentError(f"Activation sizes must be positive, got {self.activations}")
        if self.trainable_params > self.total_params:
            raise ArgumentError("Trainable parameter count exceeds the total")
        return self
