from abc import ABC, abstractmethod
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from .ClientUpdate import ClientUpdate
from .GradientEstimator import ForwardGradientEstimator, GradientEstimator
from .RoundPlan import CommMode
from .ServerOptimizer import ServerOptimizerKind


class UpdateFilter(BaseModel, ABC):
    """Server-side admission rule applied to client updates before aggregation."""

    @abstractmethod
    def select(self, updates: List[ClientUpdate], round_index: int) -> List[ClientUpdate]:
        pass


class TrainingProfile(BaseModel):
    """How one training method behaves inside the shared round loop.

    Attributes:
        name: method name written to the metrics trace
        estimator: local gradient estimator
        split: cyclic layer-to-client mapping when true, every group to every client otherwise
        server_optimizer: default server rule when the config does not name one
        local_epochs: default local epochs when the config does not set them
        mode: communication mode forced by the method, or ``None`` to follow the config
        supported_modes: modes the method can run in
        local_iterations: cap on local steps per round
        update_filter: optional admission rule for client updates
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    estimator: GradientEstimator
    split: bool = True
    server_optimizer: ServerOptimizerKind = ServerOptimizerKind.FEDYOGI
    local_epochs: int = 1
    mode: Optional[CommMode] = None
    supported_modes: List[CommMode] = [CommMode.PER_EPOCH, CommMode.PER_ITERATION]
    local_iterations: Optional[int] = None
    update_filter: Optional[UpdateFilter] = None


def spry_profile(perturbations: int = 1) -> TrainingProfile:
    return TrainingProfile(name="spry", estimator=ForwardGradientEstimator(perturbations=perturbations))
