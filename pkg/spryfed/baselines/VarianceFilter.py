from typing import List

from pydantic import Field

from ..fedcore.ClientUpdate import ClientUpdate, UpdatedLayers
from ..fedcore.TrainingProfile import UpdateFilter
from ..utils.logger import get_logger

logger = get_logger()


class VarianceFilter(UpdateFilter):
    """Admit a client only if the population variance of its mean gradient estimate is below ``threshold``."""
    threshold: float = Field(gt=0.0)

    def select(self, updates: List[ClientUpdate], round_index: int) -> List[ClientUpdate]:
        kept = []
        for update in updates:
            payload = update.payload
            variance = payload.grad_variance if isinstance(payload, UpdatedLayers) else None
            if variance is not None and not variance < self.threshold:
                logger.warning("Round %d: excluding client %d (gradient variance %.3e >= %.3e)",
                               round_index, update.client_id, variance, self.threshold)
                continue
            kept.append(update)
        return kept
