from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel

from ..utils.seeding import derive_tagged, make_generator, mix64


class PerturbationStream(BaseModel):
    """Seeded perturbations for one client in one round.

    Iteration ``t`` uses the generator keyed by ``mix64(base_seed, round, client, t)``;
    its K perturbations are drawn one after another, each as standard normals for
    the named parameters in the order given (store entry order).
    """
    base_seed: int
    round: int
    client: int

    def derived_seed(self, iteration: int) -> int:
        return mix64(self.base_seed, self.round, self.client, iteration)

    def draw(self, iteration: int, shapes: Dict[str, tuple], count: int = 1) -> List[Dict[str, np.ndarray]]:
        rng = make_generator(self.derived_seed(iteration))
        return [
            {name: rng.standard_normal(shape) for name, shape in shapes.items()}
            for _ in range(count)
        ]

    def batch_order(self, epoch: int, size: int) -> np.ndarray:
        return derive_tagged(self.base_seed, "batches", (self.round, self.client, epoch)).permutation(size)

    def batches(self, epoch: int, size: int, batch_size: int) -> List[np.ndarray]:
        order = self.batch_order(epoch, size)
        return [order[start:start + batch_size] for start in range(0, size, batch_size)]


class ZeroPerturbationStream(PerturbationStream):
    """Stream that yields all-zero perturbations."""

    def draw(self, iteration: int, shapes: Dict[str, tuple], count: int = 1) -> List[Dict[str, np.ndarray]]:
        return [{name: np.zeros(shape) for name, shape in shapes.items()} for _ in range(count)]
