import json
from pathlib import Path
from typing import Dict, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..exceptions import StructuralError
from ..utils.seeding import derive_tagged
from .Dataset import Dataset

EXACT = "exact"
LOCAL_TRAIN_FRACTION = 0.8


class Partition(BaseModel):
    """Assignment of parent-dataset indices to M clients.

    Attributes:
        client_indices: one ascending index list per client
        class_counts: n_c of the parent dataset
        client_class_counts: n_{m,c}
        dirichlet_alpha: concentration used, or "exact" for the proportional split
        seed: partition seed
    """
    client_indices: List[List[int]]
    class_counts: List[int]
    client_class_counts: List[List[int]]
    dirichlet_alpha: Union[float, Literal["exact"]]
    seed: int = 0

    @property
    def num_clients(self) -> int:
        return len(self.client_indices)

    @property
    def num_classes(self) -> int:
        return len(self.class_counts)

    @property
    def total(self) -> int:
        return int(sum(self.class_counts))

    def client_sizes(self) -> List[int]:
        return [len(indices) for indices in self.client_indices]

    def is_exact(self) -> bool:
        return self.dirichlet_alpha == EXACT

    def verify(self, dataset: Dataset) -> None:
        """Check disjointness, nonempty clients and that stored counts match the indices."""
        seen = set()
        for m, indices in enumerate(self.client_indices):
            if not indices:
                raise StructuralError(f"Client {m} has no samples")
            overlap = seen.intersection(indices)
            if overlap:
                raise StructuralError(f"Client {m} shares indices {sorted(overlap)[:5]} with another client")
            seen.update(indices)
            recomputed = np.bincount(dataset.labels[np.asarray(indices)], minlength=dataset.num_classes)
            if list(recomputed) != list(self.client_class_counts[m]):
                raise StructuralError(f"Stored class counts of client {m} do not match its indices")
        if list(dataset.class_counts()) != list(self.class_counts):
            raise StructuralError("Stored parent class counts do not match the dataset")

    def local_split(self, client: int) -> Tuple[List[int], List[int]]:
        """Deterministic 80/20 local train/test split of one client's indices."""
        indices = np.asarray(self.client_indices[client], dtype=np.int64)
        order = derive_tagged(self.seed, "local-split", (client,)).permutation(len(indices))
        shuffled = indices[order]
        cut = int(np.ceil(LOCAL_TRAIN_FRACTION * len(indices)))
        return sorted(int(i) for i in shuffled[:cut]), sorted(int(i) for i in shuffled[cut:])

    def class_proportions(self) -> np.ndarray:
        counts = np.asarray(self.client_class_counts, dtype=np.float64)
        return counts / counts.sum(axis=1, keepdims=True)

    def to_json_dict(self) -> Dict:
        return {
            "dirichlet_alpha": self.dirichlet_alpha,
            "seed": self.seed,
            "class_counts": self.class_counts,
            "clients": {str(m): indices for m, indices in enumerate(self.client_indices)},
        }

    @classmethod
    def from_json_dict(cls, data: Dict, dataset: Dataset) -> "Partition":
        clients = [data["clients"][str(m)] for m in range(len(data["clients"]))]
        counts = [
            [int(x) for x in np.bincount(dataset.labels[np.asarray(ix)], minlength=dataset.num_classes)]
            for ix in clients
        ]
        partition = cls(
            client_indices=clients,
            class_counts=[int(x) for x in dataset.class_counts()],
            client_class_counts=counts,
            dirichlet_alpha=data["dirichlet_alpha"],
            seed=data.get("seed", 0),
        )
        partition.verify(dataset)
        return partition

    def dump(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")
