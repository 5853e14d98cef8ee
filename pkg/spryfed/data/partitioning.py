from typing import List, Union

import numpy as np

from ..exceptions import ArgumentError
from ..utils.logger import get_logger
from ..utils.seeding import derive_tagged
from .Dataset import Dataset
from .Partition import EXACT, Partition

logger = get_logger()


def allocate(total: int, proportions: np.ndarray) -> List[int]:
    """Round ``total * proportions`` down, then hand out the remainder one sample
    at a time by largest fractional share, ties to the lowest client id."""
    raw = proportions * total
    base = np.floor(raw).astype(np.int64)
    remainder = int(total - base.sum())
    fractional = raw - base
    order = sorted(range(len(proportions)), key=lambda m: (-fractional[m], m))
    for m in order[:remainder]:
        base[m] += 1
    return [int(x) for x in base]


def exact_allocate(total: int, clients: int) -> List[int]:
    base, remainder = divmod(total, clients)
    return [base + (1 if m < remainder else 0) for m in range(clients)]


def dirichlet_partition(dataset: Dataset, num_clients: int, alpha: Union[float, str], seed: int) -> Partition:
    """Split ``dataset`` across clients class by class.

    For every class the samples are shuffled and dealt out according to
    proportions drawn from Dir(alpha * 1_M), or equal proportions when
    ``alpha == "exact"``. Clients left empty take one sample from the largest
    client (ties to the lowest id), lowest empty id first.
    """
    if num_clients < 1:
        raise ArgumentError(f"Need at least one client, got {num_clients}")
    if num_clients > len(dataset):
        raise ArgumentError(f"More clients ({num_clients}) than samples ({len(dataset)})")
    exact = alpha == EXACT
    if not exact:
        if isinstance(alpha, str) or not alpha > 0:
            raise ArgumentError(f"Dirichlet alpha must be positive or 'exact', got {alpha!r}")
        alpha = float(alpha)

    rng = derive_tagged(seed, "partition")
    clients: List[List[int]] = [[] for _ in range(num_clients)]
    for c in range(dataset.num_classes):
        members = np.flatnonzero(dataset.labels == c)
        members = members[rng.permutation(len(members))]
        if exact:
            counts = exact_allocate(len(members), num_clients)
        else:
            counts = allocate(len(members), rng.dirichlet(np.full(num_clients, alpha)))
        start = 0
        for m, count in enumerate(counts):
            clients[m].extend(int(i) for i in members[start:start + count])
            start += count

    for m in range(num_clients):
        if clients[m]:
            continue
        donor = max(range(num_clients), key=lambda k: (len(clients[k]), -k))
        clients[m].append(clients[donor].pop())
        logger.debug("Client %d was empty; moved one sample from client %d", m, donor)

    clients = [sorted(indices) for indices in clients]
    client_counts = [
        [int(x) for x in np.bincount(dataset.labels[np.asarray(ix)], minlength=dataset.num_classes)]
        for ix in clients
    ]
    partition = Partition(
        client_indices=clients,
        class_counts=[int(x) for x in dataset.class_counts()],
        client_class_counts=client_counts,
        dirichlet_alpha=EXACT if exact else alpha,
        seed=seed,
    )
    partition.verify(dataset)
    return partition
