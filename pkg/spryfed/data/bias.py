from typing import Sequence, Union

import numpy as np

from ..exceptions import StructuralError
from .BiasMatrix import BiasMatrix
from .Partition import Partition


def bias_coefficients(partition: Partition, alpha_c: Union[float, Sequence[float]]) -> BiasMatrix:
    """alpha_{m,c} = n_c / |D| - n_{m,c} * alpha_c / |D_m|."""
    counts = np.asarray(partition.client_class_counts, dtype=np.float64)
    parent = np.asarray(partition.class_counts, dtype=np.float64)
    concentration = np.broadcast_to(np.asarray(alpha_c, dtype=np.float64), parent.shape)
    if counts.shape != (partition.num_clients, partition.num_classes):
        raise StructuralError("Client class counts do not match the partition shape")
    if not np.array_equal(counts.sum(axis=0), parent):
        raise StructuralError("Client class counts do not sum to the parent class counts")
    sizes = counts.sum(axis=1, keepdims=True)
    alpha_mc = parent[None, :] / parent.sum() - counts * concentration[None, :] / sizes
    return BiasMatrix(alpha_mc=alpha_mc)


def default_concentration(partition: Partition) -> float:
    """Scalar used as alpha_c: the partition's Dirichlet alpha, 1 for the exact split."""
    return 1.0 if partition.is_exact() else float(partition.dirichlet_alpha)
