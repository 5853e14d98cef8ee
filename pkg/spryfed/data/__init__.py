from .Dataset import Dataset
from .BiasMatrix import BiasMatrix
from .Partition import EXACT, Partition
from .synthetic import class_means, split_holdout, synth_classification
from .partitioning import dirichlet_partition
from .bias import bias_coefficients, default_concentration

__all__ = [
    'Dataset', 'BiasMatrix', 'EXACT', 'Partition', 'class_means', 'split_holdout',
    'synth_classification', 'dirichlet_partition', 'bias_coefficients', 'default_concentration',
]
