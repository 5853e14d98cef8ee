from typing import Tuple

import numpy as np

from ..exceptions import ArgumentError
from ..utils.seeding import derive_tagged
from .Dataset import Dataset


def synth_classification(n: int, d: int, num_classes: int, margin: float, seed: int) -> Dataset:
    """Gaussian class blobs.

    Class means are ``margin * N(0, I_d)``; each sample is its class mean plus
    N(0, I_d) noise. Class counts are ``n // C`` with the remainder going to the
    lowest class ids, and the label order is a seeded permutation.
    """
    if num_classes < 2:
        raise ArgumentError(f"Need at least two classes, got {num_classes}")
    if n < num_classes:
        raise ArgumentError(f"Need n >= C, got n={n}, C={num_classes}")
    if d < 1:
        raise ArgumentError(f"Need d >= 1, got {d}")
    if margin < 0:
        raise ArgumentError(f"margin must be nonnegative, got {margin}")

    rng = derive_tagged(seed, "synth")
    means = margin * rng.standard_normal((num_classes, d))
    counts = np.full(num_classes, n // num_classes)
    counts[: n % num_classes] += 1
    labels = rng.permutation(np.repeat(np.arange(num_classes), counts))
    features = means[labels] + rng.standard_normal((n, d))
    return Dataset(features=features, labels=labels, num_classes=num_classes)


def class_means(dataset: Dataset) -> np.ndarray:
    return np.stack([dataset.features[dataset.labels == c].mean(axis=0) for c in range(dataset.num_classes)])


def split_holdout(dataset: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded (train, held-out) split; ``fraction`` of samples go to the held-out set."""
    if not 0.0 < fraction < 1.0:
        raise ArgumentError(f"Held-out fraction must be in (0, 1), got {fraction}")
    order = derive_tagged(seed, "holdout").permutation(len(dataset))
    cut = len(dataset) - max(1, int(round(fraction * len(dataset))))
    return dataset.subset(np.sort(order[:cut])), dataset.subset(np.sort(order[cut:]))
