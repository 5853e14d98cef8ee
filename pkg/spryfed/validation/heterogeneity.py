"""Bias of the aggregated forward-gradient round direction under data heterogeneity.

Client ``m`` sees the class-mixture loss ``sum_c pi_{m,c} f_c`` where ``f_c`` is the
mean loss over all samples of class ``c`` and ``pi_{m,c} = n_{m,c} / |D_m|``; all
clients hold identical weights. Each client perturbs only the layer groups assigned
to it by the cyclic mapping, and group estimates are averaged with sample-count
weights over the clients sharing the group.
"""
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import spearmanr

from ..autodiff.Batch import Batch
from ..autodiff.gradients import ModelFn, jvp_batch, reverse_grad
from ..data.Dataset import Dataset
from ..data.Partition import EXACT, Partition
from ..data.bias import bias_coefficients, default_concentration
from ..data.partitioning import dirichlet_partition
from ..exceptions import ArgumentError
from ..fedcore.RoundPlan import map_layers_to_clients
from ..model.ParamStore import ParamStore
from ..model.builder import freeze_except, list_trainable_layers
from ..utils.logger import get_logger
from ..utils.seeding import derive_tagged
from .TheoryReport import TheoryReport
from .estimators import CHUNK, Z_TOLERANCE, RunningMoments, z_scores

logger = get_logger()

SPEARMAN_THRESHOLD = 0.8


class AggregateEstimate(BaseModel):
    """Monte-Carlo mean of the aggregated round direction and its references."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray
    standard_error: np.ndarray
    expected: np.ndarray
    true_gradient: np.ndarray
    samples: int

    @property
    def measured_bias(self) -> float:
        return float(np.linalg.norm(self.mean - self.true_gradient))

    @property
    def expected_bias(self) -> float:
        return float(np.linalg.norm(self.expected - self.true_gradient))


def class_batches(dataset: Dataset) -> List[Optional[Batch]]:
    return [
        dataset.batch(np.flatnonzero(dataset.labels == c)) if np.any(dataset.labels == c) else None
        for c in range(dataset.num_classes)
    ]


def aggregate_forward_estimate(model_fn: ModelFn, store: ParamStore, dataset: Dataset, partition: Partition,
                               samples: int, seed: int) -> AggregateEstimate:
    """Mean over ``samples`` perturbation draws of the aggregated forward round direction."""
    groups = list_trainable_layers(store)
    clients = list(range(partition.num_clients))
    mapping = map_layers_to_clients(groups, clients)
    names = store.trainable_names()
    offsets: Dict[str, slice] = {}
    position = 0
    for name in names:
        size = store.get(name).size
        offsets[name] = slice(position, position + size)
        position += size

    batches = class_batches(dataset)
    mixtures = partition.class_proportions()
    sizes = partition.client_sizes()
    class_grads = [None if b is None else reverse_grad(model_fn, store, b).flat() for b in batches]
    true_gradient = reverse_grad(model_fn, store, dataset.batch()).flat()

    # weight of client m on each of its groups
    weights: Dict[Tuple[int, str], float] = {}
    for group, members in mapping.items():
        total = float(sum(sizes[m] for m in members))
        for m in members:
            weights[(m, group)] = sizes[m] / total

    expected = np.zeros(position)
    moments = RunningMoments(position)
    client_stores = {m: freeze_except(store, [g for g in groups if m in mapping[g]]) for m in clients}
    for m in clients:
        for name in client_stores[m].trainable_names():
            w = weights[(m, store.group_of(name))]
            local = sum(mixtures[m, c] * class_grads[c][offsets[name]]
                        for c in range(dataset.num_classes) if class_grads[c] is not None)
            expected[offsets[name]] += w * local

    remaining, chunk_index = samples, 0
    while remaining:
        count = min(CHUNK, remaining)
        rows = np.zeros((count, position))
        for m in clients:
            local_store = client_stores[m]
            rng = derive_tagged(seed, "aggregate-estimate", (m, chunk_index))
            tangents = {name: rng.standard_normal((count,) + store.get(name).shape)
                        for name in local_store.trainable_names()}
            directional = np.zeros(count)
            for c, batch in enumerate(batches):
                if batch is not None and mixtures[m, c] > 0:
                    directional = directional + mixtures[m, c] * jvp_batch(model_fn, local_store, tangents, batch)[1]
            for name, v in tangents.items():
                w = weights[(m, store.group_of(name))]
                rows[:, offsets[name]] += w * directional[:, None] * v.reshape(count, -1)
        moments.add(rows)
        remaining -= count
        chunk_index += 1

    return AggregateEstimate(mean=moments.mean, standard_error=moments.standard_error, expected=expected,
                             true_gradient=true_gradient, samples=samples)


def check_homogeneous_estimate(model_fn: ModelFn, store: ParamStore, dataset: Dataset, num_clients: int,
                               samples: int = 10_000, seed: int = 0) -> TheoryReport:
    """Under the exact proportional split the aggregated direction is unbiased.

    Asserts every coordinate of the Monte-Carlo mean lies within 4 standard errors
    of the global reverse-mode gradient.
    """
    partition = dirichlet_partition(dataset, num_clients, EXACT, seed)
    estimate = aggregate_forward_estimate(model_fn, store, dataset, partition, samples, seed)
    z = z_scores(estimate.mean, estimate.true_gradient, estimate.standard_error)
    max_z = float(np.max(np.abs(z)))
    penalty = bias_coefficients(partition, default_concentration(partition)).penalty()

    report = TheoryReport(experiment="homogeneous", seed=seed)
    report.statistics = {
        "dim": int(estimate.mean.size), "clients": num_clients, "max_abs_z": max_z,
        "measured_bias": estimate.measured_bias, "expected_bias": estimate.expected_bias,
        "bias_penalty": penalty,
    }
    report.predictions = {"bias": 0.0}
    report.check("max_abs_z", max_z <= Z_TOLERANCE, Z_TOLERANCE, samples, measured=max_z, expected=0.0)
    logger.info("Homogeneous estimate: M=%d N=%d max|z|=%.3f", num_clients, samples, max_z)
    return report


def _alpha_order(alpha: Union[float, str]) -> float:
    return np.inf if alpha == EXACT else float(alpha)


def bias_sweep(model_fn: ModelFn, store: ParamStore, dataset: Dataset, alphas: Sequence[Union[float, str]],
               num_clients: int, seeds: Sequence[int], samples: int = 200,
               concentration: Optional[float] = 1.0) -> TheoryReport:
    """Heterogeneity penalty against measured aggregate bias across Dirichlet concentrations.

    For every (alpha, seed) the partition's penalty ``sum alpha_{m,c}^2`` and the
    measured bias norm of the aggregated direction are recorded. The asserted penalty
    uses ``alpha_c = concentration``; ``None`` takes the partition's own alpha. The
    penalty under the partition alpha is recorded as ``partition_alpha_penalty``
    either way.

    Asserts a Spearman rank correlation of at least 0.8 between the seed-averaged
    penalty and the seed-averaged measured bias across alphas, and that the
    seed-averaged penalty does not grow with alpha.
    """
    if not alphas or not seeds:
        raise ArgumentError("bias_sweep needs at least one alpha and one seed")
    rows = []
    for alpha in alphas:
        for seed in seeds:
            partition = dirichlet_partition(dataset, num_clients, alpha, seed)
            own_penalty = bias_coefficients(partition, default_concentration(partition)).penalty()
            penalty = own_penalty if concentration is None else bias_coefficients(partition, concentration).penalty()
            estimate = aggregate_forward_estimate(model_fn, store, dataset, partition, samples, seed)
            rows.append({"alpha": alpha, "seed": seed, "penalty": penalty, "partition_alpha_penalty": own_penalty,
                         "measured_bias": estimate.measured_bias, "expected_bias": estimate.expected_bias})

    per_alpha = []
    for alpha in alphas:
        picked = [r for r in rows if r["alpha"] == alpha]
        per_alpha.append({
            "alpha": alpha,
            "mean_penalty": float(np.mean([r["penalty"] for r in picked])),
            "mean_partition_alpha_penalty": float(np.mean([r["partition_alpha_penalty"] for r in picked])),
            "mean_measured_bias": float(np.mean([r["measured_bias"] for r in picked])),
            "mean_expected_bias": float(np.mean([r["expected_bias"] for r in picked])),
        })

    penalties = [p["mean_penalty"] for p in per_alpha]
    biases = [p["mean_measured_bias"] for p in per_alpha]
    rho = float(spearmanr(penalties, biases)[0]) if len(per_alpha) > 1 else float("nan")
    pooled = float(spearmanr([r["penalty"] for r in rows], [r["measured_bias"] for r in rows])[0]) \
        if len(rows) > 2 else float("nan")

    by_concentration = sorted(per_alpha, key=lambda p: _alpha_order(p["alpha"]))
    ordered = [p["mean_penalty"] for p in by_concentration]
    nonincreasing = all(a >= b for a, b in zip(ordered, ordered[1:]))

    report = TheoryReport(experiment="bias_sweep", seed=int(seeds[0]))
    report.statistics = {
        "clients": num_clients, "seeds": list(seeds), "samples": samples, "concentration": concentration,
        "per_alpha": per_alpha,
        "spearman": None if np.isnan(rho) else rho, "pooled_spearman": None if np.isnan(pooled) else pooled,
        "rows": rows,
    }
    report.check("spearman", not np.isnan(rho) and rho >= SPEARMAN_THRESHOLD, SPEARMAN_THRESHOLD,
                 len(rows), measured=None if np.isnan(rho) else rho)
    report.check("penalty_nonincreasing_in_alpha", nonincreasing, 0.0, len(rows))
    logger.info("Bias sweep: alphas=%s spearman=%s", list(alphas), rho)
    return report
