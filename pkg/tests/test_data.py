import json

import numpy as np
import pytest

from spryfed.data import (
    EXACT,
    Dataset,
    Partition,
    bias_coefficients,
    default_concentration,
    dirichlet_partition,
    split_holdout,
    synth_classification,
)
from spryfed.exceptions import ArgumentError, StructuralError
from spryfed.model.ModelSpec import Architecture, ModelSpec
from spryfed.model.builder import build_model


def two_class_partition(first, second):
    """Eight samples, labels 0,0,0,0,1,1,1,1, split between two clients."""
    labels = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    dataset = Dataset(features=np.zeros((8, 1)), labels=labels, num_classes=2)
    counts = [[int(x) for x in np.bincount(labels[ix], minlength=2)] for ix in (first, second)]
    partition = Partition(client_indices=[first, second], class_counts=[4, 4], client_class_counts=counts,
                          dirichlet_alpha=1.0)
    partition.verify(dataset)
    return partition


def test_synth_balanced_class_counts():
    dataset = synth_classification(n=100, d=3, num_classes=4, margin=1.0, seed=0)
    assert list(dataset.class_counts()) == [25, 25, 25, 25]
    assert list(synth_classification(n=10, d=2, num_classes=4, margin=1.0, seed=0).class_counts()) == [3, 3, 2, 2]


def test_synth_is_deterministic():
    first = synth_classification(n=50, d=4, num_classes=3, margin=2.0, seed=9)
    second = synth_classification(n=50, d=4, num_classes=3, margin=2.0, seed=9)
    assert first.to_bytes() == second.to_bytes()
    assert synth_classification(n=50, d=4, num_classes=3, margin=2.0, seed=10).to_bytes() != first.to_bytes()


@pytest.mark.parametrize("n,d,c", [(3, 2, 4), (10, 0, 2), (10, 2, 1)])
def test_synth_rejects_invalid_sizes(n, d, c):
    with pytest.raises(ArgumentError):
        synth_classification(n=n, d=d, num_classes=c, margin=1.0, seed=0)


def test_well_separated_blobs_are_linearly_fit():
    from spryfed.autodiff.gradients import reverse_grad

    dataset = synth_classification(n=80, d=5, num_classes=3, margin=50.0, seed=1)
    network, store = build_model(ModelSpec(architecture=Architecture.LOGREG, widths=[5], num_classes=3))
    for _ in range(100):
        grads = reverse_grad(network, store, dataset.batch()).grads
        store.update({name: store.get(name) - 0.01 * g for name, g in grads.items()})
    assert network.accuracy(store.values(), dataset.batch()) == 1.0


def test_csv_round_trip(tmp_path, blobs):
    path = tmp_path / "data.csv"
    blobs.to_csv(path)
    restored = Dataset.from_csv(path, blobs.num_classes)
    assert restored.to_bytes() == blobs.to_bytes()


def test_csv_requires_label_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,f0\n0,1.0\n")
    with pytest.raises(ArgumentError):
        Dataset.from_csv(path)


def test_dataset_rejects_out_of_range_labels():
    with pytest.raises(StructuralError):
        Dataset(features=np.zeros((2, 1)), labels=np.array([0, 2]), num_classes=2)


def test_exact_partition_matches_global_proportions():
    dataset = synth_classification(n=120, d=2, num_classes=3, margin=1.0, seed=0)
    partition = dirichlet_partition(dataset, 4, EXACT, seed=0)
    assert partition.client_class_counts == [[10, 10, 10]] * 4
    bias = bias_coefficients(partition, default_concentration(partition))
    assert bias.is_zero()
    assert bias.penalty() == 0.0


@pytest.mark.parametrize("alpha", [EXACT, 10.0, 1.0, 0.1])
def test_partition_conserves_samples(alpha, blobs):
    partition = dirichlet_partition(blobs, 7, alpha, seed=3)
    counts = np.asarray(partition.client_class_counts)
    assert list(counts.sum(axis=0)) == list(blobs.class_counts())
    assert all(size >= 1 for size in partition.client_sizes())
    flat = sorted(i for indices in partition.client_indices for i in indices)
    assert flat == list(range(len(blobs)))
    partition.verify(blobs)


def test_partition_is_deterministic(blobs):
    assert dirichlet_partition(blobs, 5, 0.3, seed=1) == dirichlet_partition(blobs, 5, 0.3, seed=1)


def test_partition_argument_errors(blobs):
    with pytest.raises(ArgumentError):
        dirichlet_partition(blobs, len(blobs) + 1, 1.0, seed=0)
    with pytest.raises(ArgumentError):
        dirichlet_partition(blobs, 0, 1.0, seed=0)
    with pytest.raises(ArgumentError):
        dirichlet_partition(blobs, 3, 0.0, seed=0)
    with pytest.raises(ArgumentError):
        dirichlet_partition(blobs, 3, "uniform", seed=0)


def test_every_client_nonempty_with_many_clients():
    dataset = synth_classification(n=20, d=2, num_classes=2, margin=1.0, seed=0)
    partition = dirichlet_partition(dataset, 20, 0.05, seed=4)
    assert partition.client_sizes() == [1] * 20


def test_low_alpha_concentrates_classes():
    dataset = synth_classification(n=400, d=2, num_classes=4, margin=1.0, seed=0)

    def dominance(alpha, seed):
        return float(np.max(dirichlet_partition(dataset, 10, alpha, seed).class_proportions().max(axis=1)))

    wins = sum(dominance(0.1, seed) > dominance(1.0, seed) for seed in range(100))
    assert wins >= 95


def test_penalty_decreases_with_alpha():
    dataset = synth_classification(n=200, d=2, num_classes=4, margin=1.0, seed=0)
    means = []
    for alpha in (0.1, 1.0, 10.0):
        penalties = [bias_coefficients(dirichlet_partition(dataset, 8, alpha, seed), 1.0).penalty()
                     for seed in range(50)]
        means.append(np.mean(penalties))
    assert means[0] >= means[1] >= means[2]


def test_bias_arithmetic_example():
    partition = two_class_partition([0, 1, 4, 5], [2, 3, 6, 7])
    np.testing.assert_array_equal(bias_coefficients(partition, 1.0).alpha_mc, np.zeros((2, 2)))


def test_bias_extreme_split_tends_to_global_share():
    partition = two_class_partition([0, 1, 2, 3], [4, 5, 6, 7])
    bias = bias_coefficients(partition, 1e-12)
    np.testing.assert_allclose(bias.alpha_mc, np.full((2, 2), 0.5), atol=1e-9)
    assert not bias_coefficients(partition, 1.0).is_zero()


def test_bias_per_class_concentration():
    partition = two_class_partition([0, 1, 4, 5], [2, 3, 6, 7])
    np.testing.assert_allclose(bias_coefficients(partition, [1.0, 0.0]).alpha_mc, [[0.0, 0.5], [0.0, 0.5]])


def test_bias_rejects_inconsistent_counts():
    partition = two_class_partition([0, 1, 4, 5], [2, 3, 6, 7])
    broken = partition.model_copy(update={"class_counts": [5, 3]})
    with pytest.raises(StructuralError):
        bias_coefficients(broken, 1.0)


def test_bias_csv_rows():
    rows = bias_coefficients(two_class_partition([0, 1, 2, 3], [4, 5, 6, 7]), 1.0).to_csv_rows()
    assert rows[0] == ["client", "class0", "class1"]
    assert rows[1] == [0, "-0.5", "0.5"]


def test_partition_json_round_trip(tmp_path, blobs):
    partition = dirichlet_partition(blobs, 4, 0.5, seed=2)
    path = tmp_path / "partition.json"
    partition.dump(path)
    assert Partition.from_json_dict(json.loads(path.read_text()), blobs) == partition


def test_partition_verify_detects_overlap(blobs):
    partition = dirichlet_partition(blobs, 3, 1.0, seed=0)
    data = partition.to_json_dict()
    data["clients"]["1"] = sorted(data["clients"]["1"] + data["clients"]["0"][:1])
    with pytest.raises(StructuralError):
        Partition.from_json_dict(data, blobs)


def test_local_split_is_deterministic_and_disjoint(blobs):
    partition = dirichlet_partition(blobs, 3, EXACT, seed=0)
    train, test = partition.local_split(1)
    assert partition.local_split(1) == (train, test)
    assert sorted(train + test) == partition.client_indices[1]
    assert len(train) == int(np.ceil(0.8 * len(partition.client_indices[1])))


def test_split_holdout(blobs):
    train, held = split_holdout(blobs, 0.25, seed=0)
    assert len(train) + len(held) == len(blobs)
    assert len(held) == 15
    with pytest.raises(ArgumentError):
        split_holdout(blobs, 1.0, seed=0)
