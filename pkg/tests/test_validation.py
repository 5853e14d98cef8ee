import math

import numpy as np
import pytest

from spryfed.data import EXACT, bias_coefficients, dirichlet_partition
from spryfed.exceptions import ArgumentError, InsufficientDataError
from spryfed.fedcore import MetricsTrace, RoundMetrics
from spryfed.model import Architecture, ModelSpec, build_model
from spryfed.validation import (
    QuadraticModel,
    aggregate_forward_estimate,
    bias_sweep,
    check_homogeneous_estimate,
    check_second_moment,
    check_unbiasedness,
    compare_floors,
    convergence_trend,
    learning_rate_bound,
    learning_rate_terms,
    run_suite,
)

REFERENCE = dict(G=1.0, L_smooth=2.0, tau=1e-3, beta2=0.99, eta=1e-2, d=1000, K=1, M_bar=10.0, sum_alpha_sq=0.5)


def trace_from(proxy):
    trace = MetricsTrace(method="spry")
    for r, value in enumerate(proxy):
        trace.append(RoundMetrics(round=r, method="spry", acc_gen=0.5, acc_pers=0.5, loss=1.0,
                                  grad_norm_proxy=float(value)))
    return trace


@pytest.fixture
def tiny_classifier():
    from spryfed.data import synth_classification

    dataset = synth_classification(n=48, d=3, num_classes=3, margin=2.0, seed=2)
    network, store = build_model(ModelSpec(architecture=Architecture.MLP, widths=[3, 3], num_classes=3, init_seed=2))
    return network, store, dataset


def test_learning_rate_terms_scale_with_dimension_and_clients():
    base = learning_rate_terms(**REFERENCE)["heterogeneity"]
    assert learning_rate_terms(**{**REFERENCE, "d": 2000})["heterogeneity"] / base == pytest.approx(0.5, rel=1e-3)
    assert learning_rate_terms(**{**REFERENCE, "M_bar": 20.0})["heterogeneity"] / base == pytest.approx(2.0)


def test_homogeneous_learning_rate_bound_ignores_heterogeneity():
    terms = learning_rate_terms(**{**REFERENCE, "sum_alpha_sq": 0.0})
    assert math.isinf(terms["heterogeneity"])
    bound = learning_rate_bound(**{**REFERENCE, "sum_alpha_sq": 0.0})
    assert bound == min(terms["smoothness"], terms["gradient"], terms["adaptivity"])


@pytest.mark.parametrize("override", [{"d": 0}, {"G": -1.0}, {"beta2": 1.0}, {"sum_alpha_sq": -0.1}, {"tau": 0.0}])
def test_learning_rate_terms_reject_invalid_inputs(override):
    with pytest.raises(ArgumentError):
        learning_rate_terms(**{**REFERENCE, **override})


def test_forward_gradient_is_unbiased_on_quadratic():
    rng = np.random.default_rng(0)
    model = QuadraticModel(curvature=rng.uniform(0.5, 2.0, 10), linear=rng.standard_normal(10))
    report = check_unbiasedness(model, model.store(rng.standard_normal(10)), model.batch(), 100_000, seed=1)
    assert report.passed
    assert report.statistics["max_abs_z"] <= 4.0


def test_estimate_at_minimum_is_zero():
    model = QuadraticModel(curvature=[1.0, 1.0], linear=[-2.0, 4.0])
    report = check_unbiasedness(model, model.store(np.array([1.0, -2.0])), model.batch(), 10_000)
    assert report.passed
    assert np.allclose(report.predictions["true_gradient"], 0.0)


def test_standard_error_shrinks_with_samples(poly):
    model, store, batch = poly
    small = check_unbiasedness(model, store, batch, 10_000, seed=3).statistics["standard_error"]
    large = check_unbiasedness(model, store, batch, 20_000, seed=3).statistics["standard_error"]
    ratio = np.mean(np.asarray(large) / np.asarray(small))
    assert 0.8 / math.sqrt(2) <= ratio <= 1.2 / math.sqrt(2)


def test_unbiasedness_needs_enough_samples(poly):
    model, store, batch = poly
    with pytest.raises(ArgumentError):
        check_unbiasedness(model, store, batch, 100)


def test_second_moment_one_dimension():
    report = check_second_moment(1, 1, 200_000, seed=0)
    assert report.statistics["ratio"] == pytest.approx(3.0, abs=0.1)
    assert report.passed
    assert report.predictions["loose_bound"] == report.predictions["exact"] == 3.0


def test_second_moment_flags_matching_prediction():
    report = check_second_moment(5, 1, 200_000, seed=0)
    assert report.passed
    assert report.statistics["ratio"] == pytest.approx(7.0, abs=0.5)
    assert "loose_bound" not in report.statistics["matches"]
    assert report.predictions == {"loose_bound": 15.0, "exact": 7.0, "classical": 7.0}


def test_more_perturbations_lower_the_second_moment():
    single = check_second_moment(5, 1, 20_000, seed=1).statistics["ratio"]
    averaged = check_second_moment(5, 10, 20_000, seed=1).statistics["ratio"]
    assert averaged < single


def test_second_moment_measures_the_forward_estimator(monkeypatch):
    from spryfed.validation import estimators

    exact_jvp_batch = estimators.jvp_batch

    def doubled(*args, **kwargs):
        loss, directional = exact_jvp_batch(*args, **kwargs)
        return loss, 2.0 * directional

    monkeypatch.setattr(estimators, "jvp_batch", doubled)
    report = check_second_moment(1, 1, 20_000, seed=0)
    assert report.statistics["ratio"] == pytest.approx(12.0, abs=1.5)
    assert report.statistics["oracle_ratio"] == pytest.approx(3.0, abs=0.3)
    assert not report.passed


def test_second_moment_argument_errors():
    with pytest.raises(ArgumentError):
        check_second_moment(0, 1, 100)
    with pytest.raises(ArgumentError):
        check_second_moment(3, 0, 100)


def test_homogeneous_estimate_is_unbiased(tiny_classifier):
    network, store, dataset = tiny_classifier
    report = check_homogeneous_estimate(network, store, dataset, num_clients=3, samples=4_000, seed=0)
    assert report.statistics["bias_penalty"] == 0.0
    assert report.passed


def test_single_client_has_no_expected_bias(tiny_classifier):
    network, store, dataset = tiny_classifier
    partition = dirichlet_partition(dataset, 1, 0.1, seed=0)
    estimate = aggregate_forward_estimate(network, store, dataset, partition, samples=10, seed=0)
    assert estimate.expected_bias < 1e-10
    assert estimate.mean.shape == estimate.true_gradient.shape


def test_bias_sweep_report_layout(tiny_classifier):
    network, store, dataset = tiny_classifier
    report = bias_sweep(network, store, dataset, [EXACT, 0.1], num_clients=3, seeds=[0, 1], samples=20)
    assert [a.name for a in report.assertions] == ["spearman", "penalty_nonincreasing_in_alpha"]
    assert len(report.statistics["rows"]) == 4
    exact = report.statistics["per_alpha"][0]
    assert exact["alpha"] == EXACT and exact["mean_penalty"] == 0.0
    with pytest.raises(ArgumentError):
        bias_sweep(network, store, dataset, [], num_clients=3, seeds=[0])


def test_bias_sweep_penalty_concentration(tiny_classifier):
    network, store, dataset = tiny_classifier
    fixed = bias_sweep(network, store, dataset, [EXACT, 0.5], num_clients=3, seeds=[0], samples=10)
    own = bias_sweep(network, store, dataset, [EXACT, 0.5], num_clients=3, seeds=[0], samples=10,
                     concentration=None)
    assert fixed.statistics["concentration"] == 1.0
    assert own.statistics["concentration"] is None
    skewed = dirichlet_partition(dataset, 3, 0.5, 0)
    assert fixed.statistics["rows"][1]["penalty"] == bias_coefficients(skewed, 1.0).penalty()
    for mine, theirs in zip(fixed.statistics["rows"], own.statistics["rows"]):
        assert theirs["penalty"] == theirs["partition_alpha_penalty"] == mine["partition_alpha_penalty"]


@pytest.mark.slow
def test_bias_sweep_suite_over_fifty_seeds():
    result = run_suite("bias_sweep", seed=0)
    report = result.reports[0]
    assert len(report.statistics["seeds"]) == 50
    assert report.assertion("seed_count").passed
    assert report.assertion("spearman").measured >= 0.8
    penalties = [p["mean_penalty"] for p in report.statistics["per_alpha"]]
    assert [p["alpha"] for p in report.statistics["per_alpha"]] == [EXACT, 1.0, 0.5, 0.1]
    assert penalties == sorted(penalties)
    assert result.passed


def test_flat_trace_reports_no_dynamics():
    report = convergence_trend(trace_from([0.7] * 60))
    assert report.statistics["status"] == "no-dynamics"
    assert not report.passed


def test_short_trace_is_insufficient():
    with pytest.raises(InsufficientDataError):
        convergence_trend(trace_from([1.0] * 10))


def test_decaying_trace_fits_positive_slope():
    proxy = [1.0 + 5.0 / r for r in range(1, 121)]
    report = convergence_trend(trace_from(proxy), seed=4)
    assert report.passed
    assert report.statistics["b"] == pytest.approx(5.0, rel=1e-6)
    assert report.statistics["a"] == pytest.approx(1.0, rel=1e-6)


def test_compare_floors():
    high = trace_from([2.0 + 1.0 / r for r in range(1, 61)])
    low = trace_from([1.0 + 1.0 / r for r in range(1, 61)])
    assert compare_floors(high, low).passed
    assert not compare_floors(low, high).passed


def test_learning_rate_suite_passes():
    result = run_suite("learning_rate", seed=5)
    assert result.passed
    data = result.to_json_dict()
    assert data["seed"] == 5 and data["suite"] == "learning_rate"
    assert data["reports"][0]["passed"]


def test_unknown_suite():
    with pytest.raises(ArgumentError):
        run_suite("everything")


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["unbiasedness", "second_moment", "homogeneous"])
def test_estimator_suites_pass(suite):
    assert run_suite(suite, seed=0).passed
