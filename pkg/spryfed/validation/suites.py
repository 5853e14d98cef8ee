"""Named validation suites run by ``spryfed validate``."""
import math
from typing import Callable, Dict, List

from pydantic import BaseModel

from ..ExperimentConfig import ExperimentConfig
from ..data.Partition import EXACT
from ..data.synthetic import synth_classification
from ..exceptions import ArgumentError
from ..fedcore.Federation import run_federation
from ..model.ModelSpec import Architecture, ModelSpec
from ..model.builder import build_model
from ..utils.logger import get_logger
from ..utils.seeding import derive_tagged
from .TheoryReport import TheoryReport
from .estimators import check_second_moment, check_unbiasedness
from .heterogeneity import bias_sweep, check_homogeneous_estimate
from .theory import learning_rate_terms
from .toys import QuadraticModel
from .trend import compare_floors, convergence_trend

logger = get_logger()

UNBIASEDNESS_DIM = 10
UNBIASEDNESS_SAMPLES = 100_000
SECOND_MOMENT_SAMPLES = 200_000
HOMOGENEOUS_SAMPLES = 10_000
SWEEP_ALPHAS = [EXACT, 1.0, 0.5, 0.1]
SWEEP_SEEDS = 50
SWEEP_SAMPLES = 200
DESK_CLIENTS = 4
CONVERGENCE_ROUNDS = 300


class SuiteResult(BaseModel):
    suite: str
    seed: int
    reports: List[TheoryReport]

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    def to_json_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "reports": [report.to_json_dict() for report in self.reports],
        }


def _desk_classifier(seed: int):
    """Small tanh MLP on 3 balanced Gaussian classes (40 samples each)."""
    dataset = synth_classification(n=120, d=4, num_classes=3, margin=2.0, seed=seed)
    network, store = build_model(ModelSpec(architecture=Architecture.MLP, widths=[4, 4], num_classes=3,
                                           init_seed=seed))
    return network, store, dataset


def unbiasedness_suite(seed: int) -> List[TheoryReport]:
    rng = derive_tagged(seed, "suite-quadratic")
    model = QuadraticModel(curvature=rng.uniform(0.5, 2.0, UNBIASEDNESS_DIM),
                           linear=rng.standard_normal(UNBIASEDNESS_DIM))
    w = rng.standard_normal(UNBIASEDNESS_DIM)
    return [check_unbiasedness(model, model.store(w), model.batch(), UNBIASEDNESS_SAMPLES, seed)]


def second_moment_suite(seed: int) -> List[TheoryReport]:
    reports = [check_second_moment(1, 1, SECOND_MOMENT_SAMPLES, seed)]
    for dim in (5, 20):
        for perturbations in (1, 10):
            reports.append(check_second_moment(dim, perturbations, SECOND_MOMENT_SAMPLES, seed))
    return reports


def homogeneous_suite(seed: int) -> List[TheoryReport]:
    network, store, dataset = _desk_classifier(seed)
    return [check_homogeneous_estimate(network, store, dataset, DESK_CLIENTS, HOMOGENEOUS_SAMPLES, seed)]


def bias_sweep_suite(seed: int) -> List[TheoryReport]:
    network, store, dataset = _desk_classifier(seed)
    seeds = [seed + i for i in range(SWEEP_SEEDS)]
    report = bias_sweep(network, store, dataset, SWEEP_ALPHAS, DESK_CLIENTS, seeds, SWEEP_SAMPLES)
    used = len(set(report.statistics["seeds"]))
    report.check("seed_count", used >= SWEEP_SEEDS, 0.0, used, measured=used, expected=SWEEP_SEEDS)
    return [report]


def learning_rate_suite(seed: int) -> List[TheoryReport]:
    """Proportionalities of the local learning-rate conditions at a reference point."""
    base = dict(G=1.0, L_smooth=1.0, tau=1e-3, beta2=0.99, eta=1e-2, d=1000, K=1, M_bar=10.0, sum_alpha_sq=0.5)
    terms = learning_rate_terms(**base)
    double_d = learning_rate_terms(**{**base, "d": 2 * base["d"]})["heterogeneity"]
    double_m = learning_rate_terms(**{**base, "M_bar": 2 * base["M_bar"]})["heterogeneity"]
    homogeneous = learning_rate_terms(**{**base, "sum_alpha_sq": 0.0})

    report = TheoryReport(experiment="learning_rate", seed=seed)
    report.statistics = {"reference": base, "terms": terms, "bound": min(terms.values())}
    ratio_d = double_d / terms["heterogeneity"]
    ratio_m = double_m / terms["heterogeneity"]
    report.check("doubling_d_halves_heterogeneity_term", math.isclose(ratio_d, 0.5, rel_tol=1e-3), 1e-3, 1,
                 measured=ratio_d, expected=0.5)
    report.check("doubling_clients_doubles_heterogeneity_term", math.isclose(ratio_m, 2.0, rel_tol=1e-12), 1e-12, 1,
                 measured=ratio_m, expected=2.0)
    report.check("homogeneous_term_infinite", math.isinf(homogeneous["heterogeneity"]), 0.0, 1)
    return [report]


def convergence_suite(seed: int) -> List[TheoryReport]:
    base = {
        "seed": seed,
        "method": "spry",
        "dataset": {"n": 600, "d": 10, "num_classes": 4, "seed": seed},
        "partition": {"num_clients": 10, "alpha": EXACT, "seed": seed},
        "federation": {"rounds": CONVERGENCE_ROUNDS, "sampling_rate": 0.5, "personalize": False},
        "local": {"lr": 0.05, "batch_size": 16},
    }
    homogeneous = run_federation(ExperimentConfig.from_json_dict(base))
    skewed = {**base, "partition": {**base["partition"], "alpha": 0.1}}
    heterogeneous = run_federation(ExperimentConfig.from_json_dict(skewed))
    return [
        convergence_trend(homogeneous, seed),
        compare_floors(heterogeneous, homogeneous, seed),
    ]


SUITES: Dict[str, Callable[[int], List[TheoryReport]]] = {
    "unbiasedness": unbiasedness_suite,
    "second_moment": second_moment_suite,
    "homogeneous": homogeneous_suite,
    "bias_sweep": bias_sweep_suite,
    "learning_rate": learning_rate_suite,
    "convergence": convergence_suite,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    """Run one named suite, or every suite in order for ``"all"``."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ArgumentError(f"Unknown suite '{name}'; choose from {sorted(SUITES) + ['all']}")
    reports: List[TheoryReport] = []
    for suite in names:
        logger.info("Running validation suite %s (seed %d)", suite, seed)
        reports.extend(SUITES[suite](seed))
    return SuiteResult(suite=name, seed=seed, reports=reports)
