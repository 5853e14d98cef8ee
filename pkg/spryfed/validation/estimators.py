"""Monte-Carlo checks of the forward-gradient estimator."""
from typing import Dict, List

import numpy as np

from ..autodiff.Batch import Batch
from ..autodiff.gradients import ModelFn, forward_gradient, jvp_batch, reverse_grad
from ..exceptions import ArgumentError
from ..model.ParamStore import ParamStore
from ..utils.logger import get_logger
from ..utils.seeding import derive_tagged
from .TheoryReport import TheoryReport
from .toys import QuadraticModel

logger = get_logger()

Z_TOLERANCE = 4.0
MIN_UNBIASEDNESS_SAMPLES = 10_000
MAX_SECOND_MOMENT_DIM = 100
CHUNK = 2_000


class RunningMoments:
    """Per-coordinate sum and sum of squares over sample rows."""

    def __init__(self, dim: int):
        self.count = 0
        self.total = np.zeros(dim)
        self.total_sq = np.zeros(dim)

    def add(self, rows: np.ndarray) -> None:
        self.count += rows.shape[0]
        self.total += rows.sum(axis=0)
        self.total_sq += (rows * rows).sum(axis=0)

    @property
    def mean(self) -> np.ndarray:
        return self.total / self.count

    @property
    def standard_error(self) -> np.ndarray:
        variance = (self.total_sq - self.count * self.mean ** 2) / (self.count - 1)
        return np.sqrt(np.maximum(variance, 0.0) / self.count)


def z_scores(mean: np.ndarray, target: np.ndarray, se: np.ndarray) -> np.ndarray:
    diff = mean - target
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff == 0, 0.0, np.inf))
    return z


def forward_gradient_samples(model_fn: ModelFn, params: ParamStore, batch: Batch, count: int,
                             rng: np.random.Generator) -> np.ndarray:
    """``count`` forward gradients ``jvp * v`` flattened in entry order, one per row."""
    names = params.trainable_names()
    tangents = {name: rng.standard_normal((count,) + params.get(name).shape) for name in names}
    _, jvps = jvp_batch(model_fn, params, tangents, batch)
    flat = np.concatenate([tangents[name].reshape(count, -1) for name in names], axis=1)
    return jvps[:, None] * flat


def check_unbiasedness(model_fn: ModelFn, params: ParamStore, batch: Batch, samples: int,
                       seed: int = 0) -> TheoryReport:
    """Mean of ``samples`` forward gradients against the reverse-mode gradient.

    Args:
        model_fn: model function
        params: evaluation point
        batch: data batch
        samples: number of Gaussian perturbations, at least 10**4
        seed: perturbation seed

    Returns:
        TheoryReport: per-coordinate z-scores; passes when every ``|z| <= 4``
    """
    if samples < MIN_UNBIASEDNESS_SAMPLES:
        raise ArgumentError(f"Need at least {MIN_UNBIASEDNESS_SAMPLES} samples, got {samples}")
    true = reverse_grad(model_fn, params, batch).flat()
    moments = RunningMoments(true.size)
    rng = derive_tagged(seed, "unbiasedness")
    remaining = samples
    while remaining:
        count = min(CHUNK, remaining)
        moments.add(forward_gradient_samples(model_fn, params, batch, count, rng))
        remaining -= count
    z = z_scores(moments.mean, true, moments.standard_error)
    max_z = float(np.max(np.abs(z)))

    report = TheoryReport(experiment="unbiasedness", seed=seed)
    report.statistics = {
        "dim": int(true.size),
        "mean_estimate": moments.mean.tolist(),
        "standard_error": moments.standard_error.tolist(),
        "z_scores": z.tolist(),
        "max_abs_z": max_z,
    }
    report.predictions = {"true_gradient": true.tolist()}
    report.check("max_abs_z", max_z <= Z_TOLERANCE, Z_TOLERANCE, samples, measured=max_z, expected=0.0)
    logger.info("Unbiasedness: d=%d N=%d max|z|=%.3f", true.size, samples, max_z)
    return report


def _second_moment_samples(model: QuadraticModel, params: ParamStore, perturbations: int, count: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Squared norms of ``count`` K-averaged forward gradients of ``model`` at ``params``."""
    v = rng.standard_normal((count * perturbations, model.dim))
    _, directional = jvp_batch(model, params, {"w": v}, model.batch())
    grads = forward_gradient(directional[:, None], {"w": v}).grads["w"]
    estimate = grads.reshape(count, perturbations, model.dim).mean(axis=1)
    return np.sum(estimate * estimate, axis=1)


def _oracle_samples(dim: int, perturbations: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Same ratio built from scalars, with the gradient rotated onto the first axis.

    The first coordinate of the averaged estimate is ``mean_k z_k**2``; the remaining
    ``dim - 1`` coordinates are jointly ``N(0, sum_k z_k**2 / K**2)``.
    """
    z = rng.standard_normal((count, perturbations))
    squares = np.sum(z * z, axis=1)
    first = squares / perturbations
    rest = squares / perturbations ** 2 * rng.chisquare(dim - 1, size=count) if dim > 1 else 0.0
    return first * first + rest


def check_second_moment(dim: int, perturbations: int, samples: int, seed: int = 0) -> TheoryReport:
    """``E||g_hat||^2 / ||grad f||^2`` of the K-averaged forward gradient on a linear loss.

    The estimate is compared against an independent Monte-Carlo oracle (the only
    assertion). The looser bound ``(3d+K-1)/K``, the classical ``d+2`` (K=1)
    and the exact value ``(d+1+K)/K`` are reported together with which of them the
    measurement is consistent with.
    """
    if not 1 <= dim <= MAX_SECOND_MOMENT_DIM:
        raise ArgumentError(f"dim must be in [1, {MAX_SECOND_MOMENT_DIM}], got {dim}")
    if perturbations < 1 or samples < 2:
        raise ArgumentError("Need K >= 1 and at least 2 samples")
    rng = derive_tagged(seed, "second-moment", (dim, perturbations))
    direction = rng.standard_normal(dim)
    model = QuadraticModel.linear_only(direction / np.linalg.norm(direction))
    params = model.store(np.zeros(dim))

    measured, oracle = RunningMoments(1), RunningMoments(1)
    oracle_rng = derive_tagged(seed, "second-moment-oracle", (dim, perturbations))
    remaining = samples
    while remaining:
        count = min(CHUNK, remaining)
        measured.add(_second_moment_samples(model, params, perturbations, count, rng)[:, None])
        oracle.add(_oracle_samples(dim, perturbations, count, oracle_rng)[:, None])
        remaining -= count

    value, se = float(measured.mean[0]), float(measured.standard_error[0])
    oracle_value, oracle_se = float(oracle.mean[0]), float(oracle.standard_error[0])
    combined_se = float(np.hypot(se, oracle_se))
    candidates: Dict[str, float] = {
        "loose_bound": (3 * dim + perturbations - 1) / perturbations,
        "exact": (dim + 1 + perturbations) / perturbations,
    }
    if perturbations == 1:
        candidates["classical"] = float(dim + 2)
    matches: List[str] = [name for name, target in candidates.items() if abs(value - target) <= Z_TOLERANCE * se]

    report = TheoryReport(experiment="second_moment", seed=seed)
    report.statistics = {
        "dim": dim, "perturbations": perturbations, "ratio": value, "standard_error": se,
        "oracle_ratio": oracle_value, "oracle_standard_error": oracle_se,
        "confidence_interval": [value - Z_TOLERANCE * se, value + Z_TOLERANCE * se],
        "matches": matches,
    }
    report.predictions = candidates
    report.check("oracle_agreement", abs(value - oracle_value) <= Z_TOLERANCE * combined_se, Z_TOLERANCE,
                 samples, measured=value, expected=oracle_value, standard_error=combined_se)
    logger.info("Second moment: d=%d K=%d ratio=%.4f oracle=%.4f matches=%s",
                dim, perturbations, value, oracle_value, matches)
    return report
