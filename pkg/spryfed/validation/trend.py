"""Qualitative convergence checks on a recorded metrics trace."""
import numpy as np

from ..exceptions import InsufficientDataError
from ..fedcore.MetricsTrace import MetricsTrace
from ..utils.logger import get_logger
from .TheoryReport import TheoryReport

logger = get_logger()

MIN_TREND_ROUNDS = 50
EARLY_ROUND = 50


def _proxy_floor(trace: MetricsTrace) -> np.ndarray:
    proxy = np.asarray(trace.column("grad_norm_proxy"), dtype=np.float64)
    if proxy.size < MIN_TREND_ROUNDS:
        raise InsufficientDataError(
            f"Trace has {proxy.size} rounds, need at least {MIN_TREND_ROUNDS} for a trend fit")
    return np.asarray(trace.min_so_far("grad_norm_proxy"), dtype=np.float64)


def convergence_trend(trace: MetricsTrace, seed: int = 0) -> TheoryReport:
    """Fit the min-so-far gradient-norm proxy against ``a + b / R``.

    A trace whose floor never moves is reported as ``no-dynamics`` with a failing
    assertion instead of a fit.
    """
    floor = _proxy_floor(trace)
    report = TheoryReport(experiment="convergence_trend", seed=seed)
    rounds = floor.size
    finite = bool(np.all(np.isfinite(floor)))

    if finite and np.all(floor == floor[0]):
        report.statistics = {"status": "no-dynamics", "rounds": rounds, "floor": float(floor[0])}
        report.check("dynamics", False, 0.0, rounds, detail="no-dynamics: proxy floor is constant")
        logger.warning("Convergence trend: flat trace over %d rounds", rounds)
        return report

    R = np.arange(1, rounds + 1, dtype=np.float64)
    design = np.column_stack([np.ones(rounds), 1.0 / R])
    mask = np.isfinite(floor)
    (a, b), *_ = np.linalg.lstsq(design[mask], floor[mask], rcond=None)
    early = float(floor[EARLY_ROUND - 1])
    final = float(floor[-1])

    report.statistics = {"status": "fit", "rounds": rounds, "a": float(a), "b": float(b),
                         "floor_at_50": early, "final_floor": final}
    report.predictions = {"b_sign": 1.0}
    report.check("b_positive", b > 0, 0.0, rounds, measured=float(b))
    report.check("floor_nonincreasing", finite and bool(np.all(np.diff(floor) <= 0)), 0.0, rounds)
    report.check("final_below_round_50", final < early, 0.0, rounds, measured=final, expected=early)
    logger.info("Convergence trend: a=%.4g b=%.4g floor@50=%.4g final=%.4g", a, b, early, final)
    return report


def compare_floors(heterogeneous: MetricsTrace, homogeneous: MetricsTrace, seed: int = 0) -> TheoryReport:
    """The heterogeneous run must plateau at a strictly higher proxy floor."""
    hetero = float(_proxy_floor(heterogeneous)[-1])
    homo = float(_proxy_floor(homogeneous)[-1])
    report = TheoryReport(experiment="compare_floors", seed=seed)
    report.statistics = {"heterogeneous_floor": hetero, "homogeneous_floor": homo}
    report.check("heterogeneous_floor_higher", hetero > homo, 0.0,
                 min(len(heterogeneous.rows), len(homogeneous.rows)), measured=hetero, expected=homo)
    return report
