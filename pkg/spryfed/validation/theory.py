"""Order-of-magnitude conditions on the local learning rate for the forward-gradient method."""
import math
from typing import Dict

from ..exceptions import ArgumentError


def learning_rate_terms(G: float, L_smooth: float, tau: float, beta2: float, eta: float, d: int, K: int,
                        M_bar: float, sum_alpha_sq: float) -> Dict[str, float]:
    """The four upper limits on the local learning rate, with unit constants.

    Args:
        G: bound on the gradient norm
        L_smooth: smoothness constant of the loss
        tau: server adaptability constant
        beta2: server second-moment decay, in (0, 1)
        eta: server learning rate
        d: trainable parameter count of a client
        K: perturbations per batch
        M_bar: participating clients per round
        sum_alpha_sq: heterogeneity penalty; 0 makes the last term infinite

    Returns:
        Mapping of term name to value.
    """
    positives = {"G": G, "L_smooth": L_smooth, "tau": tau, "beta2": beta2, "eta": eta, "d": d, "K": K,
                 "M_bar": M_bar}
    for name, value in positives.items():
        if not value > 0:
            raise ArgumentError(f"{name} must be positive, got {value}")
    if not beta2 < 1:
        raise ArgumentError(f"beta2 must be below 1, got {beta2}")
    if sum_alpha_sq < 0:
        raise ArgumentError(f"sum_alpha_sq must be nonnegative, got {sum_alpha_sq}")

    root_beta2 = math.sqrt(beta2)
    heterogeneity = math.inf if sum_alpha_sq == 0 else M_bar * K / (beta2 * G * (3 * d + K - 1) * sum_alpha_sq)
    return {
        "smoothness": math.sqrt(tau ** 2 / (root_beta2 * eta * G * L_smooth)),
        "gradient": 1.0 / (root_beta2 * G),
        "adaptivity": math.sqrt(tau ** 3 / (math.sqrt(beta2 * (1 - beta2)) * G ** 2)),
        "heterogeneity": heterogeneity,
    }


def learning_rate_bound(G: float, L_smooth: float, tau: float, beta2: float, eta: float, d: int, K: int,
                        M_bar: float, sum_alpha_sq: float) -> float:
    return min(learning_rate_terms(G, L_smooth, tau, beta2, eta, d, K, M_bar, sum_alpha_sq).values())
