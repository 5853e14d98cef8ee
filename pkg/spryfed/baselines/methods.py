from typing import TYPE_CHECKING, Callable, Dict, Optional

from ..exceptions import ArgumentError
from ..fedcore.ClientExecutor import ClientExecutor
from ..fedcore.Federation import run_federation
from ..fedcore.GradientEstimator import (
    CosineSelectingEstimator,
    ForwardGradientEstimator,
    ReverseGradientEstimator,
    SeedTrickEstimator,
    ZeroOrderEstimator,
)
from ..fedcore.LocalOptimizer import LocalTrainConfig
from ..fedcore.MetricsTrace import MetricsTrace
from ..fedcore.RoundPlan import CommMode
from ..fedcore.ServerOptimizer import ServerOptimizerKind
from ..fedcore.TrainingProfile import TrainingProfile, spry_profile
from .MethodConfig import MethodConfig, MethodName
from .VarianceFilter import VarianceFilter

if TYPE_CHECKING:
    from ..ExperimentConfig import ExperimentConfig

PER_EPOCH_ONLY = [CommMode.PER_EPOCH]
MEZO_LOCAL_EPOCHS = 3


def _backprop(name: str, split: bool = False, server: ServerOptimizerKind = ServerOptimizerKind.FEDAVG_MEAN,
              **extra) -> TrainingProfile:
    return TrainingProfile(
        name=name,
        estimator=ReverseGradientEstimator(),
        split=split,
        server_optimizer=server,
        mode=CommMode.PER_EPOCH,
        supported_modes=PER_EPOCH_ONLY,
        **extra,
    )


def profile_for(method: MethodConfig, local: LocalTrainConfig) -> TrainingProfile:
    """Training profile of ``method``.

    Backprop methods train every group on every client (except FedAvgSplit), and
    FedSgd sends its weights after a single local step. Zero-order methods perturb
    only trainable weights.
    """
    name = method.method
    if name == MethodName.SPRY:
        return spry_profile(local.perturbations)
    if name == MethodName.FEDAVG:
        return _backprop(name.value)
    if name == MethodName.FEDYOGI:
        return _backprop(name.value, server=ServerOptimizerKind.FEDYOGI)
    if name == MethodName.FEDSGD:
        return _backprop(name.value, local_iterations=1)
    if name == MethodName.FEDAVG_SPLIT:
        return _backprop(name.value, split=True)
    if name == MethodName.FEDMEZO:
        return TrainingProfile(
            name=name.value, estimator=SeedTrickEstimator(sigma=method.mezo_sigma, perturbations=1),
            split=False, local_epochs=MEZO_LOCAL_EPOCHS,
        )
    if name == MethodName.BAFFLE_PLUS:
        return TrainingProfile(
            name=name.value, estimator=ZeroOrderEstimator(sigma=method.baffle_sigma, perturbations=method.baffle_k),
            split=False,
        )
    if name == MethodName.FWDLLM_PLUS:
        update_filter = None
        if method.fwdllm_var_threshold is not None:
            update_filter = VarianceFilter(threshold=method.fwdllm_var_threshold)
        return TrainingProfile(
            name=name.value,
            estimator=CosineSelectingEstimator(sigma=method.fwdllm_sigma, perturbations=method.fwdllm_k),
            split=False, supported_modes=PER_EPOCH_ONLY, update_filter=update_filter,
        )
    if name == MethodName.FEDFGD:
        return TrainingProfile(
            name=name.value, estimator=ForwardGradientEstimator(perturbations=method.fgd_k), split=False,
        )
    raise ArgumentError(f"Unknown method: {name}")


def run_method(config: "ExperimentConfig", executor: Optional[ClientExecutor] = None) -> MetricsTrace:
    """Run the method selected by ``config``."""
    return run_federation(config, profile_for(config.method, config.local), executor)


def _runner(name: MethodName) -> Callable[..., MetricsTrace]:
    def run(config: "ExperimentConfig", executor: Optional[ClientExecutor] = None) -> MetricsTrace:
        return run_method(config.with_method(name), executor)
    run.__name__ = f"run_{name.value}"
    run.__doc__ = f"Run ``config`` with method {name.value}, keeping its {name.value} keys if present."
    return run


run_spry = _runner(MethodName.SPRY)
run_fedavg = _runner(MethodName.FEDAVG)
run_fedyogi = _runner(MethodName.FEDYOGI)
run_fedsgd = _runner(MethodName.FEDSGD)
run_fedmezo = _runner(MethodName.FEDMEZO)
run_baffle_plus = _runner(MethodName.BAFFLE_PLUS)
run_fwdllm_plus = _runner(MethodName.FWDLLM_PLUS)
run_fedavg_split = _runner(MethodName.FEDAVG_SPLIT)
run_fedfgd = _runner(MethodName.FEDFGD)

RUNNERS: Dict[MethodName, Callable[..., MetricsTrace]] = {
    MethodName.SPRY: run_spry,
    MethodName.FEDAVG: run_fedavg,
    MethodName.FEDYOGI: run_fedyogi,
    MethodName.FEDSGD: run_fedsgd,
    MethodName.FEDMEZO: run_fedmezo,
    MethodName.BAFFLE_PLUS: run_baffle_plus,
    MethodName.FWDLLM_PLUS: run_fwdllm_plus,
    MethodName.FEDAVG_SPLIT: run_fedavg_split,
    MethodName.FEDFGD: run_fedfgd,
}
