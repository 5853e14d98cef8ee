from .MethodConfig import METHOD_PARAMS, MethodConfig, MethodName
from .VarianceFilter import VarianceFilter
from .methods import (
    RUNNERS,
    profile_for,
    run_baffle_plus,
    run_fedavg,
    run_fedavg_split,
    run_fedfgd,
    run_fedmezo,
    run_fedsgd,
    run_fedyogi,
    run_fwdllm_plus,
    run_method,
    run_spry,
)

__all__ = [
    'METHOD_PARAMS', 'MethodConfig', 'MethodName', 'VarianceFilter', 'RUNNERS', 'profile_for',
    'run_baffle_plus', 'run_fedavg', 'run_fedavg_split', 'run_fedfgd', 'run_fedmezo', 'run_fedsgd',
    'run_fedyogi', 'run_fwdllm_plus', 'run_method', 'run_spry',
]
