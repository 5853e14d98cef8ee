from .RoundPlan import CommMode, RoundPlan, build_round_plan, map_all_layers, map_layers_to_clients
from .PerturbationStream import PerturbationStream, ZeroPerturbationStream
from .ClientUpdate import ClientUpdate, JvpRecord, UpdatedLayers
from .LocalOptimizer import LocalOptimizer, LocalOptimizerKind, LocalTrainConfig
from .GradientEstimator import (
    CosineSelectingEstimator,
    Estimate,
    ForwardGradientEstimator,
    GradientEstimator,
    ReverseGradientEstimator,
    SeedTrickEstimator,
    ZeroOrderEstimator,
    select_by_cosine,
)
from .client import IterationClient, IterationResult, client_iteration, client_train
from .server import aggregate, round_delta, server_reconstruct
from .ServerOptimizer import ServerOptimizerKind, ServerOptState, server_step
from .ClientExecutor import ClientExecutor, ClientTask
from .AsyncClientExecutor import AsyncClientExecutor
from .RateLimitingAsyncExecutor import RateLimitingAsyncExecutor
from .MetricsTrace import METRICS_COLUMNS, MetricsTrace, RoundMetrics
from .TrainingProfile import TrainingProfile, UpdateFilter, spry_profile
from .Federation import Federation, run_federation

__all__ = [
    'CommMode', 'RoundPlan', 'build_round_plan', 'map_all_layers', 'map_layers_to_clients',
    'PerturbationStream', 'ZeroPerturbationStream', 'ClientUpdate', 'JvpRecord', 'UpdatedLayers',
    'LocalOptimizer', 'LocalOptimizerKind', 'LocalTrainConfig',
    'CosineSelectingEstimator', 'Estimate', 'ForwardGradientEstimator', 'GradientEstimator',
    'ReverseGradientEstimator', 'SeedTrickEstimator', 'ZeroOrderEstimator', 'select_by_cosine',
    'IterationClient', 'IterationResult', 'client_iteration', 'client_train',
    'aggregate', 'round_delta', 'server_reconstruct', 'ServerOptimizerKind', 'ServerOptState', 'server_step',
    'ClientExecutor', 'ClientTask', 'AsyncClientExecutor', 'RateLimitingAsyncExecutor',
    'METRICS_COLUMNS', 'MetricsTrace', 'RoundMetrics', 'TrainingProfile', 'UpdateFilter', 'spry_profile',
    'Federation', 'run_federation',
]
