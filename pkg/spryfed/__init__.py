"""
SpryFed - federated finetuning with forward-mode gradients and layer splitting
"""

from spryfed.exceptions import *
from spryfed.ExperimentConfig import (
    DatasetSpec,
    ExperimentConfig,
    FederationSpec,
    OutputSpec,
    PartitionSpec,
    ServerSpec,
)
from spryfed.autodiff import Batch, GradEstimate
from spryfed.autodiff.gradients import forward_gradient, forward_loss, jvp, jvp_batch, reverse_grad, zero_order_grad
from spryfed.model import ModelSpec, ParamStore, build_model, freeze_except, list_trainable_layers
from spryfed.data import Dataset, Partition, bias_coefficients, dirichlet_partition
from spryfed.fedcore import (
    AsyncClientExecutor,
    Federation,
    MetricsTrace,
    RateLimitingAsyncExecutor,
    RoundPlan,
    aggregate,
    client_train,
    map_layers_to_clients,
    run_federation,
    server_reconstruct,
    server_step,
)
from spryfed.baselines import MethodConfig, MethodName, run_method
from spryfed.accounting import CostReport, comm_cost, comp_cost, memory_model
from spryfed.validation import TheoryReport, run_suite

__version__ = "0.1.0"
