"""Closed-form cost models.

The closed-form communication and computation tables assume ``L % M == 0``. Here
``L/M`` and ``M/L`` are generalized to ``max(ceil(L/M), 1)`` and
``max(ceil(M/L), 1)``; on divisible pairs the results equal the table formulas.
"""
import csv
import io
from typing import Iterable, List, Optional, Union

from pydantic import BaseModel, Field

from ..baselines.MethodConfig import MethodName
from ..exceptions import ArgumentError
from ..fedcore.RoundPlan import CommMode
from .CostInputs import CostInputs, MemoryInputs, MethodKind
from .CostReport import COST_COLUMNS, CommCost, CompCost, CostReport, MemoryBreakdown

BACKPROP = {MethodName.FEDAVG, MethodName.FEDSGD, MethodName.FEDYOGI}
ZERO_ORDER = {MethodName.FEDMEZO, MethodName.BAFFLE_PLUS, MethodName.FWDLLM_PLUS}
SPLIT = {MethodName.SPRY, MethodName.FEDAVG_SPLIT}


def _ceil_ratio(a: int, b: int) -> int:
    return max(-(-a // b), 1)


def _method(method: Union[MethodName, str]) -> MethodName:
    try:
        return MethodName(method)
    except ValueError:
        raise ArgumentError(f"Unknown method: {method}")


def comm_cost(method: Union[MethodName, str], mode: Optional[CommMode], inputs: CostInputs) -> CommCost:
    """Scalars sent by each client to the server and by the server to all clients, per round."""
    method = _method(method)
    mode = mode or inputs.mode
    M, L, w = inputs.clients, inputs.layers, inputs.layer_params
    w_g = inputs.total_params
    if method in SPLIT:
        down = w * max(L, M)
        if method == MethodName.SPRY and mode == CommMode.PER_ITERATION:
            return CommCost(client_to_server=1, server_to_clients=down + M)
        return CommCost(client_to_server=w * _ceil_ratio(L, M), server_to_clients=down)
    if method in BACKPROP or mode == CommMode.PER_EPOCH:
        return CommCost(client_to_server=w_g, server_to_clients=w_g * M)
    return CommCost(client_to_server=1, server_to_clients=(w_g + 1) * M)


def comp_cost(method: Union[MethodName, str], inputs: CostInputs) -> CompCost:
    """Client cost per local iteration and server cost per round.

    Layer-split server costs sum over the client subsets sharing a layer set:
    ``min(M, L)`` subsets of size ``max(M/L, 1)``. The spry client cost does not
    depend on K; the FedFgd ablation row pays ``2K(c+v)`` on every layer.
    """
    method = _method(method)
    M, L, w = inputs.clients, inputs.layers, inputs.layer_params
    c, v, K = inputs.matmul_cost, inputs.jvp_overhead, inputs.perturbations
    per_iteration = inputs.mode == CommMode.PER_ITERATION
    aggregate_all = (M - 1) * w * L
    layers_per_client = _ceil_ratio(L, M)
    subsets, subset_size = min(M, L), _ceil_ratio(M, L)

    if method in BACKPROP:
        return CompCost(client_per_iteration=3 * L * c, server_per_round=aggregate_all)
    if method == MethodName.FEDAVG_SPLIT:
        return CompCost(
            client_per_iteration=3 * layers_per_client * c,
            server_per_round=subsets * (subset_size - 1) * w * layers_per_client,
        )
    zero_order_server = 2 * M * w * L if per_iteration else aggregate_all
    if method == MethodName.FEDMEZO:
        return CompCost(client_per_iteration=L * (2 * c + 3 * w), server_per_round=zero_order_server)
    if method in (MethodName.BAFFLE_PLUS, MethodName.FWDLLM_PLUS):
        return CompCost(client_per_iteration=K * L * (2 * c + w), server_per_round=zero_order_server)
    if method == MethodName.FEDFGD:
        return CompCost(client_per_iteration=2 * K * L * (c + v) + w * L, server_per_round=zero_order_server)
    # spry
    if per_iteration:
        server = subsets * 2 * subset_size * w * layers_per_client
    else:
        server = subsets * (subset_size - 1) * w * layers_per_client
    return CompCost(client_per_iteration=2 * layers_per_client * (c + v) + w * L, server_per_round=server)


def memory_model(kind: Union[MethodKind, str], inputs: MemoryInputs) -> MemoryBreakdown:
    """Peak scalar count: parameters, gradients plus optimizer state, and live activations.

    Backprop keeps every layer's activations, zero-order only the widest layer's, and
    forward-mode AD the widest layer's primal and tangent side by side.
    """
    kind = MethodKind(kind)
    inputs.check()
    B = inputs.batch_size
    if kind == MethodKind.BACKPROP:
        activations = B * sum(inputs.activations)
    elif kind == MethodKind.ZERO_ORDER:
        activations = B * max(inputs.activations)
    else:
        activations = 2 * B * max(inputs.activations)
    params = float(inputs.total_params)
    grads_opt = inputs.trainable_params * (1.0 + inputs.optimizer_multiplier)
    return MemoryBreakdown(params=params, grads_opt=grads_opt, activations=float(activations),
                           peak=params + grads_opt + activations)


class CostSweep(BaseModel):
    """Grid of (M, L, w_l, K) points evaluated by the ``cost`` command."""
    clients: List[int] = [1, 2, 4, 8, 16, 32]
    layers: List[int] = [1, 2, 4, 8, 16, 32]
    layer_params: List[int] = [100]
    perturbations: List[int] = [1]
    matmul_cost: float = Field(default=1.0, gt=0.0)
    jvp_overhead: float = Field(default=1.0, gt=0.0)
    methods: List[MethodName] = list(MethodName)
    modes: List[CommMode] = [CommMode.PER_EPOCH, CommMode.PER_ITERATION]


def cost_report(method: MethodName, inputs: CostInputs) -> CostReport:
    return CostReport(
        method=method.value, mode=inputs.mode.value, clients=inputs.clients, layers=inputs.layers,
        layer_params=inputs.layer_params, perturbations=inputs.perturbations,
        comm=comm_cost(method, inputs.mode, inputs), comp=comp_cost(method, inputs),
    )


def cost_sweep(sweep: CostSweep) -> List[CostReport]:
    reports = []
    for method in sweep.methods:
        for mode in sweep.modes:
            for M in sweep.clients:
                for L in sweep.layers:
                    for w in sweep.layer_params:
                        for K in sweep.perturbations:
                            inputs = CostInputs(clients=M, layers=L, layer_params=w, perturbations=K,
                                                matmul_cost=sweep.matmul_cost, jvp_overhead=sweep.jvp_overhead,
                                                mode=mode)
                            reports.append(cost_report(method, inputs))
    return reports


def costs_csv_text(reports: Iterable[CostReport], config_hash: str, seed: int) -> str:
    buffer = io.StringIO()
    buffer.write(f"# spryfed-costs v1 config_hash={config_hash} seed={seed}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COST_COLUMNS)
    for report in reports:
        writer.writerow(report.csv_row())
    return buffer.getvalue()
