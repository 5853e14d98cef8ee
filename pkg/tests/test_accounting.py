import csv
import io

import pytest

from spryfed.accounting import (
    COST_COLUMNS,
    CostInputs,
    CostSweep,
    MemoryInputs,
    MethodKind,
    comm_cost,
    comp_cost,
    cost_sweep,
    costs_csv_text,
    memory_inputs_for,
    memory_model,
)
from spryfed.baselines import MethodName
from spryfed.exceptions import ArgumentError
from spryfed.fedcore import CommMode
from spryfed.model import Architecture, LoRASpec, ModelSpec, build_model

PER_EPOCH, PER_ITERATION = CommMode.PER_EPOCH, CommMode.PER_ITERATION


def test_spry_per_epoch_upload():
    inputs = CostInputs(clients=10, layers=20, layer_params=100)
    assert comm_cost("spry", PER_EPOCH, inputs).client_to_server == 200


def test_spry_per_iteration_download():
    inputs = CostInputs(clients=10, layers=20, layer_params=100)
    cost = comm_cost("spry", PER_ITERATION, inputs)
    assert cost.server_to_clients == 2010
    assert cost.client_to_server == 1


@pytest.mark.parametrize("clients", [1, 3, 16])
def test_fedavg_uploads_whole_model(clients):
    inputs = CostInputs(clients=clients, layers=6, layer_params=50)
    cost = comm_cost(MethodName.FEDAVG, None, inputs)
    assert cost.client_to_server == inputs.total_params == 300
    assert cost.server_to_clients == 300 * clients


def test_unknown_method_is_argument_error():
    with pytest.raises(ArgumentError):
        comm_cost("sgd-plus", None, CostInputs(clients=1, layers=1, layer_params=1))


def test_backprop_client_cost():
    assert comp_cost("fedavg", CostInputs(clients=2, layers=4, layer_params=10, matmul_cost=7)).client_per_iteration == 84


def test_spry_client_cost():
    inputs = CostInputs(clients=4, layers=4, layer_params=10, matmul_cost=7, jvp_overhead=2)
    assert comp_cost("spry", inputs).client_per_iteration == 58


@pytest.mark.parametrize("perturbations", [1, 3, 20])
def test_spry_client_cost_ignores_perturbation_count(perturbations):
    inputs = CostInputs(clients=4, layers=8, layer_params=10, matmul_cost=7, jvp_overhead=2,
                        perturbations=perturbations)
    assert comp_cost("spry", inputs).client_per_iteration == 2 * 2 * 9 + 80
    fgd = comp_cost("fedfgd", inputs).client_per_iteration
    assert fgd == 2 * perturbations * 8 * 9 + 80


def test_baffle_client_cost():
    inputs = CostInputs(clients=4, layers=4, layer_params=10, matmul_cost=7, perturbations=20)
    assert comp_cost("baffle_plus", inputs).client_per_iteration == 1920


def test_split_server_cost_with_shared_layers():
    inputs = CostInputs(clients=8, layers=2, layer_params=10)
    # two subsets of four clients, one layer each
    assert comp_cost("fedavg_split", inputs).server_per_round == 2 * 3 * 10 * 1
    assert comp_cost("fedavg", inputs).server_per_round == 7 * 10 * 2


def test_spry_upload_never_exceeds_full_model():
    for M in range(1, 65):
        for L in range(2, 65):
            inputs = CostInputs(clients=M, layers=L, layer_params=3)
            upload = comm_cost("spry", PER_EPOCH, inputs).client_to_server
            assert upload <= inputs.total_params
            assert (upload == inputs.total_params) == (M == 1)


@pytest.mark.parametrize("method", ["spry", "fedmezo", "baffle_plus", "fwdllm_plus", "fedfgd"])
def test_per_iteration_upload_is_one_scalar(method):
    inputs = CostInputs(clients=5, layers=7, layer_params=11, mode=PER_ITERATION)
    assert comm_cost(method, None, inputs).client_to_server == 1


def test_single_layer_backprop_equals_zero_order_activations():
    inputs = MemoryInputs(activations=[12.0], batch_size=8, trainable_params=10, total_params=20)
    assert memory_model("backprop", inputs).activations == memory_model("zero_order", inputs).activations


def test_forward_ad_holds_twice_zero_order_activations():
    inputs = MemoryInputs(activations=[5.0, 9.0, 3.0], batch_size=4, trainable_params=10, total_params=20)
    forward = memory_model(MethodKind.FORWARD_AD, inputs).activations
    assert forward == 2 * memory_model(MethodKind.ZERO_ORDER, inputs).activations


@pytest.mark.parametrize("depth", [2, 3, 8])
def test_equal_width_backprop_to_forward_ratio(depth):
    inputs = MemoryInputs(activations=[16.0] * depth, batch_size=2, trainable_params=0, total_params=0)
    backprop = memory_model("backprop", inputs).activations
    forward = memory_model("forward_ad", inputs).activations
    assert backprop / forward == depth / 2
    assert forward <= backprop


def test_memory_breakdown_sums_to_peak():
    inputs = MemoryInputs(activations=[4.0, 4.0], batch_size=3, trainable_params=10, total_params=100)
    breakdown = memory_model("backprop", inputs)
    assert breakdown.grads_opt == 30.0
    assert breakdown.params == 100.0
    assert breakdown.peak == breakdown.params + breakdown.grads_opt + breakdown.activations


def test_memory_inputs_are_checked():
    with pytest.raises(ArgumentError):
        memory_model("backprop", MemoryInputs(activations=[], batch_size=1, trainable_params=0, total_params=0))
    with pytest.raises(ArgumentError):
        memory_model("backprop", MemoryInputs(activations=[1.0], batch_size=1, trainable_params=5, total_params=1))


def test_lora_shrinks_trainable_memory():
    base = ModelSpec(architecture=Architecture.MLP, widths=[32, 32, 32], num_classes=4)
    _, dense = build_model(base)
    spec = base.model_copy(update={"lora": LoRASpec(r=1)})
    _, adapted = build_model(spec)
    dense_mem = memory_model("forward_ad", memory_inputs_for(base, dense, 8))
    lora_mem = memory_model("forward_ad", memory_inputs_for(spec, adapted, 8))
    assert lora_mem.grads_opt < dense_mem.grads_opt
    _, wide = build_model(spec.model_copy(update={"lora": LoRASpec(r=16)}))
    assert wide.num_trainable() > adapted.num_trainable()


def test_cost_sweep_csv():
    sweep = CostSweep(clients=[2, 4], layers=[4], methods=[MethodName.SPRY, MethodName.FEDAVG])
    reports = cost_sweep(sweep)
    assert len(reports) == 2 * 2 * 2
    text = costs_csv_text(reports, "abc", 3)
    lines = text.splitlines()
    assert lines[0] == "# spryfed-costs v1 config_hash=abc seed=3"
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert rows[0] == COST_COLUMNS
    assert rows[1][:8] == ["spry", "per_epoch", "2", "4", "100", "1", "200", "400"]
