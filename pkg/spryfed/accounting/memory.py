from ..model.ModelSpec import ModelSpec
from ..model.ParamStore import ParamStore
from .CostInputs import MemoryInputs


def memory_inputs_for(spec: ModelSpec, store: ParamStore, batch_size: int,
                      optimizer_multiplier: float = 2.0) -> MemoryInputs:
    """Memory model inputs of a built network: one activation per matmul output."""
    activations = [float(d_out) for _, d_out in spec.hidden_shapes()] + [float(spec.num_classes)]
    return MemoryInputs(
        activations=activations,
        batch_size=batch_size,
        trainable_params=store.num_trainable(),
        total_params=int(sum(entry.value.size for entry in store.entries)),
        optimizer_multiplier=optimizer_multiplier,
    )
