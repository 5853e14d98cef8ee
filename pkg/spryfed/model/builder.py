from typing import Iterable, List, Tuple

import numpy as np

from ..exceptions import ArgumentError
from ..utils.logger import get_logger
from ..utils.seeding import derive_generator
from .ModelSpec import ModelSpec
from .Network import Network
from .ParamStore import GroupKind, LayerGroup, ParamEntry, ParamStore

logger = get_logger()

LORA_A_STD = 0.02


def build_model(spec: ModelSpec) -> Tuple[Network, ParamStore]:
    """Build the model function and its deterministically initialized ParamStore.

    Base weights and biases are uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); LoRA A is
    N(0, 0.02^2) and LoRA B is zero. Parameter ``i`` (in entry order) draws from the
    counter-based stream ``(init_seed, i)``. Under LoRA the base weights are frozen.
    """
    spec.check()
    network = Network.from_spec(spec)
    adapted = spec.lora is not None

    entries: List[ParamEntry] = []
    groups: List[LayerGroup] = []

    def add(name: str, value: np.ndarray, trainable: bool) -> None:
        entries.append(ParamEntry(name=name, value=value, trainable=trainable))

    def uniform(shape, fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return derive_generator(spec.init_seed, len(entries)).uniform(-bound, bound, size=shape)

    for position, layer in enumerate(network.layers):
        is_head = layer is network.head
        shape = (layer.d_out, layer.d_in)
        base_trainable = not layer.lora and (spec.train_head if is_head else True)
        add(layer.weight, uniform(shape, layer.d_in), base_trainable)
        bias_trainable = spec.train_head if is_head else not adapted
        add(layer.bias, uniform((layer.d_out,), layer.d_in), bias_trainable)
        if layer.lora:
            a = derive_generator(spec.init_seed, len(entries)).normal(0.0, LORA_A_STD, size=(spec.lora.r, layer.d_in))
            add(layer.lora_a, a, True)
            add(layer.lora_b, np.zeros((layer.d_out, spec.lora.r)), True)
            groups.append(LayerGroup(name=f"lora.{position}", members=[layer.lora_a, layer.lora_b], kind=GroupKind.LORA))
        elif not is_head:
            groups.append(LayerGroup(name=f"layer.{position}", members=[layer.weight, layer.bias], kind=GroupKind.DENSE))

    head = network.head
    head_members = [head.bias] if head.lora else [head.weight, head.bias]
    groups.append(LayerGroup(name="classifier", members=head_members, kind=GroupKind.HEAD))

    store = ParamStore(entries=entries, layer_groups=groups)
    logger.debug("Built %s model with %d params (%d trainable), groups=%s",
                 spec.architecture.value, sum(e.value.size for e in entries),
                 store.num_trainable(), store.group_names())
    return network, store


def list_trainable_layers(store: ParamStore) -> List[str]:
    """Names of layer groups whose members are all trainable, in store order."""
    return [group.name for group in store.layer_groups if store.is_group_trainable(group.name)]


def freeze_except(store: ParamStore, groups: Iterable[str]) -> ParamStore:
    """Copy of ``store`` where exactly the members of ``groups`` are trainable."""
    groups = list(groups)
    known = set(store.group_names())
    unknown = [g for g in groups if g not in known]
    if unknown:
        raise ArgumentError(f"Unknown layer groups: {unknown}")
    return store.with_trainable(store.members_of(groups))
