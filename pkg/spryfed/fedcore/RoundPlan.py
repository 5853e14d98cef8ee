from enum import Enum
from typing import Dict, List, Sequence

from pydantic import BaseModel, model_validator

from ..exceptions import ArgumentError, StructuralError


class CommMode(str, Enum):
    PER_EPOCH = "per_epoch"
    PER_ITERATION = "per_iteration"


class RoundPlan(BaseModel):
    """Which sampled clients train which layer groups in one round."""
    round: int
    mapping: Dict[str, List[int]]
    base_seed: int
    mode: CommMode = CommMode.PER_EPOCH

    @model_validator(mode="after")
    def _check(self) -> "RoundPlan":
        for group, clients in self.mapping.items():
            if not clients:
                raise StructuralError(f"Layer group {group} has no client in round {self.round}")
        return self

    def clients(self) -> List[int]:
        return sorted({c for clients in self.mapping.values() for c in clients})

    def groups_of(self, client: int) -> List[str]:
        """Groups assigned to ``client``, in mapping (store) order."""
        return [group for group, clients in self.mapping.items() if client in clients]

    def client_groups(self) -> Dict[int, List[str]]:
        return {client: self.groups_of(client) for client in self.clients()}


def map_layers_to_clients(groups: Sequence[str], client_ids: Sequence[int]) -> Dict[str, List[int]]:
    """Cyclic layer-to-client assignment.

    With L >= M the client at position m gets groups {i : i mod M == m}. With M > L
    every client at position m gets group m mod L, so each group is shared.
    """
    if not groups or not client_ids:
        raise ArgumentError("Need at least one layer group and one client")
    mapping: Dict[str, List[int]] = {group: [] for group in groups}
    if len(groups) >= len(client_ids):
        for i, group in enumerate(groups):
            mapping[group].append(client_ids[i % len(client_ids)])
    else:
        for m, client in enumerate(client_ids):
            mapping[groups[m % len(groups)]].append(client)
    return mapping


def map_all_layers(groups: Sequence[str], client_ids: Sequence[int]) -> Dict[str, List[int]]:
    """Every group to every client (no splitting)."""
    if not groups or not client_ids:
        raise ArgumentError("Need at least one layer group and one client")
    return {group: list(client_ids) for group in groups}


def build_round_plan(round_index: int, groups: Sequence[str], client_ids: Sequence[int], base_seed: int,
                     mode: CommMode, split: bool, shared_groups: Sequence[str] = ()) -> RoundPlan:
    """Plan for one round; ``shared_groups`` (the classifier under personalization) go to everyone."""
    mapping = map_layers_to_clients(groups, client_ids) if split else map_all_layers(groups, client_ids)
    for group in shared_groups:
        if group in mapping:
            mapping[group] = list(client_ids)
    return RoundPlan(round=round_index, mapping=mapping, base_seed=base_seed, mode=mode)
