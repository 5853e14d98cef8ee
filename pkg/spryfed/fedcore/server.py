from typing import Dict, List, Mapping, Sequence

import numpy as np

from ..exceptions import ProtocolError
from ..model.ParamStore import ParamStore
from ..model.builder import freeze_except
from ..utils.logger import get_logger
from .ClientUpdate import ClientUpdate, JvpRecord, UpdatedLayers
from .GradientEstimator import GradientEstimator, trainable_shapes
from .LocalOptimizer import LocalOptimizer, LocalTrainConfig
from .PerturbationStream import PerturbationStream
from .RoundPlan import RoundPlan
from .client import assigned_layers

logger = get_logger()


def server_reconstruct(records: Mapping[int, Sequence[JvpRecord]], plan: RoundPlan, snapshot: ParamStore,
                       streams: Mapping[int, PerturbationStream], local_cfg: LocalTrainConfig,
                       estimator: GradientEstimator, iterations: int,
                       sample_counts: Mapping[int, int]) -> List[ClientUpdate]:
    """Rebuild every client's assigned-group weights from its transmitted scalars.

    For each client the server regenerates the perturbations of iterations
    ``0..iterations-1`` from the shared stream and runs the same local optimizer
    the client ran. The result is bit-identical to the client's mirror.

    Raises:
        ProtocolError: if a client's records are missing an iteration or out of order
    """
    updates = []
    for client in plan.clients():
        groups = plan.groups_of(client)
        client_records = list(records.get(client, ()))
        store = freeze_except(snapshot, groups)
        shapes = trainable_shapes(store)
        optimizer = LocalOptimizer(local_cfg)
        for t in range(iterations):
            if t >= len(client_records) or client_records[t].iteration != t:
                raise ProtocolError("MISSING_JVP_RECORD", f"no record for client {client} iteration {t}")
            grads = estimator.replay(client_records[t].coefficients, streams[client], t, shapes)
            optimizer.step(store, grads)
        updates.append(ClientUpdate(
            client_id=client,
            payload=UpdatedLayers(groups=assigned_layers(store, groups), sample_count=sample_counts[client]),
        ))
    return updates


def aggregate(updates: Sequence[ClientUpdate], plan: RoundPlan, w_r: ParamStore) -> ParamStore:
    """Per layer group, the sample-count weighted mean over the clients that trained it.

    Contributions are accumulated in client-ID order. A group trained by a single
    client is copied verbatim.

    Raises:
        ProtocolError: if a payload is not UpdatedLayers, carries groups it was not
            assigned, or a planned group receives no update
    """
    payloads: Dict[int, UpdatedLayers] = {}
    for update in updates:
        if not isinstance(update.payload, UpdatedLayers):
            raise ProtocolError("BAD_PAYLOAD", f"client {update.client_id} sent {type(update.payload).__name__}")
        unexpected = set(update.payload.groups) - set(plan.groups_of(update.client_id))
        if unexpected:
            raise ProtocolError("UNEXPECTED_GROUPS", f"client {update.client_id} returned {sorted(unexpected)}")
        payloads[update.client_id] = update.payload

    result = w_r.clone()
    for group, clients in plan.mapping.items():
        contributors = [c for c in sorted(clients) if c in payloads and group in payloads[c].groups]
        if not contributors:
            raise ProtocolError("UNCOVERED_GROUP", f"layer group {group} received no update in round {plan.round}")
        members = w_r.group(group).members
        if len(contributors) == 1:
            for name in members:
                result.set(name, payloads[contributors[0]].groups[group][name].copy())
            continue
        total = float(sum(payloads[c].sample_count for c in contributors))
        for name in members:
            combined = None
            for c in contributors:
                term = (payloads[c].sample_count / total) * payloads[c].groups[group][name]
                combined = term if combined is None else combined + term
            result.set(name, combined)
    logger.debug("Aggregated %d updates over %d groups", len(payloads), len(plan.mapping))
    return result


def round_delta(w_r: ParamStore, w_prime: ParamStore) -> Dict[str, np.ndarray]:
    return {name: w_prime.get(name) - w_r.get(name) for name in w_r.trainable_names()}
