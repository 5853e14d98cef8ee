from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..autodiff.Batch import Batch
from ..autodiff.gradients import ModelFn
from ..data.Dataset import Dataset
from ..exceptions import ArgumentError, ProtocolError
from ..model.ParamStore import ParamStore
from ..model.builder import freeze_except
from ..utils.logger import get_logger
from .ClientUpdate import ClientUpdate, JvpRecord, UpdatedLayers
from .GradientEstimator import GradientEstimator, TensorMap
from .LocalOptimizer import LocalOptimizer, LocalTrainConfig
from .PerturbationStream import PerturbationStream

logger = get_logger()


def assigned_layers(store: ParamStore, groups: Sequence[str]) -> Dict[str, Dict[str, np.ndarray]]:
    return {
        group: {name: store.get(name).copy() for name in store.group(group).members}
        for group in groups
    }


def local_batches(data: Dataset, stream: PerturbationStream, epoch: int, batch_size: int) -> List[Batch]:
    return [data.batch(indices) for indices in stream.batches(epoch, len(data), batch_size)]


def batch_count(size: int, batch_size: int) -> int:
    return -(-size // batch_size)


def _require_data(client_id: int, data: Optional[Dataset]) -> Dataset:
    if data is None or len(data) == 0:
        raise ProtocolError("EMPTY_LOCAL_DATA", f"client {client_id} has no local training data")
    return data


def client_train(model_fn: ModelFn, snapshot: ParamStore, groups: Sequence[str], stream: PerturbationStream,
                 local_cfg: LocalTrainConfig, data: Dataset, estimator: GradientEstimator,
                 reference: Optional[TensorMap] = None) -> ClientUpdate:
    """Train the assigned groups of a private copy of ``snapshot`` for the configured epochs.

    Every batch takes one estimator step followed by one local optimizer step on the
    assigned groups. Parameters outside ``groups`` are never touched.

    Args:
        model_fn: the model function
        snapshot: the round's server weights
        groups: layer groups this client trains
        stream: this client's perturbation stream for the round
        local_cfg: local training parameters (``epochs`` must be resolved)
        data: the client's local training split
        estimator: gradient estimator of the method
        reference: previous aggregated update, for estimators that select by it

    Returns:
        ClientUpdate: assigned-group weights plus the client's sample count

    Raises:
        ProtocolError: if the client has no local data
    """
    data = _require_data(stream.client, data)
    store = freeze_except(snapshot, groups)
    optimizer = LocalOptimizer(local_cfg)
    epochs = local_cfg.epochs or 1
    limit = local_cfg.max_iterations

    losses: List[float] = []
    estimates: List[np.ndarray] = []
    iteration = 0
    for epoch in range(epochs):
        for batch in local_batches(data, stream, epoch, local_cfg.batch_size):
            if limit is not None and iteration >= limit:
                break
            result = estimator.estimate(model_fn, store, batch, stream, iteration, reference)
            optimizer.step(store, result.grads)
            losses.append(result.loss)
            estimates.append(np.concatenate([np.ravel(g) for g in result.grads.values()]))
            iteration += 1

    mean_estimate = np.mean(np.stack(estimates), axis=0)
    logger.debug("Client %d trained %s for %d iterations", stream.client, list(groups), iteration)
    return ClientUpdate(
        client_id=stream.client,
        payload=UpdatedLayers(
            groups=assigned_layers(store, groups),
            sample_count=len(data),
            mean_loss=float(np.mean(losses)),
            grad_variance=float(np.var(mean_estimate)),
        ),
    )


class IterationResult(BaseModel):
    """Everything a per-iteration client produced in one round."""
    client_id: int
    records: List[JvpRecord]
    mirror: UpdatedLayers


class IterationClient:
    """A client in per-iteration mode.

    Each :meth:`step` trains on one batch, applies the update to the client's own
    mirror of its assigned groups and returns the scalars to transmit. ``None``
    marks the end of the round.
    """

    def __init__(self, model_fn: ModelFn, snapshot: ParamStore, groups: Sequence[str], stream: PerturbationStream,
                 local_cfg: LocalTrainConfig, data: Dataset, estimator: GradientEstimator, iterations: int):
        if not estimator.replayable:
            raise ArgumentError(f"{type(estimator).__name__} cannot be replayed from scalars")
        self.data = _require_data(stream.client, data)
        self.model_fn = model_fn
        self.groups = list(groups)
        self.stream = stream
        self.estimator = estimator
        self.store = freeze_except(snapshot, groups)
        self.optimizer = LocalOptimizer(local_cfg)
        self.iteration = 0
        self._batches = iter(local_batches(self.data, stream, 0, local_cfg.batch_size)[:iterations])

    @property
    def client_id(self) -> int:
        return self.stream.client

    def step(self) -> Optional[JvpRecord]:
        batch = next(self._batches, None)
        if batch is None:
            return None
        result = self.estimator.estimate(self.model_fn, self.store, batch, self.stream, self.iteration)
        self.optimizer.step(self.store, result.grads)
        record = JvpRecord(iteration=self.iteration, coefficients=result.coefficients, loss=result.loss)
        self.iteration += 1
        return record

    def mirror(self) -> UpdatedLayers:
        return UpdatedLayers(groups=assigned_layers(self.store, self.groups), sample_count=len(self.data))

    def run_round(self) -> IterationResult:
        records = []
        while (record := self.step()) is not None:
            records.append(record)
        return IterationResult(client_id=self.client_id, records=records, mirror=self.mirror())


def client_iteration(client: IterationClient) -> Optional[ClientUpdate]:
    """Next per-iteration message of ``client``; ``None`` once its round is over."""
    record = client.step()
    return None if record is None else ClientUpdate(client_id=client.client_id, payload=record)
