import math
from functools import partial
from typing import TYPE_CHECKING, Dict, List, Optional

import numpy as np

from ..autodiff.gradients import forward_loss, reverse_grad
from ..data.Dataset import Dataset
from ..data.Partition import Partition
from ..data.partitioning import dirichlet_partition
from ..data.synthetic import split_holdout
from ..exceptions import ArgumentError, ProtocolError
from ..model.builder import build_model, list_trainable_layers
from ..utils.logger import get_logger
from ..utils.seeding import derive_tagged, mix64, tag_id
from .ClientExecutor import ClientExecutor, ClientTask
from .ClientUpdate import ClientUpdate
from .AsyncClientExecutor import AsyncClientExecutor
from .MetricsTrace import MetricsTrace, RoundMetrics
from .PerturbationStream import PerturbationStream
from .RoundPlan import CommMode, RoundPlan, build_round_plan
from .ServerOptimizer import ServerOptState, server_step
from .TrainingProfile import TrainingProfile, spry_profile
from .client import IterationClient, IterationResult, batch_count, client_train
from .server import aggregate, round_delta, server_reconstruct

if TYPE_CHECKING:
    from ..ExperimentConfig import ExperimentConfig

logger = get_logger()

CLASSIFIER_GROUP = "classifier"


class Federation:
    """Simulated federation: data, clients, server model and the round loop.

    Everything is derived from the config seed, so two Federations built from the
    same config produce identical traces whatever executor runs the clients.
    """

    def __init__(self, config: "ExperimentConfig", profile: TrainingProfile,
                 executor: Optional[ClientExecutor] = None):
        self.config = config
        self.profile = profile
        self.executor = executor or AsyncClientExecutor(max_workers=1)
        self.mode = profile.mode or config.federation.mode
        if self.mode not in profile.supported_modes:
            raise ArgumentError(f"Method {profile.name} does not support {self.mode.value} communication")

        dataset = config.dataset.load()
        if dataset.dim != config.model.input_dim or dataset.num_classes != config.model.num_classes:
            raise ArgumentError(
                f"Model expects {config.model.input_dim} features / {config.model.num_classes} classes, "
                f"dataset has {dataset.dim} / {dataset.num_classes}"
            )
        self.train_set, self.eval_set = split_holdout(dataset, config.dataset.test_fraction, config.seed)
        self.partition: Partition = dirichlet_partition(
            self.train_set, config.partition.num_clients, config.partition.alpha, config.partition.seed
        )
        self.client_train_sets: Dict[int, Dataset] = {}
        self.client_test_sets: Dict[int, Optional[Dataset]] = {}
        for m in range(self.partition.num_clients):
            train_idx, test_idx = self.partition.local_split(m)
            self.client_train_sets[m] = self.train_set.subset(train_idx)
            self.client_test_sets[m] = self.train_set.subset(test_idx) if test_idx else None

        self.network, self.store = build_model(config.model)
        self.initial_fingerprint = self.store.fingerprint()
        self.local_cfg = config.local.model_copy(update={
            "epochs": config.local.epochs or profile.local_epochs,
            "max_iterations": config.local.max_iterations or profile.local_iterations,
        })
        self.server_state = ServerOptState(
            optimizer=config.server.optimizer or profile.server_optimizer,
            eta=config.server.eta,
            beta1=config.server.beta1,
            beta2=config.server.beta2,
            tau=config.server.tau,
            initial_v=config.server.initial_v,
        )
        self.eval_batch = self.eval_set.batch()
        self.previous_delta: Optional[Dict[str, np.ndarray]] = None
        self.trace = MetricsTrace(method=profile.name)
        logger.info(
            "Federation %s: %d clients, %d train / %d held-out samples, %d trainable params, mode=%s",
            profile.name, self.partition.num_clients, len(self.train_set), len(self.eval_set),
            self.store.num_trainable(), self.mode.value,
        )

    def sample_clients(self, round_index: int) -> List[int]:
        total = self.partition.num_clients
        count = min(total, max(1, math.ceil(self.config.federation.sampling_rate * total)))
        chosen = derive_tagged(self.config.seed, "sample", (round_index,)).choice(total, size=count, replace=False)
        return sorted(int(c) for c in chosen)

    def plan_round(self, round_index: int, clients: List[int]) -> RoundPlan:
        groups = list_trainable_layers(self.store)
        shared: List[str] = []
        if self.config.federation.personalize and CLASSIFIER_GROUP in groups and len(groups) > 1:
            shared = [CLASSIFIER_GROUP]
            groups = [g for g in groups if g != CLASSIFIER_GROUP]
        plan = build_round_plan(
            round_index, groups, clients, mix64(self.config.seed, tag_id("round"), round_index),
            self.mode, self.profile.split,
        )
        for group in shared:
            plan.mapping[group] = list(clients)
        return plan

    def _stream(self, plan: RoundPlan, client: int) -> PerturbationStream:
        return PerturbationStream(base_seed=plan.base_seed, round=plan.round, client=client)

    def _reference(self) -> Optional[Dict[str, np.ndarray]]:
        return self.previous_delta

    def _per_epoch_updates(self, plan: RoundPlan) -> List[ClientUpdate]:
        tasks = [
            ClientTask(client_id=client, run=partial(
                client_train, self.network, self.store, plan.groups_of(client), self._stream(plan, client),
                self.local_cfg, self.client_train_sets[client], self.profile.estimator, self._reference(),
            ))
            for client in plan.clients()
        ]
        return self.executor.run_round(tasks)

    def iterations_per_round(self, clients: List[int]) -> int:
        """Lockstep round length: the smallest local batch count among ``clients``."""
        iterations = min(batch_count(len(self.client_train_sets[c]), self.local_cfg.batch_size) for c in clients)
        if self.local_cfg.max_iterations is not None:
            iterations = min(iterations, self.local_cfg.max_iterations)
        return iterations

    def _per_iteration_updates(self, plan: RoundPlan) -> List[ClientUpdate]:
        clients = plan.clients()
        iterations = self.iterations_per_round(clients)
        streams = {client: self._stream(plan, client) for client in clients}
        tasks = [
            ClientTask(client_id=client, run=IterationClient(
                self.network, self.store, plan.groups_of(client), streams[client], self.local_cfg,
                self.client_train_sets[client], self.profile.estimator, iterations,
            ).run_round)
            for client in clients
        ]
        results: List[IterationResult] = self.executor.run_round(tasks)
        updates = server_reconstruct(
            {r.client_id: r.records for r in results}, plan, self.store, streams, self.local_cfg,
            self.profile.estimator, iterations, {r.client_id: r.mirror.sample_count for r in results},
        )
        if self.config.federation.verify_replay:
            for result, update in zip(results, updates):
                self._check_replay(result, update)
        return updates

    @staticmethod
    def _check_replay(result: IterationResult, update: ClientUpdate) -> None:
        for group, tensors in result.mirror.groups.items():
            for name, value in tensors.items():
                if not np.array_equal(value, update.payload.groups[group][name]):
                    raise ProtocolError(
                        "REPLAY_MISMATCH", f"server replay of client {result.client_id} diverged on {name}"
                    )

    def run_round(self, round_index: int) -> RoundMetrics:
        clients = self.sample_clients(round_index)
        plan = self.plan_round(round_index, clients)
        if self.mode == CommMode.PER_ITERATION:
            updates = self._per_iteration_updates(plan)
        else:
            updates = self._per_epoch_updates(plan)
        if self.profile.update_filter is not None:
            updates = self.profile.update_filter.select(updates, round_index)

        if updates:
            w_prime = aggregate(updates, plan, self.store)
            self.previous_delta = round_delta(self.store, w_prime)
            self.store = server_step(self.server_state, self.store, w_prime)
        else:
            logger.warning("Round %d: every client update was excluded; weights unchanged", round_index)

        metrics = self.evaluate(round_index, clients)
        self.trace.append(metrics)
        logger.info("Round %d/%d: acc_gen=%.4f acc_pers=%.4f loss=%.5f", round_index + 1,
                    self.config.federation.rounds, metrics.acc_gen, metrics.acc_pers, metrics.loss)
        return metrics

    def personalized_accuracy(self, round_index: int, clients: List[int]) -> float:
        """Test-size weighted accuracy of each client's model on its local test split.

        With ``personalize_epochs`` > 0 each client first finetunes the classifier
        on its local train split.
        """
        correct, total = 0.0, 0
        epochs = self.config.federation.personalize_epochs
        can_finetune = epochs > 0 and CLASSIFIER_GROUP in list_trainable_layers(self.store)
        for client in clients:
            test = self.client_test_sets[client]
            if test is None:
                continue
            values = self.store.values()
            if can_finetune:
                stream = PerturbationStream(
                    base_seed=mix64(self.config.seed, tag_id("personalize"), round_index),
                    round=round_index, client=client,
                )
                update = client_train(
                    self.network, self.store, [CLASSIFIER_GROUP], stream,
                    self.local_cfg.model_copy(update={"epochs": epochs}),
                    self.client_train_sets[client], self.profile.estimator,
                )
                values = dict(values)
                values.update(update.payload.groups[CLASSIFIER_GROUP])
            correct += self.network.accuracy(values, test.batch()) * len(test)
            total += len(test)
        return correct / total if total else float("nan")

    def evaluate(self, round_index: int, clients: List[int]) -> RoundMetrics:
        return RoundMetrics(
            round=round_index,
            method=self.profile.name,
            acc_gen=self.network.accuracy(self.store.values(), self.eval_batch),
            acc_pers=self.personalized_accuracy(round_index, clients),
            loss=forward_loss(self.network, self.store, self.eval_batch),
            grad_norm_proxy=reverse_grad(self.network, self.store, self.eval_batch).norm_sq(),
        )

    def run(self) -> MetricsTrace:
        for round_index in range(self.config.federation.rounds):
            self.run_round(round_index)
        return self.trace

    def close(self) -> None:
        self.executor.shutdown()


def run_federation(config: "ExperimentConfig", profile: Optional[TrainingProfile] = None,
                   executor: Optional[ClientExecutor] = None) -> MetricsTrace:
    """Run every round of ``config`` and return its metrics trace.

    Without an explicit profile the forward-gradient layer-splitting method is used.
    """
    profile = profile or spry_profile(config.local.perturbations)
    federation = Federation(config, profile, executor)
    try:
        return federation.run()
    finally:
        federation.close()
