import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .accounting.costs import CostSweep
from .baselines.MethodConfig import METHOD_PARAMS, MethodConfig, MethodName
from .baselines.methods import profile_for
from .data.Dataset import Dataset
from .data.synthetic import synth_classification
from .exceptions import ArgumentError, ConfigValidationError
from .fedcore.LocalOptimizer import LocalTrainConfig
from .fedcore.RoundPlan import CommMode
from .fedcore.ServerOptimizer import ServerOptimizerKind
from .model.ModelSpec import Architecture, ModelSpec


class DatasetKind(str, Enum):
    SYNTHETIC = "synthetic"
    CSV = "csv"


class DatasetSpec(BaseModel):
    """Where the samples come from.

    Attributes:
        kind: ``synthetic`` Gaussian blobs or a ``csv`` file
        n: synthetic sample count
        d: synthetic feature dimension
        num_classes: class count C
        margin: scale of the synthetic class means
        seed: synthetic data seed
        path: CSV path, required for ``kind="csv"``
        test_fraction: share of samples held out for generalized accuracy
    """
    model_config = ConfigDict(extra="forbid")

    kind: DatasetKind = DatasetKind.SYNTHETIC
    n: int = Field(default=1000, ge=2)
    d: int = Field(default=10, ge=1)
    num_classes: int = Field(default=4, ge=2)
    margin: float = Field(default=2.0, ge=0.0)
    seed: int = 0
    path: Optional[str] = None
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)

    def load(self) -> Dataset:
        if self.kind == DatasetKind.CSV:
            if not self.path:
                raise ArgumentError("dataset.path is required for a csv dataset")
            return Dataset.from_csv(self.path, self.num_classes)
        return synth_classification(self.n, self.d, self.num_classes, self.margin, self.seed)


class PartitionSpec(BaseModel):
    """Dirichlet split of the training samples across the client population."""
    model_config = ConfigDict(extra="forbid")

    num_clients: int = Field(default=50, ge=1)
    alpha: Union[float, Literal["exact"]] = 1.0
    seed: int = 0


class FederationSpec(BaseModel):
    """Round loop parameters.

    Attributes:
        rounds: R
        sampling_rate: fraction s of clients sampled per round
        mode: per-epoch or per-iteration communication
        personalize: share the classifier group with every sampled client instead of splitting it
        personalize_epochs: classifier-only finetuning epochs before personalized evaluation
        verify_replay: compare server replays with client mirrors in per-iteration mode
    """
    model_config = ConfigDict(extra="forbid")

    rounds: int = Field(default=300, ge=0)
    sampling_rate: float = Field(default=0.2, gt=0.0, le=1.0)
    mode: CommMode = CommMode.PER_EPOCH
    personalize: bool = True
    personalize_epochs: int = Field(default=0, ge=0)
    verify_replay: bool = True


class ServerSpec(BaseModel):
    """Server optimizer settings; ``optimizer=None`` takes the method's default rule."""
    model_config = ConfigDict(extra="forbid")

    optimizer: Optional[ServerOptimizerKind] = None
    eta: float = Field(default=1e-2, ge=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.99, ge=0.0, lt=1.0)
    tau: float = Field(default=1e-3, gt=0.0)
    initial_v: Optional[float] = Field(default=None, ge=0.0)


class OutputSpec(BaseModel):
    """Output directory and file names; not part of the config hash."""
    model_config = ConfigDict(extra="forbid")

    dir: str = "out"
    metrics_file: str = "metrics.csv"
    summary_file: str = "summary.json"
    checkpoint_file: str = "model.ckpt"
    partition_file: str = "partition.json"
    bias_file: str = "bias.csv"
    costs_file: str = "costs.csv"
    report_file: str = "report.json"


def _default_model() -> ModelSpec:
    return ModelSpec(architecture=Architecture.LOGREG, widths=[10], num_classes=4)


class ExperimentConfig(BaseModel):
    """Everything that determines a run.

    In the JSON file the method name sits at top level as ``method`` together with its
    namespaced keys (``mezo.sigma``, ``fwdllm.k``, ...). ``to_json_dict`` writes the same
    flat layout back, so a config round-trips through its file form unchanged.
    """
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    method: MethodConfig
    dataset: DatasetSpec = DatasetSpec()
    partition: PartitionSpec = PartitionSpec()
    federation: FederationSpec = FederationSpec()
    model: ModelSpec = Field(default_factory=_default_model)
    local: LocalTrainConfig = LocalTrainConfig()
    server: ServerSpec = ServerSpec()
    output: OutputSpec = OutputSpec()
    cost: CostSweep = CostSweep()

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any], source: Optional[str] = None) -> "ExperimentConfig":
        """Validate a decoded config file.

        Raises:
            ConfigValidationError: with one ``location: message`` line per problem
        """
        if not isinstance(data, dict):
            raise ConfigValidationError(["config must be a JSON object"], source)
        method_aliases = {MethodConfig.model_fields[field].alias for field in METHOD_PARAMS}
        body = {k: v for k, v in data.items() if k not in method_aliases and k != "method"}
        if "method" in data:
            body["method"] = {"method": data["method"],
                              **{k: v for k, v in data.items() if k in method_aliases}}
        try:
            config = cls.model_validate(body)
        except ValidationError as e:
            errors = []
            for error in e.errors():
                location = ".".join(str(part) for part in error["loc"]) or "config"
                errors.append(f"{location}: {error['msg']}")
            raise ConfigValidationError(errors, source) from e
        try:
            config.check()
        except ArgumentError as e:
            raise ConfigValidationError([str(e)], source) from e
        return config

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigValidationError([f"cannot read config: {e}"], str(path)) from e
        except json.JSONDecodeError as e:
            raise ConfigValidationError([f"not valid JSON: {e}"], str(path)) from e
        return cls.from_json_dict(data, str(path))

    def check(self) -> "ExperimentConfig":
        """Cross-section checks that single fields cannot express."""
        self.model.check()
        if self.dataset.kind == DatasetKind.SYNTHETIC:
            if self.dataset.d != self.model.input_dim:
                raise ArgumentError(
                    f"model.widths[0]={self.model.input_dim} does not match dataset.d={self.dataset.d}")
            if self.dataset.num_classes != self.model.num_classes:
                raise ArgumentError(f"model.num_classes={self.model.num_classes} does not match "
                                    f"dataset.num_classes={self.dataset.num_classes}")
        profile = profile_for(self.method, self.local)
        mode = profile.mode or self.federation.mode
        if mode not in profile.supported_modes:
            raise ArgumentError(f"federation.mode: method {self.method.method.value} "
                                f"does not support {mode.value} communication")
        return self

    def to_json_dict(self, include_output: bool = True) -> Dict[str, Any]:
        data = self.model_dump(mode="json", exclude={"method"})
        if not include_output:
            data.pop("output")
        data.update(self.method.to_json_dict())
        return data

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the validated config, output paths excluded."""
        canonical = json.dumps(self.to_json_dict(include_output=False), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_method(self, name: MethodName) -> "ExperimentConfig":
        if self.method.method == name:
            return self
        return self.model_copy(update={"method": MethodConfig(method=name)})

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.model_copy(update={"seed": seed})

    def with_output_dir(self, directory: Union[str, Path]) -> "ExperimentConfig":
        return self.model_copy(update={"output": self.output.model_copy(update={"dir": str(directory)})})

    def output_path(self, file_name: str) -> Path:
        return Path(self.output.dir) / file_name
