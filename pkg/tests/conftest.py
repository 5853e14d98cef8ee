import numpy as np
import pytest

from spryfed.ExperimentConfig import ExperimentConfig
from spryfed.data.synthetic import synth_classification
from spryfed.model.ModelSpec import Architecture, LoRASpec, ModelSpec
from spryfed.model.builder import build_model
from spryfed.validation.toys import QuadraticModel


@pytest.fixture
def poly():
    """f(w1, w2) = w1^2 + 2 w2, evaluated at w = (3, 1)."""
    model = QuadraticModel(curvature=[1.0, 0.0], linear=[0.0, 2.0])
    return model, model.store(np.array([3.0, 1.0])), model.batch()


@pytest.fixture
def blobs():
    return synth_classification(n=60, d=3, num_classes=3, margin=2.0, seed=0)


@pytest.fixture
def mlp(blobs):
    network, store = build_model(ModelSpec(architecture=Architecture.MLP, widths=[3, 5, 4], num_classes=3,
                                           init_seed=0))
    return network, store, blobs.batch()


@pytest.fixture
def lora_mlp(blobs):
    network, store = build_model(ModelSpec(architecture=Architecture.MLP, widths=[3, 4, 4], num_classes=3,
                                           lora=LoRASpec(r=2, alpha=4.0), init_seed=1))
    return network, store, blobs.batch()


def config_dict(**overrides):
    """Small, fast experiment config; nested sections are merged one level deep."""
    base = {
        "seed": 0,
        "method": "spry",
        "dataset": {"n": 200, "d": 4, "num_classes": 3, "seed": 0},
        "partition": {"num_clients": 6, "alpha": 1.0, "seed": 0},
        "federation": {"rounds": 3, "sampling_rate": 0.5},
        "model": {"architecture": "mlp", "widths": [4, 5], "num_classes": 3},
        "local": {"lr": 0.05, "batch_size": 16},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = {**base[key], **value}
        else:
            base[key] = value
    return base


@pytest.fixture
def make_config():
    def make(**overrides) -> ExperimentConfig:
        return ExperimentConfig.from_json_dict(config_dict(**overrides))
    return make


@pytest.fixture
def config_data():
    return config_dict
