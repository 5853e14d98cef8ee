import json

import pytest

from spryfed.ExperimentConfig import ExperimentConfig
from spryfed.baselines import MethodName
from spryfed.exceptions import ConfigValidationError


def errors_of(data):
    with pytest.raises(ConfigValidationError) as excinfo:
        ExperimentConfig.from_json_dict(data)
    return " | ".join(excinfo.value.errors)


def test_missing_method_is_named(config_data):
    data = config_data()
    del data["method"]
    assert "method" in errors_of(data)


def test_foreign_method_key_is_rejected(config_data):
    assert "mezo.sigma" in errors_of(config_data(method="fedavg", **{"mezo.sigma": 1e-3}))


def test_unknown_section_key_is_rejected(config_data):
    assert "bogus" in errors_of(config_data(federation={"bogus": 1}))
    assert "extra" in errors_of(config_data(extra={"x": 1}))


@pytest.mark.parametrize("override,needle", [
    ({"dataset": {"d": 7}}, "dataset.d"),
    ({"dataset": {"num_classes": 5}}, "num_classes"),
    ({"model": {"widths": [4]}}, "mlp"),
    ({"partition": {"alpha": "uneven"}}, "partition.alpha"),
    ({"federation": {"sampling_rate": 0.0}}, "federation.sampling_rate"),
    ({"local": {"lr": -1.0}}, "local.lr"),
])
def test_field_level_diagnostics(config_data, override, needle):
    assert needle in errors_of(config_data(**override))


def test_unsupported_mode_is_rejected(config_data):
    data = config_data(method="fwdllm_plus", federation={"mode": "per_iteration"})
    assert "per_iteration" in errors_of(data)


def test_backprop_methods_accept_per_iteration_setting(make_config):
    config = make_config(method="fedavg", federation={"mode": "per_iteration"})
    assert config.method.method == MethodName.FEDAVG


def test_method_keys_round_trip(make_config):
    config = make_config(method="baffle_plus", **{"baffle.k": 4})
    data = config.to_json_dict()
    assert data["method"] == "baffle_plus"
    assert data["baffle.k"] == 4
    again = ExperimentConfig.from_json_dict(data)
    assert again == config
    assert again.config_hash() == config.config_hash()


def test_exact_alpha_is_accepted(make_config):
    assert make_config(partition={"alpha": "exact"}).partition.alpha == "exact"


def test_hash_ignores_output_but_not_seed(make_config):
    config = make_config()
    assert make_config().config_hash() == config.config_hash()
    assert config.with_output_dir("elsewhere").config_hash() == config.config_hash()
    assert config.with_seed(1).config_hash() != config.config_hash()
    assert len(config.config_hash()) == 64


def test_with_method_drops_foreign_keys(make_config):
    config = make_config(method="fedmezo", **{"mezo.sigma": 0.01})
    switched = config.with_method(MethodName.FEDAVG)
    assert switched.method.mezo_sigma is None
    assert config.with_method(MethodName.FEDMEZO) is config


def test_from_file(tmp_path, config_data):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(config_data()))
    config = ExperimentConfig.from_file(path)
    assert config.output_path("metrics.csv").name == "metrics.csv"

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigValidationError) as excinfo:
        ExperimentConfig.from_file(broken)
    assert excinfo.value.source == str(broken)
    with pytest.raises(ConfigValidationError):
        ExperimentConfig.from_file(tmp_path / "missing.json")


def test_non_object_config():
    with pytest.raises(ConfigValidationError):
        ExperimentConfig.from_json_dict(["method", "spry"])
