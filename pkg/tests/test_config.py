try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import pytest

from app.config import (
    Config,
    dump_experiment_config,
    load_experiment_config,
    parse_experiment_config,
)
from app.schemas.config import ExperimentConfig
from app.utils.errors import ConfigurationError


def test_default_file_matches_schema_defaults():
    assert load_experiment_config(Config.DEFAULT_CONFIG) == ExperimentConfig()


@pytest.mark.parametrize("path", [Config.DEFAULT_CONFIG, Config.SMOKE_CONFIG])
def test_dump_and_parse_round_trip(path):
    config = load_experiment_config(path)
    text = dump_experiment_config(config)
    assert parse_experiment_config(tomllib.loads(text)) == config
    assert "[validate]" in text


def test_smoke_overrides(smoke_config):
    assert (smoke_config.system.M, smoke_config.system.N) == (2, 4)
    assert smoke_config.system.snr_min_db == 10.0
    assert smoke_config.experiment.record_timing is False
    assert smoke_config.system.gamma_min == pytest.approx(10.0)


@pytest.mark.parametrize(
    ("text", "key"),
    [
        ("[system]\nbogus = 1\n", "system.bogus"),
        ("[system]\neta = 0.0\n", "system.eta"),
        ("[channel]\neps = 1.0\n", "channel.eps"),
        ("[agent]\nbatch = 4\nwarmup = 10\nbuffer = 5\n", "agent"),
        ("[scaling_law]\nn_list = [8, 4]\n", "scaling_law.n_list"),
        ("[unknown]\nx = 1\n", "unknown"),
    ],
)
def test_invalid_values_name_the_key(write_toml, text, key):
    with pytest.raises(ConfigurationError) as info:
        load_experiment_config(write_toml(text))
    assert info.value.key == key
    assert key in info.value.detail


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_experiment_config(tmp_path / "nope.toml")


def test_malformed_toml(write_toml):
    with pytest.raises(ConfigurationError):
        load_experiment_config(write_toml("[system\nM = 2\n"))


def test_validate_section_alias(write_toml):
    config = load_experiment_config(write_toml("[validate]\ninstances = 7\nM = 4\n"))
    assert config.validate_solver.instances == 7
    assert config.validate_solver.M == 4
    assert ExperimentConfig(validate_solver={"N": 3}).validate_solver.N == 3


def test_timing_is_off_by_default():
    assert ExperimentConfig().experiment.record_timing is False
    assert load_experiment_config(Config.DEFAULT_CONFIG).experiment.record_timing is False
