"""
Tests de la configuration des expériences
"""
import json

import pytest

from config.settings import (
    ExperimentConfig, _get_default_config, max_workers_from_env, parse_config, save_config,
)
from core.errors import ConfigError


def write(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestParseConfig:

    def test_valid_document(self, tmp_path, config_document):
        config = parse_config(write(tmp_path, config_document))
        assert config.federation.algorithm == "pgfed"
        assert config.federation.clients_per_round == 4
        assert config.seeds == [0, 1]
        assert config.compare == ["pgfed", "fedavg", "local"]

    def test_sample_rate_quarter_of_hundred(self, tmp_path):
        document = {"federation": {"algorithm": "fedavg", "n_clients": 100, "sample_rate": 0.25}}
        assert parse_config(write(tmp_path, document)).federation.clients_per_round == 25

    def test_defaults(self, tmp_path):
        config = parse_config(write(tmp_path, {"federation": {"algorithm": "local"}}))
        assert config.federation.sample_rate == 0.25
        assert config.federation.local_epochs == 5
        assert config.federation.momentum == 0.9
        assert config.federation.rounds == 300
        assert config.federation.mu == 0.01
        assert config.federation.beta == 0.5
        assert config.dataset.test_fraction == 0.25
        assert config.eval.threshold == 0.7

    def test_missing_algorithm(self, tmp_path):
        with pytest.raises(ConfigError, match="algorithm required"):
            parse_config(write(tmp_path, {"federation": {"n_clients": 4}}))

    def test_beta_out_of_range(self, tmp_path):
        with pytest.raises(ConfigError, match=r"beta in \[0,1\)"):
            parse_config(write(tmp_path, {"federation": {"algorithm": "pgfedmo", "beta": 1.5}}))

    def test_unknown_key_is_an_error(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, {"federation": {"algorithm": "pgfed", "learning_rate": 0.1}}))
        assert ("federation.learning_rate", "clé inconnue") in info.value.errors

    def test_all_violations_are_collected(self, tmp_path):
        document = {"federation": {"algorithm": "nope", "mu": -1.0}, "dataset": {"dirichlet_alpha": 0.0}}
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, document))
        keys = {key for key, _ in info.value.errors}
        assert {"federation.algorithm", "federation.mu", "dataset.dirichlet_alpha"} <= keys

    def test_wrong_type(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, {"federation": {"algorithm": "pgfed", "rounds": "ten"}}))
        assert "federation.rounds" in {key for key, _ in info.value.errors}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(str(tmp_path / "absent.json"))

    def test_unknown_compare_tag(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write(tmp_path, {"federation": {"algorithm": "pgfed"}, "compare": ["pfedme"]}))

    def test_yaml_document(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("federation:\n  algorithm: fedavg\n  rounds: 7\n", encoding="utf-8")
        assert parse_config(str(path)).federation.rounds == 7

    def test_overrides(self, tmp_path, config_document):
        config = parse_config(write(tmp_path, config_document),
                              overrides={"federation.algorithm": "local", "federation.rounds": 2,
                                         "output.directory": None})
        assert config.federation.algorithm == "local"
        assert config.federation.rounds == 2
        assert config.output.directory == "runs"

    def test_csv_source_requires_path(self, tmp_path):
        document = {"federation": {"algorithm": "fedavg"}, "dataset": {"source": "csv"}}
        with pytest.raises(ConfigError, match="path required"):
            parse_config(write(tmp_path, document))


class TestRoundTrip:

    def test_parse_save_parse(self, tmp_path, config_document):
        first = parse_config(write(tmp_path, config_document))
        path = tmp_path / "saved.json"
        save_config(first, str(path))
        second = parse_config(str(path))
        assert first == second
        assert first.to_dict() == second.to_dict()

    def test_from_dict_of_to_dict(self, tmp_path, config_document):
        config = parse_config(write(tmp_path, config_document))
        assert ExperimentConfig.from_dict(config.to_dict()) == config

    def test_with_run(self, tmp_path, config_document):
        config = parse_config(write(tmp_path, config_document)).with_run(algorithm="local", seed=3, rounds=9)
        assert (config.federation.algorithm, config.federation.seed, config.federation.rounds) == ("local", 3, 9)

    def test_default_config_has_no_algorithm(self):
        assert "algorithm" not in _get_default_config()["federation"]


class TestEnvironment:

    def test_max_workers_default(self, monkeypatch):
        monkeypatch.delenv("PERSOFED_MAX_WORKERS", raising=False)
        assert max_workers_from_env() == 1

    def test_max_workers_value(self, monkeypatch):
        monkeypatch.setenv("PERSOFED_MAX_WORKERS", "4")
        assert max_workers_from_env() == 4

    def test_max_workers_invalid(self, monkeypatch):
        monkeypatch.setenv("PERSOFED_MAX_WORKERS", "0")
        with pytest.raises(ConfigError):
            max_workers_from_env()
