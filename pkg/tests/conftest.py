"""
Fixtures partagées des tests
"""
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.federation import FederationConfig  # noqa: E402
from generators.dataset import PartitionSpec, standardize_clients  # noqa: E402
from generators.partition import dirichlet_partition  # noqa: E402
from generators.synthetic import synth_blobs  # noqa: E402
from models.classifiers import MLP_1HIDDEN, SOFTMAX_LINEAR, ModelSpec  # noqa: E402


def pytest_configure(config):
    """Configuration pytest"""
    config.addinivalue_line(
        "markers", "slow: réplications à l'échelle bureau (plusieurs minutes)"
    )


def make_clients(n_clients=8, n_classes=4, n_features=6, n_samples=400, alpha=0.5, seed=0,
                 separation=3.0):
    data = synth_blobs(n_classes, n_features, n_samples, separation, seed)
    clients = dirichlet_partition(data, PartitionSpec(n_clients, alpha, 0.25, seed))
    return standardize_clients(clients)


def make_federation(algorithm="fedavg", **overrides):
    values = dict(n_clients=8, sample_rate=0.5, rounds=5, local_epochs=1, batch_size=16,
                  eta1=0.05, eta2=0.05, mu=0.1, beta=0.5, momentum=0.9, seed=7)
    values.update(overrides)
    return FederationConfig(algorithm=algorithm, **values)


@pytest.fixture
def small_clients():
    """8 clients, 4 classes, 6 features"""
    return make_clients()


@pytest.fixture
def linear_spec():
    return ModelSpec(SOFTMAX_LINEAR, n_features=6, n_classes=4)


@pytest.fixture
def mlp_spec():
    return ModelSpec(MLP_1HIDDEN, n_features=6, n_classes=4, hidden_dim=5, l2=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_document():
    """Petite configuration valide (dict)"""
    return {
        "name": "tiny",
        "seeds": [0, 1],
        "compare": ["pgfed", "fedavg", "local"],
        "dataset": {"n_classes": 4, "n_features": 6, "n_samples": 320, "dirichlet_alpha": 0.5},
        "model": {"kind": SOFTMAX_LINEAR},
        "federation": {"algorithm": "pgfed", "n_clients": 8, "sample_rate": 0.5, "rounds": 4,
                       "local_epochs": 1, "batch_size": 16, "eta1": 0.05, "eta2": 0.05, "mu": 0.1},
        "eval": {"eval_every": 2, "threshold": 0.5},
        "oracle": {"steps": 3, "mu": 1.0, "lr": 0.1},
        "output": {"directory": "runs"},
    }


@pytest.fixture
def config_file(tmp_path, config_document):
    """Fichier JSON de configuration pointant vers un dossier de sortie temporaire"""
    document = dict(config_document)
    document["output"] = {"directory": str(tmp_path / "runs")}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path
