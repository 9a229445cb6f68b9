"""
Types de jeux de données
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core.errors import DatasetError


@dataclass(frozen=True)
class Dataset:
    """Jeu étiqueté: matrice (n_samples × n_features) et labels dans [0, C)"""
    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2:
            raise DatasetError(f"matrice de features attendue en 2-D, reçu {features.ndim}-D")
        if features.shape[0] != labels.shape[0]:
            raise DatasetError(
                f"{features.shape[0]} lignes de features pour {labels.shape[0]} labels"
            )
        if labels.size < 1:
            raise DatasetError("empty dataset")
        if self.n_classes < 2:
            raise DatasetError(f"n_classes doit être >= 2, reçu {self.n_classes}")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            bad = int(np.flatnonzero((labels < 0) | (labels >= self.n_classes))[0])
            raise DatasetError(
                f"label {int(labels[bad])} hors de [0, {self.n_classes})", row=bad
            )
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Sous-ensemble (copie) selon des indices de lignes"""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices], self.n_classes)

    def label_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class PartitionSpec:
    """Paramètres de la partition Dirichlet"""
    n_clients: int
    dirichlet_alpha: float
    test_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_clients < 2:
            raise DatasetError(f"n_clients doit être >= 2, reçu {self.n_clients}")
        if not self.dirichlet_alpha > 0:
            raise DatasetError(f"dirichlet_alpha doit être > 0, reçu {self.dirichlet_alpha}")
        if not 0.0 < self.test_fraction < 1.0:
            raise DatasetError(f"test_fraction doit être dans (0,1), reçu {self.test_fraction}")


@dataclass(frozen=True)
class ClientDataset:
    """Données d'un client; les indices renvoient au jeu source (export)"""
    client_id: int
    train: Dataset
    test: Dataset
    train_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    test_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        if self.train.n_samples < 1 or self.test.n_samples < 1:
            raise DatasetError(f"client {self.client_id}: train et test doivent être non vides")

    @property
    def n_train(self) -> int:
        return self.train.n_samples

    @property
    def n_test(self) -> int:
        return self.test.n_samples


def standardize_clients(clients: list, stats: Optional[tuple] = None) -> list:
    """Centrer-réduire les features avec les statistiques de l'union des trains"""
    if stats is None:
        union = np.concatenate([client.train.features for client in clients], axis=0)
        mean = union.mean(axis=0)
        std = union.std(axis=0)
        std[std == 0.0] = 1.0
    else:
        mean, std = stats

    standardized = []
    for client in clients:
        standardized.append(ClientDataset(
            client_id=client.client_id,
            train=Dataset((client.train.features - mean) / std, client.train.labels, client.train.n_classes),
            test=Dataset((client.test.features - mean) / std, client.test.labels, client.test.n_classes),
            train_indices=client.train_indices,
            test_indices=client.test_indices,
        ))
    return standardized
