"""
Partition non-IID par étiquette (Dirichlet par classe sur les clients)
"""
from typing import List

import numpy as np
import pandas as pd

from core.errors import DatasetError
from core.numerics import SeededRng
from generators.dataset import ClientDataset, Dataset, PartitionSpec
from utils.log import get_logger

logger = get_logger(__name__)

MIN_SAMPLES_PER_CLIENT = 2


def _draw_pools(data: Dataset, spec: PartitionSpec, rng: SeededRng) -> List[List[int]]:
    """Répartir chaque classe sur les clients selon p_c ~ Dir(alpha·1_N)"""
    n_clients = spec.n_clients
    pools: List[List[int]] = [[] for _ in range(n_clients)]
    concentration = np.full(n_clients, float(spec.dirichlet_alpha))

    for label in range(data.n_classes):
        class_indices = np.flatnonzero(data.labels == label)
        if class_indices.size == 0:
            continue
        proportions = np.nan_to_num(rng.dirichlet(concentration))
        if proportions.sum() <= 0.0:
            proportions = np.full(n_clients, 1.0 / n_clients)
        proportions = proportions / proportions.sum()
        counts = rng.multinomial(int(class_indices.size), proportions)
        class_indices = class_indices[rng.permutation(class_indices.size)]

        bounds = np.concatenate([[0], np.cumsum(counts)])
        for client_id in range(n_clients):
            pools[client_id].extend(int(i) for i in class_indices[bounds[client_id]:bounds[client_id + 1]])
    return pools


def _repair_pools(pools: List[List[int]]) -> int:
    """Déplacer un échantillon du plus gros client vers chaque client trop petit"""
    moves = 0
    while True:
        sizes = [len(pool) for pool in pools]
        deficient = [i for i, size in enumerate(sizes) if size < MIN_SAMPLES_PER_CLIENT]
        if not deficient:
            return moves
        donor = int(np.argmax(sizes))
        if sizes[donor] <= MIN_SAMPLES_PER_CLIENT:
            raise DatasetError("réparation impossible: pas assez d'échantillons pour tous les clients")
        pools[deficient[0]].append(pools[donor].pop())
        moves += 1


def _stratified_split(pool: List[int], labels: np.ndarray, test_fraction: float, rng: SeededRng):
    """Découper le pool d'un client en train/test, stratifié par classe"""
    pool_array = np.array(pool, dtype=np.int64)
    pool_labels = labels[pool_array]
    train: List[int] = []
    test: List[int] = []

    for label in np.unique(pool_labels):
        members = pool_array[pool_labels == label]
        members = members[rng.permutation(members.size)]
        n_test = int(np.floor(test_fraction * members.size + 0.5))
        test.extend(int(i) for i in members[:n_test])
        train.extend(int(i) for i in members[n_test:])

    if not test:
        train_labels = labels[np.array(train)]
        richest = np.bincount(train_labels).argmax()
        position = max(k for k, i in enumerate(train) if labels[i] == richest)
        test.append(train.pop(position))
    elif not train:
        train.append(test.pop())
    return np.array(train, dtype=np.int64), np.array(test, dtype=np.int64)


def dirichlet_partition(data: Dataset, spec: PartitionSpec) -> List[ClientDataset]:
    """Partition Dirichlet + découpage train/test par client"""
    n_clients = spec.n_clients
    if data.n_samples < MIN_SAMPLES_PER_CLIENT * n_clients:
        raise DatasetError(
            f"réparation impossible: {data.n_samples} échantillons pour {n_clients} clients "
            f"(minimum {MIN_SAMPLES_PER_CLIENT * n_clients})"
        )
    if data.n_samples / data.n_classes < n_clients:
        logger.warning(f"⚠️ Moins de {n_clients} échantillons par classe en moyenne, partition très creuse")

    rng = SeededRng(spec.seed).fork("partition")
    pools = _draw_pools(data, spec, rng)
    moves = _repair_pools(pools)
    if moves:
        logger.info(f"🔁 Partition réparée: {moves} échantillon(s) déplacé(s) vers des clients vides")

    clients = []
    for client_id, pool in enumerate(pools):
        train_idx, test_idx = _stratified_split(pool, data.labels, spec.test_fraction, rng.fork("split", client_id))
        clients.append(ClientDataset(
            client_id=client_id,
            train=data.subset(train_idx),
            test=data.subset(test_idx),
            train_indices=train_idx,
            test_indices=test_idx,
        ))
    return clients


def partition_table(clients: List[ClientDataset]) -> pd.DataFrame:
    """Table (client_id, split, sample_index) pour l'export de débogage"""
    rows = []
    for client in clients:
        rows.extend((client.client_id, "train", int(i)) for i in client.train_indices)
        rows.extend((client.client_id, "test", int(i)) for i in client.test_indices)
    return pd.DataFrame(rows, columns=["client_id", "split", "sample_index"])


def export_partition(clients: List[ClientDataset], path: str):
    partition_table(clients).to_csv(path, index=False)


def label_distribution(dataset: Dataset) -> np.ndarray:
    histogram = dataset.label_histogram().astype(np.float64)
    return histogram / histogram.sum()


def mean_label_skew(clients: List[ClientDataset], n_classes: int) -> float:
    """Distance de variation totale moyenne entre clients et distribution globale"""
    client_hists = []
    for client in clients:
        labels = np.concatenate([client.train.labels, client.test.labels])
        client_hists.append(np.bincount(labels, minlength=n_classes).astype(np.float64))
    global_hist = np.sum(client_hists, axis=0)
    global_dist = global_hist / global_hist.sum()
    distances = [0.5 * np.abs(h / h.sum() - global_dist).sum() for h in client_hists]
    return float(np.mean(distances))
