"""
Tests de la génération, de la partition et de la lecture CSV
"""
import numpy as np
import pandas as pd
import pytest

from algorithms.local_training import run_local_sgd
from core.errors import DatasetError
from core.numerics import SeededRng
from generators.csv_loader import load_csv
from generators.dataset import Dataset, PartitionSpec, standardize_clients
from generators.partition import (
    dirichlet_partition, export_partition, label_distribution, mean_label_skew, partition_table,
)
from generators.synthetic import class_means, synth_blobs
from models.classifiers import SOFTMAX_LINEAR, ModelSpec, accuracy


class TestSynthBlobs:

    def test_shapes_and_balance(self):
        data = synth_blobs(n_classes=3, n_features=5, n_samples=100, class_separation=2.0, seed=1)
        assert data.features.shape == (100, 5)
        counts = data.label_histogram()
        assert counts.max() - counts.min() <= 1

    def test_deterministic(self):
        a = synth_blobs(4, 3, 80, 3.0, seed=9)
        b = synth_blobs(4, 3, 80, 3.0, seed=9)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_zero_separation_means_at_origin(self):
        np.testing.assert_array_equal(class_means(3, 4, 0.0, seed=0), np.zeros((3, 4)))

    def test_means_at_requested_distance(self):
        means = class_means(4, 6, 2.5, seed=2)
        np.testing.assert_allclose(np.linalg.norm(means, axis=1), 2.5)

    def test_invalid_arguments(self):
        with pytest.raises(DatasetError):
            synth_blobs(1, 3, 10, 1.0, seed=0)
        with pytest.raises(DatasetError):
            synth_blobs(5, 3, 4, 1.0, seed=0)

    def test_well_separated_blobs_are_learnable(self):
        data = synth_blobs(2, 2, 100, 10.0, seed=0)
        spec = ModelSpec(SOFTMAX_LINEAR, n_features=2, n_classes=2)
        theta, _ = run_local_sgd(spec, np.zeros(spec.dim), data, epochs=50, batch_size=10, lr=0.01,
                                 momentum=0.0, rng=SeededRng(0))
        assert accuracy(spec, theta, data) >= 0.95

    def test_dataset_is_read_only(self):
        data = synth_blobs(2, 2, 10, 1.0, seed=0)
        with pytest.raises(ValueError):
            data.features[0, 0] = 1.0


class TestDirichletPartition:

    def test_conserves_samples(self):
        # Given
        data = synth_blobs(4, 3, 200, 3.0, seed=11)

        # When
        clients = dirichlet_partition(data, PartitionSpec(4, 0.3, 0.25, seed=11))

        # Then
        assert sum(c.n_train + c.n_test for c in clients) == 200
        indices = np.concatenate([np.concatenate([c.train_indices, c.test_indices]) for c in clients])
        assert sorted(indices.tolist()) == list(range(200))

    def test_every_client_has_train_and_test(self):
        data = synth_blobs(10, 4, 300, 3.0, seed=3)
        clients = dirichlet_partition(data, PartitionSpec(20, 0.05, 0.25, seed=3))
        assert all(c.n_train >= 1 and c.n_test >= 1 for c in clients)

    def test_train_and_test_share_the_source_rows(self):
        data = synth_blobs(3, 2, 90, 3.0, seed=4)
        client = dirichlet_partition(data, PartitionSpec(3, 1.0, 0.25, seed=4))[0]
        np.testing.assert_array_equal(client.train.features, data.features[client.train_indices])

    def test_large_alpha_is_near_iid(self):
        data = synth_blobs(2, 2, 4000, 3.0, seed=5)
        clients = dirichlet_partition(data, PartitionSpec(2, 1e9, 0.25, seed=5))
        global_dist = label_distribution(data)
        for client in clients:
            labels = np.concatenate([client.train.labels, client.test.labels])
            dist = np.bincount(labels, minlength=2) / labels.size
            assert np.abs(dist - global_dist).max() <= 0.05

    def test_heterogeneity_decreases_with_alpha(self):
        low, high = [], []
        for seed in range(20):
            data = synth_blobs(5, 2, 500, 3.0, seed=seed)
            low.append(mean_label_skew(dirichlet_partition(data, PartitionSpec(10, 0.1, 0.25, seed)), 5))
            high.append(mean_label_skew(dirichlet_partition(data, PartitionSpec(10, 10.0, 0.25, seed)), 5))
        assert np.mean(low) > np.mean(high)

    def test_impossible_repair(self):
        data = synth_blobs(2, 2, 10, 1.0, seed=0)
        with pytest.raises(DatasetError):
            dirichlet_partition(data, PartitionSpec(6, 0.5, 0.25, seed=0))

    def test_deterministic(self):
        data = synth_blobs(3, 2, 120, 3.0, seed=8)
        a = dirichlet_partition(data, PartitionSpec(5, 0.3, 0.25, seed=8))
        b = dirichlet_partition(data, PartitionSpec(5, 0.3, 0.25, seed=8))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.train_indices, y.train_indices)
            np.testing.assert_array_equal(x.test_indices, y.test_indices)

    def test_partition_spec_validation(self):
        with pytest.raises(DatasetError):
            PartitionSpec(1, 0.5)
        with pytest.raises(DatasetError):
            PartitionSpec(4, 0.0)
        with pytest.raises(DatasetError):
            PartitionSpec(4, 0.5, test_fraction=1.0)

    def test_export_partition(self, tmp_path):
        data = synth_blobs(3, 2, 60, 3.0, seed=1)
        clients = dirichlet_partition(data, PartitionSpec(3, 1.0, 0.25, seed=1))
        path = tmp_path / "partition.csv"
        export_partition(clients, str(path))
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["client_id", "split", "sample_index"]
        assert len(frame) == 60
        assert set(frame["split"]) == {"train", "test"}
        assert len(partition_table(clients)) == 60

    def test_standardize_uses_train_union(self, small_clients):
        union = np.concatenate([c.train.features for c in small_clients])
        np.testing.assert_allclose(union.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(union.std(axis=0), 1.0, atol=1e-12)
        again = standardize_clients(small_clients)
        np.testing.assert_allclose(again[0].train.features, small_clients[0].train.features, atol=1e-12)


class TestLoadCsv:

    def _write(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_reads_features_and_labels(self, tmp_path):
        path = self._write(tmp_path, "a,b,label\n1.0,2.0,0\n3.0,4.0,1\n5.0,6.0,1\n")
        data = load_csv(path, "label", seed=0)
        assert data.n_samples == 3
        assert data.n_features == 2
        assert sorted(data.labels.tolist()) == [0, 1, 1]
        rows = {tuple(row) for row in data.features.tolist()}
        assert rows == {(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)}

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = self._write(tmp_path, "a,b,label\n1.0,2.0,0\n3.0,abc,1\n")
        with pytest.raises(DatasetError) as info:
            load_csv(path, "label")
        assert info.value.row == 2
        assert info.value.column == "b"

    def test_non_finite_feature(self, tmp_path):
        path = self._write(tmp_path, "a,label\nnan,0\n")
        with pytest.raises(DatasetError) as info:
            load_csv(path, "label")
        assert info.value.row == 1

    def test_missing_label_column(self, tmp_path):
        path = self._write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(DatasetError) as info:
            load_csv(path, "label")
        assert info.value.column == "label"

    def test_empty_file(self, tmp_path):
        path = self._write(tmp_path, "a,label\n")
        with pytest.raises(DatasetError, match="empty dataset"):
            load_csv(path, "label")

    def test_label_out_of_range(self, tmp_path):
        path = self._write(tmp_path, "a,label\n1,0\n2,5\n")
        with pytest.raises(DatasetError):
            load_csv(path, "label", n_classes=3)

    def test_dataset_validation(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((2, 2)), np.array([0, 3]), n_classes=2)
