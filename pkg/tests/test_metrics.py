"""
Tests des métriques de rounds, du ledger de communication et de l'analyse α
"""
import numpy as np
import pandas as pd
import pytest

from analyzers.alpha_analysis import alpha_analytics, alpha_frame, export_alpha, pearson
from analyzers.comm_ledger import (
    CommLedger, LedgerHistory, communication_ratio, ledger_charge, per_client_charge,
)
from analyzers.round_metrics import (
    METRICS_COLUMNS, RoundRecord, individual_gain, mean_accuracy, metrics_frame,
    rounds_to_threshold, summarize_seeds,
)


def record(round_index, accs, traffic=CommLedger()):
    return RoundRecord.from_evaluation(round_index, accs, {i: 0.0 for i in accs}, traffic)


class TestRoundMetrics:

    def test_mean_accuracy_is_unweighted(self):
        assert mean_accuracy({0: 1.0, 1: 0.0, 2: 0.5}) == pytest.approx(0.5)

    def test_mean_accuracy_empty(self):
        with pytest.raises(ValueError):
            mean_accuracy({})

    def test_individual_gain_in_points(self):
        mean, std, gains = individual_gain({0: 0.8, 1: 0.6}, {0: 0.7, 1: 0.6})
        assert gains == {0: pytest.approx(10.0), 1: pytest.approx(0.0)}
        assert mean == pytest.approx(5.0)
        assert std == pytest.approx(5.0)

    def test_individual_gain_against_itself(self):
        mean, std, _ = individual_gain({0: 0.3, 1: 0.9}, {0: 0.3, 1: 0.9})
        assert mean == 0.0 and std == 0.0

    def test_individual_gain_key_mismatch(self):
        with pytest.raises(KeyError):
            individual_gain({0: 0.5}, {1: 0.5})

    def test_rounds_to_threshold(self):
        history = [record(1, {0: 0.2}), record(2, {0: 0.6}), record(3, {0: 0.9})]
        assert rounds_to_threshold(history, 0.5) == 2
        assert rounds_to_threshold(history, 0.95) is None
        assert rounds_to_threshold(history, 0.0) == 1

    def test_metrics_frame_columns_and_stats(self):
        frame = metrics_frame([record(1, {0: 0.5, 1: 1.0}, CommLedger(2, 2, 0, 1))])
        assert list(frame.columns) == METRICS_COLUMNS
        row = frame.iloc[0]
        assert row["mean_acc"] == pytest.approx(0.75)
        assert row["std_acc"] == pytest.approx(0.25)
        assert row["min_acc"] == 0.5 and row["max_acc"] == 1.0
        assert row["scalar_units_up"] == 1

    def test_summarize_single_seed_has_zero_std(self):
        assert summarize_seeds([0.7]) == (0.7, 0.0)

    def test_summarize_population_std(self):
        mean, std = summarize_seeds([0.5, 0.7, 0.9])
        assert mean == pytest.approx(0.7)
        assert std == pytest.approx(np.std([0.5, 0.7, 0.9]))


class TestCommLedger:

    def test_local_is_free(self):
        assert ledger_charge("local", 5, 4) == CommLedger()

    def test_fedavg_charge(self):
        assert ledger_charge("fedavg", 3, 5) == CommLedger(5, 5, 0, 0)

    def test_pgfed_first_round(self):
        assert per_client_charge("pgfed", 1, 5) == CommLedger(1, 2, 0, 1)

    def test_pgfed_later_rounds(self):
        assert per_client_charge("pgfed", 2, 5) == CommLedger(3, 2, 5, 6)
        assert per_client_charge("pgfed_ce", 2, 5) == CommLedger(2, 2, 6, 6)

    @pytest.mark.parametrize("t", [2, 10, 300])
    def test_ratios(self, t):
        assert communication_ratio("pgfed", "fedavg", t, 25) == 2.5
        assert communication_ratio("pgfedmo", "fedavg", t, 25) == 2.5
        assert communication_ratio("pgfed_ce", "fedavg", t, 25) == 2.0

    def test_ratio_against_local(self):
        with pytest.raises(ValueError):
            communication_ratio("pgfed", "local", 2, 5)

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            per_client_charge("fedprox", 1, 5)

    def test_history_is_cumulative(self):
        history = LedgerHistory()
        history.record(CommLedger(1, 1, 0, 0))
        total = history.record(CommLedger(2, 0, 3, 0))
        assert total == CommLedger(3, 1, 3, 0)
        assert history.total == total
        history.restore([CommLedger(1, 0, 0, 0)])
        assert history.total == CommLedger(1, 0, 0, 0)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            CommLedger(-1, 0, 0, 0)


class TestAlphaAnalysis:

    def test_delta_and_means(self):
        A0 = np.full((3, 3), 0.5)
        A1 = A0.copy()
        A1[0, 1] = 0.0
        analytics = alpha_analytics(A0, A1, {0: 10, 1: 20, 2: 30})
        assert analytics.delta_A[0, 1] == -0.5
        np.testing.assert_allclose(analytics.col_means, [0.0, -0.5 / 3, 0.0])
        np.testing.assert_allclose(analytics.row_means, [-0.5 / 3, 0.0, 0.0])
        assert analytics.corr_col_vs_n is not None

    def test_constant_means_have_no_correlation(self):
        A = np.full((3, 3), 0.5)
        analytics = alpha_analytics(A, A, {0: 1, 1: 2, 2: 3})
        assert analytics.corr_col_vs_n is None
        assert analytics.to_dict()["corr_row_vs_n"] is None

    def test_n_train_must_cover_clients(self):
        with pytest.raises(ValueError):
            alpha_analytics(np.zeros((2, 2)), np.zeros((2, 2)), {0: 1})

    def test_pearson_perfect(self):
        assert pearson(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0])) == pytest.approx(1.0)

    def test_export_round_trips_exact_values(self, tmp_path):
        A = np.array([[0.1, 1 / 3], [2 / 3, 0.0]])
        path = tmp_path / "alpha.csv"
        export_alpha(A, str(path))
        frame = pd.read_csv(path, index_col="client_id", float_precision="round_trip")
        np.testing.assert_array_equal(frame.to_numpy(), A)
        assert list(alpha_frame(A).columns) == ["0", "1"]
