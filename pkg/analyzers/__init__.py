"""
Analyseurs: métriques de rounds, ledger de communication, matrice α
"""
from .alpha_analysis import AlphaAnalytics, alpha_analytics, alpha_frame, export_alpha
from .comm_ledger import CommLedger, LedgerHistory, communication_ratio, ledger_charge, per_client_charge
from .round_metrics import (
    METRICS_COLUMNS, RoundRecord, individual_gain, mean_accuracy, metrics_frame,
    rounds_to_threshold, summarize_seeds,
)
