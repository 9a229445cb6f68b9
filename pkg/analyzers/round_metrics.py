"""
Métriques de performance personnalisée
"""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analyzers.comm_ledger import CommLedger

METRICS_COLUMNS = [
    "round", "mean_acc", "std_acc", "min_acc", "max_acc",
    "model_units_down", "model_units_up", "scalar_units_down", "scalar_units_up",
]


@dataclass(frozen=True)
class RoundRecord:
    """Instantané de fin de round, évalué sur tous les clients"""
    round: int
    per_client_test_acc: Dict[int, float]
    mean_personalized_acc: float
    per_client_train_loss: Dict[int, float]
    traffic: CommLedger = field(default_factory=CommLedger)
    selected: Tuple[int, ...] = ()
    alpha_increases: int = 0
    alpha_clamps: int = 0

    @classmethod
    def from_evaluation(cls, round_index: int,
                        per_client_test_acc: Mapping[int, float],
                        per_client_train_loss: Mapping[int, float],
                        traffic: CommLedger,
                        selected: Sequence[int] = (),
                        alpha_increases: int = 0,
                        alpha_clamps: int = 0) -> "RoundRecord":
        accs = {int(i): float(per_client_test_acc[i]) for i in sorted(per_client_test_acc)}
        return cls(
            round=round_index,
            per_client_test_acc=accs,
            mean_personalized_acc=mean_accuracy(accs),
            per_client_train_loss={int(i): float(per_client_train_loss[i]) for i in sorted(per_client_train_loss)},
            traffic=traffic,
            selected=tuple(selected),
            alpha_increases=alpha_increases,
            alpha_clamps=alpha_clamps,
        )

    def accuracy_stats(self) -> Tuple[float, float, float, float]:
        """(moyenne, écart-type population, min, max) des précisions"""
        values = np.array([self.per_client_test_acc[i] for i in sorted(self.per_client_test_acc)])
        return self.mean_personalized_acc, float(values.std()), float(values.min()), float(values.max())


def mean_accuracy(per_client_acc: Mapping[int, float]) -> float:
    """Moyenne non pondérée sur tous les clients"""
    if not per_client_acc:
        raise ValueError("aucune précision client")
    return float(np.mean([per_client_acc[i] for i in sorted(per_client_acc)]))


def individual_gain(per_client_acc: Mapping[int, float],
                    local_baseline_acc: Mapping[int, float]) -> Tuple[float, float, Dict[int, float]]:
    """Gain par client sur l'entraînement local, en points de pourcentage"""
    if set(per_client_acc) != set(local_baseline_acc):
        missing = sorted(set(per_client_acc) ^ set(local_baseline_acc))
        raise KeyError(f"ensembles de clients différents: {missing}")
    if not per_client_acc:
        raise ValueError("aucun client")
    gains = {i: 100.0 * (per_client_acc[i] - local_baseline_acc[i]) for i in sorted(per_client_acc)}
    values = np.array(list(gains.values()))
    return float(values.mean()), float(values.std()), gains


def rounds_to_threshold(history: Sequence[RoundRecord], threshold: float) -> Optional[int]:
    """Premier round (1-based) où la précision moyenne atteint le seuil"""
    for record in history:
        if record.mean_personalized_acc >= threshold:
            return record.round
    return None


def metrics_frame(history: Sequence[RoundRecord]) -> pd.DataFrame:
    """Table des métriques de rounds (trafic cumulé)"""
    rows = []
    for record in history:
        mean, std, low, high = record.accuracy_stats()
        rows.append([
            record.round, mean, std, low, high,
            record.traffic.model_units_down, record.traffic.model_units_up,
            record.traffic.scalar_units_down, record.traffic.scalar_units_up,
        ])
    return pd.DataFrame(rows, columns=METRICS_COLUMNS)


def summarize_seeds(values: Sequence[float]) -> Tuple[float, float]:
    """Moyenne et écart-type population sur les graines"""
    if not values:
        raise ValueError("aucune valeur à résumer")
    array = np.asarray(values, dtype=np.float64)
    return float(array.mean()), float(array.std())
