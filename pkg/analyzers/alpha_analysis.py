"""
Analyse de l'évolution de la matrice A
"""
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class AlphaAnalytics:
    """ΔA, moyennes de colonnes/lignes et corrélations avec n_train"""
    delta_A: np.ndarray
    col_means: np.ndarray
    row_means: np.ndarray
    corr_col_vs_n: Optional[float]
    corr_row_vs_n: Optional[float]

    def to_dict(self) -> dict:
        return {
            "col_means": [float(v) for v in self.col_means],
            "row_means": [float(v) for v in self.row_means],
            "corr_col_vs_n": self.corr_col_vs_n,
            "corr_row_vs_n": self.corr_row_vs_n,
        }


def pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Corrélation de Pearson; None si une variance est nulle"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return None
    value = float(np.corrcoef(x, y)[0, 1])
    return value if np.isfinite(value) else None


def alpha_analytics(A_initial: np.ndarray, A_final: np.ndarray, n_train: Mapping[int, int]) -> AlphaAnalytics:
    A_initial = np.asarray(A_initial, dtype=np.float64)
    A_final = np.asarray(A_final, dtype=np.float64)
    if A_initial.ndim != 2 or A_initial.shape[0] != A_initial.shape[1]:
        raise ValueError(f"matrice carrée attendue, reçu {A_initial.shape}")
    if A_initial.shape != A_final.shape:
        raise ValueError(f"formes différentes: {A_initial.shape} vs {A_final.shape}")
    n_clients = A_initial.shape[0]
    if sorted(n_train) != list(range(n_clients)):
        raise ValueError("n_train doit couvrir les clients 0..N-1")

    delta = A_final - A_initial
    col_means = delta.mean(axis=0)
    row_means = delta.mean(axis=1)
    sizes = np.array([n_train[i] for i in range(n_clients)], dtype=np.float64)
    return AlphaAnalytics(
        delta_A=delta,
        col_means=col_means,
        row_means=row_means,
        corr_col_vs_n=pearson(col_means, sizes),
        corr_row_vs_n=pearson(row_means, sizes),
    )


def alpha_frame(A: np.ndarray) -> pd.DataFrame:
    """Matrice dense en table (ligne i, colonnes j)"""
    A = np.asarray(A, dtype=np.float64)
    frame = pd.DataFrame(A, columns=[str(j) for j in range(A.shape[1])])
    frame.index.name = "client_id"
    return frame


def export_alpha(A: np.ndarray, path: str):
    alpha_frame(A).to_csv(path, float_format="%.17g")
