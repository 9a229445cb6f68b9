"""
Lecture de jeux de données CSV externes
"""
import os
from typing import Optional

import numpy as np
import pandas as pd

from core.errors import DatasetError
from core.numerics import SeededRng
from generators.dataset import Dataset


def load_csv(path: str,
             label_column: str,
             test_fraction: Optional[float] = None,
             seed: int = 0,
             n_classes: Optional[int] = None) -> Dataset:
    """Charger un CSV (en-tête en première ligne, UTF-8) en ``Dataset``

    Les numéros de ligne des diagnostics comptent les lignes de données à
    partir de 1 (l'en-tête n'est pas compté). ``test_fraction`` est seulement
    validé ici: le découpage train/test est fait par la partition.
    """
    if test_fraction is not None and not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction doit être dans (0,1), reçu {test_fraction}")
    if not os.path.exists(path):
        raise DatasetError(f"fichier introuvable: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DatasetError("empty dataset")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"CSV illisible: {e}")

    if frame.shape[0] == 0:
        raise DatasetError("empty dataset")
    if label_column not in frame.columns:
        raise DatasetError("colonne de label absente", column=label_column)

    feature_columns = [c for c in frame.columns if c != label_column]
    if not feature_columns:
        raise DatasetError("aucune colonne de feature")

    labels = np.zeros(frame.shape[0], dtype=np.int64)
    for row, raw in enumerate(frame[label_column], start=1):
        try:
            value = float(raw)
        except ValueError:
            raise DatasetError(f"label non numérique '{raw}'", row=row, column=label_column)
        if not np.isfinite(value) or value != int(value):
            raise DatasetError(f"label non entier '{raw}'", row=row, column=label_column)
        labels[row - 1] = int(value)

    features = np.zeros((frame.shape[0], len(feature_columns)), dtype=np.float64)
    for col_index, column in enumerate(feature_columns):
        parsed = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(np.isnan(parsed))
        if bad.size:
            row = int(bad[0])
            raw = frame[column].iloc[row]
            if raw.strip().lower() in ("nan", "inf", "-inf", "+inf", "infinity", "-infinity"):
                raise DatasetError(f"feature non finie '{raw}'", row=row + 1, column=column)
            raise DatasetError(f"valeur non numérique '{raw}'", row=row + 1, column=column)
        if not np.isfinite(parsed).all():
            row = int(np.flatnonzero(~np.isfinite(parsed))[0])
            raise DatasetError(f"feature non finie '{frame[column].iloc[row]}'", row=row + 1, column=column)
        features[:, col_index] = parsed

    if labels.min() < 0:
        row = int(np.flatnonzero(labels < 0)[0])
        raise DatasetError(f"label négatif {labels[row]}", row=row + 1, column=label_column)
    if n_classes is None:
        n_classes = max(2, int(labels.max()) + 1)
    elif labels.max() >= n_classes:
        row = int(np.flatnonzero(labels >= n_classes)[0])
        raise DatasetError(
            f"label {labels[row]} hors de [0, {n_classes})", row=row + 1, column=label_column
        )

    order = SeededRng(seed).fork("csv-shuffle").permutation(labels.size)
    return Dataset(features[order], labels[order], n_classes)
