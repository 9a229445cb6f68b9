"""
Génération de données synthétiques (nuages gaussiens par classe)
"""
import numpy as np

from core.errors import DatasetError
from core.numerics import SeededRng
from generators.dataset import Dataset


def class_means(n_classes: int, n_features: int, class_separation: float, seed: int) -> np.ndarray:
    """Centres de classe à distance ``class_separation`` de l'origine

    Les directions sont orthonormées tant que n_classes <= n_features,
    sinon simplement normalisées.
    """
    rng = SeededRng(seed).fork("class-means")
    raw = rng.normal(size=(n_features, n_classes))
    if n_classes <= n_features:
        directions, _ = np.linalg.qr(raw)
        directions = directions[:, :n_classes]
    else:
        norms = np.linalg.norm(raw, axis=0)
        norms[norms == 0.0] = 1.0
        directions = raw / norms
    return class_separation * directions.T


def synth_blobs(n_classes: int,
                n_features: int,
                n_samples: int,
                class_separation: float,
                seed: int) -> Dataset:
    """Nuages gaussiens isotropes de variance unité, classes équilibrées (±1)"""
    if n_classes < 2:
        raise DatasetError(f"n_classes doit être >= 2, reçu {n_classes}")
    if n_features < 1:
        raise DatasetError(f"n_features doit être >= 1, reçu {n_features}")
    if n_samples < n_classes:
        raise DatasetError(f"n_samples ({n_samples}) doit être >= n_classes ({n_classes})")
    if not np.isfinite(class_separation) or class_separation < 0:
        raise DatasetError(f"class_separation doit être fini et >= 0, reçu {class_separation}")

    means = class_means(n_classes, n_features, class_separation, seed)

    base, remainder = divmod(n_samples, n_classes)
    counts = [base + (1 if c < remainder else 0) for c in range(n_classes)]
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), counts)

    rng = SeededRng(seed).fork("samples")
    noise = rng.normal(size=(n_samples, n_features))
    features = means[labels] + noise

    order = rng.permutation(n_samples)
    return Dataset(features[order], labels[order], n_classes)
