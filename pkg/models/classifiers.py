"""
Modèles différentiables à gradient analytique

Les paramètres sont un ``ParamVector`` plat; les biais y sont repliés
(dernière ligne de chaque matrice affine), de sorte que tout produit
scalaire de protocole couvre chaque coordonnée entraînable.

Disposition:
- softmax-linear: W de forme (n_features+1, C)
- mlp-1hidden:    W1 (n_features+1, H) puis W2 (H+1, C), activation tanh
"""
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from core.errors import DatasetError, DimensionMismatchError
from core.numerics import ParamVector, SeededRng

SOFTMAX_LINEAR = "softmax-linear"
MLP_1HIDDEN = "mlp-1hidden"
MODEL_KINDS = (SOFTMAX_LINEAR, MLP_1HIDDEN)


class Batch(NamedTuple):
    """Mini-batch sans validation (vues sur un Dataset déjà validé)"""
    features: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    """Architecture du modèle; la dimension d en est une fonction pure"""
    kind: str
    n_features: int
    n_classes: int
    hidden_dim: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind inconnu '{self.kind}', attendu {MODEL_KINDS}")
        if self.n_features < 1 or self.n_classes < 2:
            raise ValueError("n_features >= 1 et n_classes >= 2 requis")
        if self.kind == MLP_1HIDDEN and self.hidden_dim < 1:
            raise ValueError("hidden_dim >= 1 requis pour mlp-1hidden")
        if not self.l2 >= 0:
            raise ValueError(f"l2 doit être >= 0, reçu {self.l2}")

    @property
    def dim(self) -> int:
        if self.kind == SOFTMAX_LINEAR:
            return (self.n_features + 1) * self.n_classes
        return (self.n_features + 1) * self.hidden_dim + (self.hidden_dim + 1) * self.n_classes

    def unpack(self, params: ParamVector) -> Tuple[np.ndarray, ...]:
        """Vues matricielles sur le vecteur plat"""
        if params.ndim != 1 or params.shape[0] != self.dim:
            raise DimensionMismatchError(self.dim, params.shape[-1], "paramètres du modèle")
        if self.kind == SOFTMAX_LINEAR:
            return (params.reshape(self.n_features + 1, self.n_classes),)
        split = (self.n_features + 1) * self.hidden_dim
        w1 = params[:split].reshape(self.n_features + 1, self.hidden_dim)
        w2 = params[split:].reshape(self.hidden_dim + 1, self.n_classes)
        return w1, w2


def init_params(spec: ModelSpec, rng: SeededRng) -> ParamVector:
    """Initialisation: zéros pour le linéaire, Glorot-normal pour le MLP"""
    params = np.zeros(spec.dim, dtype=np.float64)
    if spec.kind == MLP_1HIDDEN:
        w1, w2 = spec.unpack(params)
        w1[:-1] = rng.normal(size=(spec.n_features, spec.hidden_dim),
                             scale=np.sqrt(2.0 / (spec.n_features + spec.hidden_dim)))
        w2[:-1] = rng.normal(size=(spec.hidden_dim, spec.n_classes),
                             scale=np.sqrt(2.0 / (spec.hidden_dim + spec.n_classes)))
    return params


def _check_batch(data) -> Tuple[np.ndarray, np.ndarray]:
    features = np.asarray(data.features, dtype=np.float64)
    labels = np.asarray(data.labels, dtype=np.int64)
    if labels.size == 0:
        raise DatasetError("batch vide")
    return features, labels


def _forward(spec: ModelSpec, params: ParamVector, features: np.ndarray):
    blocks = spec.unpack(params)
    if spec.kind == SOFTMAX_LINEAR:
        (w,) = blocks
        return features @ w[:-1] + w[-1], None
    w1, w2 = blocks
    hidden = np.tanh(features @ w1[:-1] + w1[-1])
    return hidden @ w2[:-1] + w2[-1], hidden


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def predict_logits(spec: ModelSpec, params: ParamVector, features: np.ndarray) -> np.ndarray:
    logits, _ = _forward(spec, params, np.asarray(features, dtype=np.float64))
    return logits


def risk(spec: ModelSpec, params: ParamVector, data) -> float:
    """Entropie croisée moyenne + (l2/2)·‖θ‖²"""
    features, labels = _check_batch(data)
    logits, _ = _forward(spec, params, features)
    log_probs = _log_softmax(logits)
    value = -float(np.mean(log_probs[np.arange(labels.size), labels]))
    if spec.l2 > 0:
        value += 0.5 * spec.l2 * float(np.dot(params, params))
    return value


def risk_and_grad(spec: ModelSpec, params: ParamVector, data) -> Tuple[float, ParamVector]:
    """Risque empirique et son gradient exact en une passe"""
    features, labels = _check_batch(data)
    n = labels.size
    logits, hidden = _forward(spec, params, features)
    log_probs = _log_softmax(logits)
    value = -float(np.mean(log_probs[np.arange(n), labels]))

    # dL/dlogits = (softmax - onehot) / n
    delta = np.exp(log_probs)
    delta[np.arange(n), labels] -= 1.0
    delta /= n

    grad = np.zeros(spec.dim, dtype=np.float64)
    if spec.kind == SOFTMAX_LINEAR:
        (gw,) = spec.unpack(grad)
        gw[:-1] = features.T @ delta
        gw[-1] = delta.sum(axis=0)
    else:
        _, w2 = spec.unpack(params)
        gw1, gw2 = spec.unpack(grad)
        gw2[:-1] = hidden.T @ delta
        gw2[-1] = delta.sum(axis=0)
        dz = (delta @ w2[:-1].T) * (1.0 - hidden ** 2)
        gw1[:-1] = features.T @ dz
        gw1[-1] = dz.sum(axis=0)

    if spec.l2 > 0:
        value += 0.5 * spec.l2 * float(np.dot(params, params))
        grad += spec.l2 * params
    return value, grad


def risk_grad(spec: ModelSpec, params: ParamVector, data) -> ParamVector:
    """Gradient analytique du risque sur les données fournies"""
    return risk_and_grad(spec, params, data)[1]


def accuracy(spec: ModelSpec, params: ParamVector, data) -> float:
    """Fraction de prédictions argmax correctes (égalités → plus petite classe)"""
    features, labels = _check_batch(data)
    logits, _ = _forward(spec, params, features)
    predictions = np.argmax(logits, axis=1)
    return float(np.mean(predictions == labels))
