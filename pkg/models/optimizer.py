"""
Optimiseur local SGD avec momentum (heavy-ball)
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from core.errors import DimensionMismatchError
from core.numerics import ParamVector, check_finite, check_same_dim


@dataclass(frozen=True)
class OptimizerState:
    """État de l'optimiseur d'un client (jamais partagé)"""
    velocity: ParamVector
    momentum: float = 0.9
    lr: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum doit être dans [0,1), reçu {self.momentum}")
        if not self.lr >= 0.0:
            raise ValueError(f"lr doit être >= 0, reçu {self.lr}")

    @classmethod
    def fresh(cls, dim: int, momentum: float, lr: float) -> "OptimizerState":
        return cls(np.zeros(dim, dtype=np.float64), momentum, lr)


def sgd_step(state: OptimizerState, params: ParamVector, grad: ParamVector) -> Tuple[ParamVector, OptimizerState]:
    """velocity' = momentum·velocity + grad ; params' = params − lr·velocity'"""
    check_same_dim(params, grad, "sgd_step")
    if state.velocity.shape != params.shape:
        raise DimensionMismatchError(params.shape[0], state.velocity.shape[0], "vitesse")
    check_finite(grad, "gradient")

    velocity = state.momentum * state.velocity + grad
    new_params = params - state.lr * velocity
    check_finite(new_params, "paramètres")
    return new_params, replace(state, velocity=velocity)
