"""
Modèles différentiables et optimiseur local
"""
from .classifiers import (
    MLP_1HIDDEN, MODEL_KINDS, SOFTMAX_LINEAR, Batch, ModelSpec, accuracy,
    init_params, predict_logits, risk, risk_and_grad, risk_grad,
)
from .optimizer import OptimizerState, sgd_step

__all__ = [
    "MLP_1HIDDEN", "MODEL_KINDS", "SOFTMAX_LINEAR", "Batch", "ModelSpec", "accuracy",
    "init_params", "predict_logits", "risk", "risk_and_grad", "risk_grad",
    "OptimizerState", "sgd_step",
]
