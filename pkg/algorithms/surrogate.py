"""
Surrogate de Taylor du premier ordre des risques non locaux

Outils de test et de diagnostic: le chemin de production ne matérialise
jamais d'ancre par paire (i, j).
"""
from typing import Callable, Dict, Mapping, NamedTuple

from core.numerics import ParamVector, check_same_dim, dot
from generators.dataset import Dataset
from models.classifiers import ModelSpec, risk, risk_and_grad


class Anchor(NamedTuple):
    """Point d'expansion d'un client j: (fⱼ(θⱼ), ∇fⱼ(θⱼ), θⱼ)"""
    f_value: float
    grad: ParamVector
    theta: ParamVector


def make_anchor(spec: ModelSpec, theta: ParamVector, data: Dataset) -> Anchor:
    f_value, grad = risk_and_grad(spec, theta, data)
    return Anchor(f_value, grad, theta.copy())


def linearized_risk(anchor: Anchor, theta: ParamVector) -> float:
    """fⱼ(θⱼ) + ∇fⱼ(θⱼ)ᵀ(θ − θⱼ)"""
    check_same_dim(anchor.theta, theta, "linearized_risk")
    return anchor.f_value + dot(anchor.grad, theta - anchor.theta)


def surrogate_objective(theta: ParamVector,
                        local_risk: Callable[[ParamVector], float],
                        alpha_row: Mapping[int, float],
                        anchors: Mapping[int, Anchor],
                        mu: float) -> float:
    """fᵢ(θ) + μ·Σⱼ αᵢⱼ·(fⱼ(θⱼ) + ∇fⱼ(θⱼ)ᵀ(θ − θⱼ))"""
    value = local_risk(theta)
    if mu == 0:
        return value
    auxiliary = 0.0
    for j in sorted(anchors):
        auxiliary += alpha_row[j] * linearized_risk(anchors[j], theta)
    return value + mu * auxiliary


def alpha_gradient_split(mu: float, anchor: Anchor, theta: ParamVector) -> float:
    """g_α⁽¹⁾ + μ·∇fⱼ(θⱼ)ᵀθᵢ, la forme découpée envoyée sur le réseau"""
    g1 = mu * (anchor.f_value - dot(anchor.grad, anchor.theta))
    return g1 + dot(mu * anchor.grad, theta)


def exact_alpha_provider(spec: ModelSpec,
                         train_sets: Mapping[int, Dataset],
                         mu: float) -> Callable[[ParamVector, Mapping[int, float]], Dict[int, float]]:
    """Gradient α exact μ·fⱼ(θᵢ) (vrai risque, sans approximation)

    Coût O(N) évaluations de risque par batch: réservé aux tests.
    """
    def provider(theta: ParamVector, g1_map: Mapping[int, float]) -> Dict[int, float]:
        return {j: mu * risk(spec, theta, train_sets[j]) for j in sorted(g1_map)}

    return provider
