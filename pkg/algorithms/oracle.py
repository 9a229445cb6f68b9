"""
Oracle de personnalisation explicite (vrais risques non locaux)

Fᵢ(θ) = fᵢ(θ) + μ/(N−1)·Σ_{j≠i} fⱼ(θ), minimisé par S pas de gradient plein
depuis un point de départ commun. Coût O(N²): simulation seulement.
"""
from typing import List, Sequence

from core.numerics import ParamVector, weighted_sum
from generators.dataset import Dataset
from models.classifiers import ModelSpec, risk_grad
from models.optimizer import OptimizerState, sgd_step
from algorithms.local_training import train_set


def explicit_objective_grad(index: int,
                            theta: ParamVector,
                            train_sets: Sequence[Dataset],
                            mu: float,
                            spec: ModelSpec) -> ParamVector:
    """∇fᵢ(θ) + μ/(N−1)·Σ_{j≠i} ∇fⱼ(θ), sommé par j croissant"""
    own = risk_grad(spec, theta, train_sets[index])
    n_clients = len(train_sets)
    if mu == 0 or n_clients < 2:
        return own
    weight = mu / (n_clients - 1)
    others = [j for j in range(n_clients) if j != index]
    vectors = [own] + [risk_grad(spec, theta, train_sets[j]) for j in others]
    return weighted_sum(vectors, [1.0] + [weight] * len(others))


def explicit_oracle_trajectories(clients: Sequence,
                                 theta_start: ParamVector,
                                 mu: float,
                                 steps: int,
                                 lr: float,
                                 spec: ModelSpec) -> List[List[ParamVector]]:
    """Trajectoire (S+1 points) de chaque client, point de départ inclus"""
    if steps < 0:
        raise ValueError(f"steps doit être >= 0, reçu {steps}")
    train_sets = [train_set(client) for client in clients]
    trajectories = []
    for index in range(len(train_sets)):
        # momentum nul: même pas que le fine-tuning plein batch
        state = OptimizerState.fresh(theta_start.shape[0], 0.0, lr)
        current = theta_start.copy()
        path = [current]
        for _ in range(steps):
            grad = explicit_objective_grad(index, current, train_sets, mu, spec)
            current, state = sgd_step(state, current, grad)
            path.append(current)
        trajectories.append(path)
    return trajectories


def explicit_oracle_personalize(clients: Sequence,
                                theta_start: ParamVector,
                                mu: float,
                                steps: int,
                                lr: float,
                                spec: ModelSpec) -> List[ParamVector]:
    """Modèle personnalisé de chaque client après S pas"""
    return [path[-1] for path in explicit_oracle_trajectories(clients, theta_start, mu, steps, lr, spec)]
