"""
État de la fédération et calculs côté serveur
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.errors import NonFiniteError
from core.numerics import ParamVector, SeededRng, dot, weighted_sum
from generators.dataset import ClientDataset


@dataclass(frozen=True)
class FederationConfig:
    """Paramètres du protocole fédéré"""
    algorithm: str
    n_clients: int = 20
    sample_rate: float = 0.25
    rounds: int = 300
    local_epochs: int = 5
    batch_size: int = 32
    eta1: float = 0.01
    eta2: float = 0.01
    mu: float = 0.01
    beta: float = 0.5
    momentum: float = 0.9
    seed: int = 0

    @property
    def clients_per_round(self) -> int:
        """M = round(sample_rate·N), arrondi au plus proche (demi vers le haut)"""
        return int(math.floor(self.sample_rate * self.n_clients + 0.5))

    def validate(self) -> List[Tuple[str, str]]:
        """Liste des violations (clé, contrainte)"""
        errors = []
        if self.n_clients < 2:
            errors.append(("n_clients", "n_clients >= 2"))
        if not 0.0 < self.sample_rate <= 1.0:
            errors.append(("sample_rate", "sample_rate in (0,1]"))
        elif self.clients_per_round < 1:
            errors.append(("sample_rate", "round(sample_rate*n_clients) >= 1"))
        if self.rounds < 1:
            errors.append(("rounds", "rounds >= 1"))
        if self.local_epochs < 1:
            errors.append(("local_epochs", "local_epochs >= 1"))
        if self.batch_size < 1:
            errors.append(("batch_size", "batch_size >= 1"))
        if not self.eta1 >= 0:
            errors.append(("eta1", "eta1 >= 0"))
        if not self.eta2 >= 0:
            errors.append(("eta2", "eta2 >= 0"))
        if not self.mu >= 0:
            errors.append(("mu", "mu >= 0"))
        if not 0.0 <= self.beta < 1.0:
            errors.append(("beta", "beta in [0,1)"))
        if not 0.0 <= self.momentum < 1.0:
            errors.append(("momentum", "momentum in [0,1)"))
        return errors


@dataclass
class ClientState:
    """État d'un client: modèle personnel θᵢ, ligne αᵢ, g̃ᵢ retenu"""
    client_id: int
    theta: ParamVector
    alpha_row: Dict[int, float]
    data: ClientDataset
    aux_grad: Optional[ParamVector] = None


@dataclass(frozen=True)
class ServerState:
    """État du serveur: θ_glob, matrice A, cartes du round précédent"""
    theta_glob: ParamVector
    A: np.ndarray
    prev_grads: Dict[int, ParamVector] = field(default_factory=dict)
    prev_g1: Dict[int, float] = field(default_factory=dict)
    prev_selected: Tuple[int, ...] = ()
    round: int = 0

    def alpha_row(self, client_id: int, keys: Sequence[int]) -> Dict[int, float]:
        return {j: float(self.A[client_id, j]) for j in keys}


@dataclass(frozen=True)
class SelectionPlan:
    round: int
    selected: Tuple[int, ...]


@dataclass(frozen=True)
class ClientRequest:
    """Ce qu'un client sélectionné reçoit pour un round"""
    round: int
    client: ClientState
    rng: SeededRng
    theta_glob: Optional[ParamVector] = None
    g_tilde: Optional[ParamVector] = None
    g_bar: Optional[ParamVector] = None
    g2_const: Optional[float] = None
    g1_map: Optional[Dict[int, float]] = None


def initial_alpha(clients_per_round: int) -> float:
    return 1.0 / clients_per_round


def init_server_state(theta0: ParamVector, n_clients: int, clients_per_round: int) -> ServerState:
    """θ_glob⁰ et A rempli de 1/M"""
    A = np.full((n_clients, n_clients), initial_alpha(clients_per_round), dtype=np.float64)
    return ServerState(theta_glob=theta0.copy(), A=A)


def init_client_states(datasets: Sequence[ClientDataset],
                       theta0: ParamVector,
                       config: FederationConfig) -> Dict[int, ClientState]:
    M = config.clients_per_round
    states = {}
    for data in datasets:
        states[data.client_id] = ClientState(
            client_id=data.client_id,
            theta=theta0.copy(),
            alpha_row={j: initial_alpha(M) for j in range(config.n_clients)},
            data=data,
        )
    return states


def select_clients(seed: int, t: int, n_clients: int, clients_per_round: int) -> SelectionPlan:
    """Tirage uniforme sans remise de M clients, déterministe en (seed, t)"""
    if not 1 <= clients_per_round <= n_clients:
        raise ValueError(f"M doit être dans [1, N={n_clients}], reçu {clients_per_round}")
    rng = SeededRng(seed).fork("select", t)
    chosen = rng.sample_without_replacement(n_clients, clients_per_round)
    return SelectionPlan(round=t, selected=tuple(sorted(int(i) for i in chosen)))


def compute_aux_grad(alpha_row: Mapping[int, float],
                     grads: Mapping[int, ParamVector],
                     mu: float,
                     default_alpha: Optional[float] = None) -> ParamVector:
    """g̃ = μ·Σⱼ αᵢⱼ·∇fⱼ(θⱼ) sur les clients du round précédent"""
    if not grads:
        raise ValueError("compute_aux_grad: aucun gradient du round précédent")
    keys = sorted(grads)
    if default_alpha is None:
        default_alpha = 1.0 / len(keys)
    weights = [mu * alpha_row.get(j, default_alpha) for j in keys]
    return weighted_sum([grads[j] for j in keys], weights)


def compute_mean_grad(grads: Mapping[int, ParamVector], mu: float) -> ParamVector:
    """ḡ = (μ/M)·Σⱼ ∇fⱼ(θⱼ)"""
    if not grads:
        raise ValueError("compute_mean_grad: carte de gradients vide")
    keys = sorted(grads)
    weight = mu / len(keys)
    return weighted_sum([grads[j] for j in keys], [weight] * len(keys))


def aggregation_weights(n_trains: Sequence[int]) -> List[float]:
    """pᵢ = nᵢ / Σ nₖ sur les clients sélectionnés"""
    total = float(sum(n_trains))
    if total <= 0:
        raise ValueError("aggregate_global: tous les n_train sont nuls")
    return [n / total for n in n_trains]


def aggregate_global(clients: Sequence[Tuple[ParamVector, int]]) -> ParamVector:
    """θ_glob = Σ pᵢ θᵢ"""
    if not clients:
        raise ValueError("aggregate_global: aucun client")
    weights = aggregation_weights([n for _, n in clients])
    return weighted_sum([theta for theta, _ in clients], weights)


def g_alpha1(mu: float, f_value: float, grad: ParamVector, theta: ParamVector) -> float:
    """μ·(f(θ) − ∇f(θ)ᵀθ)"""
    if not (math.isfinite(mu) and math.isfinite(f_value)):
        raise NonFiniteError("g_alpha1", None, f_value if math.isfinite(mu) else mu)
    value = mu * (f_value - dot(grad, theta))
    if not math.isfinite(value):
        raise NonFiniteError("g_alpha1", None, value)
    return value
