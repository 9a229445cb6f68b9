"""
Mises à jour client de la famille PGFed (PGFed, PGFedMo, PGFed-CE)
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

from core.errors import NonFiniteError
from core.federation import ClientState, FederationConfig, g_alpha1, initial_alpha
from core.numerics import ParamVector, SeededRng, axpy, dot
from models.classifiers import ModelSpec, risk_and_grad
from algorithms.local_training import run_local_sgd, train_set
from utils.log import get_logger

logger = get_logger(__name__)

AlphaGradient = Callable[[ParamVector, Mapping[int, float]], Dict[int, float]]


@dataclass(frozen=True)
class ClientUpdatePayload:
    """Retour d'une mise à jour client: θᵢ, g_α⁽¹⁾, ∇f(θᵢ), αᵢ

    ``retained_aux_grad`` reste chez le client (jamais envoyé);
    ``touched_alpha`` liste les entrées α modifiées pendant le round.
    """
    theta: ParamVector
    g_alpha1: float = 0.0
    full_grad: Optional[ParamVector] = None
    alpha_row: Dict[int, float] = field(default_factory=dict)
    retained_aux_grad: Optional[ParamVector] = None
    touched_alpha: Tuple[int, ...] = ()
    alpha_increases: int = 0
    alpha_clamps: int = 0


def momentum_aux_grad(downloaded: ParamVector, retained: Optional[ParamVector], beta: float) -> ParamVector:
    """g̃ᵢ ← (1−β)·g̃ + β·g̃ᵢ_prev ; sans g̃ᵢ_prev, g̃ tel quel"""
    if retained is None:
        return downloaded.copy()
    return axpy(beta, retained, (1.0 - beta) * downloaded)


def _anchor_payload(spec: ModelSpec, client, theta: ParamVector, mu: float):
    """∇f et g_α⁽¹⁾ sur tout le jeu d'entraînement, en fin de round"""
    f_value, full_grad = risk_and_grad(spec, theta, train_set(client))
    return full_grad, g_alpha1(mu, f_value, full_grad, theta)


def client_update_first_round(client: ClientState,
                              theta_glob: ParamVector,
                              config: FederationConfig,
                              spec: ModelSpec,
                              rng: SeededRng) -> ClientUpdatePayload:
    """Round 1: mise à jour FedAvg, puis ancre; α inchangé"""
    theta, _ = run_local_sgd(spec, theta_glob, train_set(client), config.local_epochs,
                             config.batch_size, config.eta1, config.momentum, rng)
    full_grad, g1 = _anchor_payload(spec, client, theta, config.mu)
    return ClientUpdatePayload(
        theta=theta,
        g_alpha1=g1,
        full_grad=full_grad,
        alpha_row=dict(client.alpha_row),
        retained_aux_grad=client.aux_grad,
    )


def _pgfed_update(client: ClientState,
                  theta_glob: ParamVector,
                  g_tilde: ParamVector,
                  g1_map: Mapping[int, float],
                  g2_of: Callable[[ParamVector], float],
                  config: FederationConfig,
                  spec: ModelSpec,
                  rng: SeededRng,
                  with_momentum: bool,
                  alpha_gradient: Optional[AlphaGradient]) -> ClientUpdatePayload:
    if with_momentum:
        if client.aux_grad is None:
            logger.debug(f"Client {client.client_id}: première sélection, g̃ utilisé sans momentum")
        aux = momentum_aux_grad(g_tilde, client.aux_grad, config.beta)
    else:
        aux = g_tilde

    default = initial_alpha(config.clients_per_round)
    alpha = dict(client.alpha_row)
    keys = sorted(g1_map)
    counters = {"increases": 0, "clamps": 0}

    def update_alpha(theta: ParamVector):
        if alpha_gradient is not None:
            grads = alpha_gradient(theta, g1_map)
        else:
            g2 = g2_of(theta)
            grads = {j: g1_map[j] + g2 for j in keys}
        for j in keys:
            previous = alpha.get(j, default)
            value = previous - config.eta2 * grads[j]
            if not math.isfinite(value):
                raise NonFiniteError(f"alpha[{client.client_id}][{j}]", None, value)
            if value < 0.0:
                value = 0.0
                counters["clamps"] += 1
            if value > previous:
                counters["increases"] += 1
            alpha[j] = value

    theta, _ = run_local_sgd(spec, theta_glob, train_set(client), config.local_epochs,
                             config.batch_size, config.eta1, config.momentum, rng,
                             extra_grad=aux, after_step=update_alpha)
    if counters["clamps"]:
        logger.debug(f"Client {client.client_id}: {counters['clamps']} α ramené(s) à 0")

    full_grad, g1 = _anchor_payload(spec, client, theta, config.mu)
    return ClientUpdatePayload(
        theta=theta,
        g_alpha1=g1,
        full_grad=full_grad,
        alpha_row=alpha,
        retained_aux_grad=aux,
        touched_alpha=tuple(keys),
        alpha_increases=counters["increases"],
        alpha_clamps=counters["clamps"],
    )


def _require(value, name: str, client: ClientState):
    if value is None:
        raise ValueError(f"client {client.client_id}: {name} manquant pour t > 1")
    return value


def client_update_pgfed(client: ClientState,
                        theta_glob: ParamVector,
                        g_tilde: Optional[ParamVector],
                        g_bar: Optional[ParamVector],
                        g1_map: Optional[Mapping[int, float]],
                        config: FederationConfig,
                        spec: ModelSpec,
                        rng: SeededRng,
                        with_momentum: bool = False,
                        alpha_gradient: Optional[AlphaGradient] = None) -> ClientUpdatePayload:
    """Mise à jour PGFed/PGFedMo d'un client sélectionné (t > 1)

    Par batch: pas θ avec ∇f(θ,ℬ)+g̃ᵢ, puis g⁽²⁾ = ḡᵀθ et
    αᵢⱼ ← max(0, αᵢⱼ − η₂·(g1_map[j] + g⁽²⁾)) pour chaque j.
    ``alpha_gradient`` remplace ce gradient approché (mode de test exact).
    """
    g_tilde = _require(g_tilde, "g̃", client)
    g_bar = _require(g_bar, "ḡ", client)
    g1_map = _require(g1_map, "g⁽¹⁾", client)
    return _pgfed_update(client, theta_glob, g_tilde, g1_map, lambda theta: dot(g_bar, theta),
                         config, spec, rng, with_momentum, alpha_gradient)


def client_update_pgfed_ce(client: ClientState,
                           theta_glob: ParamVector,
                           g_tilde: Optional[ParamVector],
                           g2_const: Optional[float],
                           g1_map: Optional[Mapping[int, float]],
                           config: FederationConfig,
                           spec: ModelSpec,
                           rng: SeededRng,
                           alpha_gradient: Optional[AlphaGradient] = None) -> ClientUpdatePayload:
    """Variante PGFed-CE: g⁽²⁾ = ḡᵀθ_glob calculé au serveur, constant sur le round"""
    g_tilde = _require(g_tilde, "g̃", client)
    g2_const = float(_require(g2_const, "g⁽²⁾", client))
    g1_map = _require(g1_map, "g⁽¹⁾", client)
    return _pgfed_update(client, theta_glob, g_tilde, g1_map, lambda theta: g2_const,
                         config, spec, rng, False, alpha_gradient)
