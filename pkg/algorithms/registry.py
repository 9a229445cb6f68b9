"""
Stratégies d'algorithme, sélectionnées par tag de configuration
"""
from typing import Dict, Optional, Type

from core.federation import ClientRequest, ClientState, FederationConfig, ServerState
from core.numerics import ParamVector, SeededRng
from models.classifiers import ModelSpec
from algorithms.local_training import client_update_fedavg, fine_tune, run_local_sgd, train_set
from algorithms.oracle import explicit_oracle_personalize
from algorithms.pgfed import (
    AlphaGradient, ClientUpdatePayload, client_update_first_round,
    client_update_pgfed, client_update_pgfed_ce,
)

LOCAL = "local"
FEDAVG = "fedavg"
FEDAVG_FINETUNE = "fedavg_finetune"
EXPLICIT_ORACLE = "explicit_oracle"
PGFED = "pgfed"
PGFEDMO = "pgfedmo"
PGFED_CE = "pgfed_ce"

ALGORITHM_TAGS = (LOCAL, FEDAVG, FEDAVG_FINETUNE, EXPLICIT_ORACLE, PGFED, PGFEDMO, PGFED_CE)
PGFED_FAMILY = (PGFED, PGFEDMO, PGFED_CE)


class Algorithm:
    """Comportement client et serveur d'un algorithme

    Attributs de classe lus par le moteur:
    - ``downloads_global``: θ_glob est envoyé aux clients sélectionnés
    - ``trains_global``: θ_glob est agrégé à partir des clients sélectionnés
    - ``uses_protocol``: g̃, ḡ/g⁽²⁾ et la carte g⁽¹⁾ circulent à partir de t = 2
    - ``server_side_g2``: g⁽²⁾ = ḡᵀθ_glob est calculé au serveur
    """
    tag = ""
    downloads_global = True
    trains_global = True
    uses_protocol = False
    server_side_g2 = False

    def __init__(self, spec: ModelSpec, config: FederationConfig):
        self.spec = spec
        self.config = config

    def client_update(self, request: ClientRequest) -> ClientUpdatePayload:
        raise NotImplementedError

    def upload_items(self, payload: ClientUpdatePayload) -> Dict[str, object]:
        """Objets réellement envoyés au serveur"""
        return {"theta": payload.theta}

    def personalized_models(self, server: ServerState,
                            clients: Dict[int, ClientState],
                            t: int) -> Dict[int, ParamVector]:
        """Modèle évalué pour chaque client en fin de round"""
        return {i: client.theta for i, client in clients.items()}


class LocalAlgorithm(Algorithm):
    """Entraînement isolé: aucun échange, θᵢ continue depuis lui-même"""
    tag = LOCAL
    downloads_global = False
    trains_global = False

    def client_update(self, request):
        client = request.client
        theta, _ = run_local_sgd(self.spec, client.theta, train_set(client), self.config.local_epochs,
                                 self.config.batch_size, self.config.eta1, self.config.momentum, request.rng)
        return ClientUpdatePayload(theta=theta, alpha_row=dict(client.alpha_row),
                                   retained_aux_grad=client.aux_grad)

    def upload_items(self, payload):
        return {}


class FedAvgAlgorithm(Algorithm):
    """FedAvg; chaque client est évalué avec le dernier modèle qu'il a entraîné"""
    tag = FEDAVG

    def client_update(self, request):
        client = request.client
        theta = client_update_fedavg(client, request.theta_glob, self.config, self.spec, request.rng)
        return ClientUpdatePayload(theta=theta, alpha_row=dict(client.alpha_row),
                                   retained_aux_grad=client.aux_grad)


class FedAvgFineTuneAlgorithm(FedAvgAlgorithm):
    """FedAvg dont le modèle global est affiné localement à chaque évaluation"""
    tag = FEDAVG_FINETUNE

    def __init__(self, spec, config, finetune_epochs: int = 1):
        super().__init__(spec, config)
        self.finetune_epochs = finetune_epochs

    def personalized_models(self, server, clients, t):
        base = SeededRng(self.config.seed)
        return {
            i: fine_tune(server.theta_glob, client, self.finetune_epochs, self.config.eta1, self.spec,
                         momentum=self.config.momentum, batch_size=self.config.batch_size,
                         rng=base.fork("finetune", t, i))
            for i, client in clients.items()
        }


class ExplicitOracleAlgorithm(FedAvgAlgorithm):
    """FedAvg personnalisé à l'évaluation par l'oracle explicite (hors ledger)"""
    tag = EXPLICIT_ORACLE

    def __init__(self, spec, config, oracle_steps: int = 6, oracle_mu: float = 1.0, oracle_lr: float = 0.1):
        super().__init__(spec, config)
        self.oracle_steps = oracle_steps
        self.oracle_mu = oracle_mu
        self.oracle_lr = oracle_lr

    def personalized_models(self, server, clients, t):
        ids = sorted(clients)
        models = explicit_oracle_personalize([clients[i] for i in ids], server.theta_glob,
                                             self.oracle_mu, self.oracle_steps, self.oracle_lr, self.spec)
        return dict(zip(ids, models))


class PGFedAlgorithm(Algorithm):
    tag = PGFED
    uses_protocol = True
    with_momentum = False

    def __init__(self, spec, config, alpha_gradient: Optional[AlphaGradient] = None):
        super().__init__(spec, config)
        self.alpha_gradient = alpha_gradient

    def client_update(self, request):
        if request.round == 1:
            return client_update_first_round(request.client, request.theta_glob, self.config,
                                             self.spec, request.rng)
        return client_update_pgfed(request.client, request.theta_glob, request.g_tilde, request.g_bar,
                                   request.g1_map, self.config, self.spec, request.rng,
                                   with_momentum=self.with_momentum, alpha_gradient=self.alpha_gradient)

    def upload_items(self, payload):
        return {
            "theta": payload.theta,
            "full_grad": payload.full_grad,
            "g_alpha1": payload.g_alpha1,
            "alpha": {j: payload.alpha_row[j] for j in payload.touched_alpha},
        }


class PGFedMoAlgorithm(PGFedAlgorithm):
    tag = PGFEDMO
    with_momentum = True


class PGFedCEAlgorithm(PGFedAlgorithm):
    tag = PGFED_CE
    server_side_g2 = True

    def client_update(self, request):
        if request.round == 1:
            return client_update_first_round(request.client, request.theta_glob, self.config,
                                             self.spec, request.rng)
        return client_update_pgfed_ce(request.client, request.theta_glob, request.g_tilde, request.g2_const,
                                      request.g1_map, self.config, self.spec, request.rng,
                                      alpha_gradient=self.alpha_gradient)


ALGORITHMS: Dict[str, Type[Algorithm]] = {
    LOCAL: LocalAlgorithm,
    FEDAVG: FedAvgAlgorithm,
    FEDAVG_FINETUNE: FedAvgFineTuneAlgorithm,
    EXPLICIT_ORACLE: ExplicitOracleAlgorithm,
    PGFED: PGFedAlgorithm,
    PGFEDMO: PGFedMoAlgorithm,
    PGFED_CE: PGFedCEAlgorithm,
}


def build_algorithm(tag: str, spec: ModelSpec, config: FederationConfig, **options) -> Algorithm:
    """Instancier la stratégie d'un tag; les options inconnues du tag sont ignorées"""
    if tag not in ALGORITHMS:
        raise ValueError(f"algorithme inconnu '{tag}', attendu {ALGORITHM_TAGS}")
    cls = ALGORITHMS[tag]
    accepted = {
        FEDAVG_FINETUNE: ("finetune_epochs",),
        EXPLICIT_ORACLE: ("oracle_steps", "oracle_mu", "oracle_lr"),
        PGFED: ("alpha_gradient",),
        PGFEDMO: ("alpha_gradient",),
        PGFED_CE: ("alpha_gradient",),
    }.get(tag, ())
    kwargs = {key: value for key, value in options.items() if key in accepted and value is not None}
    return cls(spec, config, **kwargs)
