"""
Boucle serveur: un round complet et la simulation sur T rounds
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Tuple

from analyzers.comm_ledger import CommLedger, LedgerHistory
from analyzers.round_metrics import RoundRecord
from core.errors import ClientUpdateError, PersoFedError
from core.federation import (
    ClientRequest, ClientState, FederationConfig, ServerState, aggregate_global,
    compute_aux_grad, compute_mean_grad, init_client_states, init_server_state,
    initial_alpha, select_clients,
)
from core.numerics import ParamVector, SeededRng, dot
from core.wire import Wire
from generators.dataset import ClientDataset
from models.classifiers import ModelSpec, accuracy, init_params, risk
from utils.log import get_logger

if TYPE_CHECKING:
    from algorithms.pgfed import ClientUpdatePayload
    from algorithms.registry import Algorithm

logger = get_logger(__name__)


@dataclass(frozen=True)
class RoundOutcome:
    server: ServerState
    record: RoundRecord
    traffic: CommLedger
    samples_processed: int


def _build_downloads(t: int, client_id: int, server: ServerState, algorithm: "Algorithm",
                     config: FederationConfig, g_bar: Optional[ParamVector]) -> Dict[str, object]:
    downloads: Dict[str, object] = {}
    if algorithm.downloads_global:
        downloads["theta_glob"] = server.theta_glob
    if algorithm.uses_protocol and t > 1:
        keys = sorted(server.prev_grads)
        downloads["g_tilde"] = compute_aux_grad(server.alpha_row(client_id, keys), server.prev_grads,
                                                config.mu, initial_alpha(config.clients_per_round))
        if algorithm.server_side_g2:
            downloads["g2_const"] = dot(g_bar, server.theta_glob)
        else:
            downloads["g_bar"] = g_bar
        downloads["g1_map"] = dict(server.prev_g1)
    return downloads


def _run_update(algorithm: "Algorithm", request: ClientRequest) -> "ClientUpdatePayload":
    try:
        return algorithm.client_update(request)
    except ClientUpdateError:
        raise
    except (PersoFedError, ValueError, ArithmeticError) as e:
        raise ClientUpdateError(request.client.client_id, request.round, e) from e


def evaluate_clients(spec: ModelSpec,
                     models: Dict[int, ParamVector],
                     clients: Dict[int, ClientState]) -> Tuple[Dict[int, float], Dict[int, float]]:
    """Précision test et risque d'entraînement de chaque modèle personnalisé"""
    accs, losses = {}, {}
    for i in sorted(clients):
        accs[i] = accuracy(spec, models[i], clients[i].data.test)
        losses[i] = risk(spec, models[i], clients[i].data.train)
    return accs, losses


def run_round(server: ServerState,
              clients: Dict[int, ClientState],
              config: FederationConfig,
              algorithm: "Algorithm",
              traffic_before: CommLedger = CommLedger(),
              max_workers: int = 1) -> RoundOutcome:
    """Exécuter le round t = server.round + 1; ``clients`` est mis à jour en place"""
    t = server.round + 1
    M = config.clients_per_round
    plan = select_clients(config.seed, t, config.n_clients, M)
    wire = Wire(server.theta_glob.shape[0])

    g_bar = None
    if algorithm.uses_protocol and t > 1:
        if set(server.prev_grads) != set(server.prev_selected):
            raise PersoFedError(f"round {t}: carte de gradients incohérente avec la sélection précédente")
        g_bar = compute_mean_grad(server.prev_grads, config.mu)

    base_rng = SeededRng(config.seed)
    requests = []
    for i in plan.selected:
        received = wire.download(_build_downloads(t, i, server, algorithm, config, g_bar))
        requests.append(ClientRequest(round=t, client=clients[i], rng=base_rng.fork("client", t, i), **received))

    if max_workers > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            payloads = list(pool.map(lambda request: _run_update(algorithm, request), requests))
    else:
        payloads = [_run_update(algorithm, request) for request in requests]

    A = server.A.copy()
    prev_grads: Dict[int, ParamVector] = {}
    prev_g1: Dict[int, float] = {}
    trained = []
    increases = clamps = samples = 0
    # application déterministe, par id croissant
    for i, payload in sorted(zip(plan.selected, payloads), key=lambda pair: pair[0]):
        uploaded = wire.upload(algorithm.upload_items(payload))
        client = clients[i]
        clients[i] = replace(client, theta=payload.theta, alpha_row=dict(payload.alpha_row),
                             aux_grad=payload.retained_aux_grad)
        if algorithm.uses_protocol:
            prev_grads[i] = uploaded["full_grad"]
            prev_g1[i] = uploaded["g_alpha1"]
            for j, value in uploaded["alpha"].items():
                A[i, j] = value
        if algorithm.trains_global:
            trained.append((uploaded["theta"], client.data.n_train))
        increases += payload.alpha_increases
        clamps += payload.alpha_clamps
        samples += client.data.n_train * config.local_epochs

    theta_glob = aggregate_global(trained) if trained else server.theta_glob
    new_server = ServerState(
        theta_glob=theta_glob,
        A=A,
        prev_grads=prev_grads,
        prev_g1=prev_g1,
        prev_selected=plan.selected if algorithm.uses_protocol else (),
        round=t,
    )

    models = algorithm.personalized_models(new_server, clients, t)
    accs, losses = evaluate_clients(algorithm.spec, models, clients)
    delta = wire.ledger()
    record = RoundRecord.from_evaluation(t, accs, losses, traffic_before + delta, plan.selected,
                                         alpha_increases=increases, alpha_clamps=clamps)
    if clamps:
        logger.debug(f"Round {t}: {clamps} entrée(s) α ramenée(s) à 0")
    logger.debug(f"Round {t}: précision moyenne {record.mean_personalized_acc:.4f}, sélection {plan.selected}")
    return RoundOutcome(new_server, record, delta, samples)


def server_round(server: ServerState,
                 clients: Dict[int, ClientState],
                 config: FederationConfig,
                 algorithm: "Algorithm",
                 traffic_before: CommLedger = CommLedger(),
                 max_workers: int = 1) -> Tuple[ServerState, RoundRecord]:
    """Un round complet: sélection, mises à jour client, agrégation, évaluation"""
    outcome = run_round(server, clients, config, algorithm, traffic_before, max_workers)
    return outcome.server, outcome.record


class Simulation:
    """Simulation fédérée complète pour une configuration et une graine"""

    def __init__(self,
                 spec: ModelSpec,
                 config: FederationConfig,
                 algorithm: "Algorithm",
                 datasets: Sequence[ClientDataset],
                 theta0: Optional[ParamVector] = None,
                 max_workers: int = 1):
        if len(datasets) != config.n_clients:
            raise PersoFedError(f"{len(datasets)} clients fournis pour n_clients={config.n_clients}")
        self.spec = spec
        self.config = config
        self.algorithm = algorithm
        self.max_workers = max(1, int(max_workers))
        if theta0 is None:
            theta0 = init_params(spec, SeededRng(config.seed).fork("init"))
        self.theta0 = theta0
        self.server = init_server_state(theta0, config.n_clients, config.clients_per_round)
        self.clients = init_client_states(datasets, theta0, config)
        self.A_initial = self.server.A.copy()
        self.history: List[RoundRecord] = []
        self.ledger = LedgerHistory()
        self.samples_processed = 0

    @property
    def round(self) -> int:
        return self.server.round

    def step(self) -> RoundRecord:
        outcome = run_round(self.server, self.clients, self.config, self.algorithm,
                            self.ledger.total, self.max_workers)
        self.server = outcome.server
        self.ledger.record(outcome.traffic)
        self.samples_processed += outcome.samples_processed
        self.history.append(outcome.record)
        return outcome.record

    def run(self, rounds: Optional[int] = None,
            on_round: Optional[Callable[["Simulation", RoundRecord], None]] = None) -> List[RoundRecord]:
        """Exécuter jusqu'au round ``rounds`` (défaut: config.rounds)"""
        target = self.config.rounds if rounds is None else rounds
        while self.server.round < target:
            record = self.step()
            if on_round is not None:
                on_round(self, record)
        return self.history

    def personalized_models(self) -> Dict[int, ParamVector]:
        """Modèles personnalisés finaux θ₁..θ_N"""
        return self.algorithm.personalized_models(self.server, self.clients, self.server.round)
