"""
Points de reprise: en-tête JSON + corps NPZ

``checkpoint-rNNNN.json`` contient le round, la sélection précédente, la
carte g⁽¹⁾ (réels en notation hexadécimale, donc exacts), l'historique des
rounds et le ledger. ``checkpoint-rNNNN.npz`` contient les tableaux:
theta0, theta_glob, A, A_initial, prev_grads (lignes dans l'ordre de
prev_selected), client_theta, client_alpha, client_aux et client_aux_mask.
La reprise depuis ces deux fichiers est exacte bit à bit.
"""
import json
import os
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from analyzers.comm_ledger import CommLedger
from analyzers.round_metrics import RoundRecord
from core.errors import PersoFedError
from core.federation import ServerState
from utils.log import get_logger

logger = get_logger(__name__)

CHECKPOINT_FORMAT = "persofed-checkpoint/1"


def _hex_map(values: Dict[int, float]) -> Dict[str, str]:
    return {str(k): float(v).hex() for k, v in sorted(values.items())}


def _unhex_map(values: Dict[str, str]) -> Dict[int, float]:
    return {int(k): float.fromhex(v) for k, v in values.items()}


def record_to_dict(record: RoundRecord) -> Dict[str, Any]:
    return {
        "round": record.round,
        "per_client_test_acc": _hex_map(record.per_client_test_acc),
        "per_client_train_loss": _hex_map(record.per_client_train_loss),
        "mean_personalized_acc": float(record.mean_personalized_acc).hex(),
        "traffic": record.traffic.to_dict(),
        "selected": list(record.selected),
        "alpha_increases": record.alpha_increases,
        "alpha_clamps": record.alpha_clamps,
    }


def record_from_dict(data: Dict[str, Any]) -> RoundRecord:
    return RoundRecord(
        round=int(data["round"]),
        per_client_test_acc=_unhex_map(data["per_client_test_acc"]),
        mean_personalized_acc=float.fromhex(data["mean_personalized_acc"]),
        per_client_train_loss=_unhex_map(data["per_client_train_loss"]),
        traffic=CommLedger(**data["traffic"]),
        selected=tuple(data["selected"]),
        alpha_increases=int(data["alpha_increases"]),
        alpha_clamps=int(data["alpha_clamps"]),
    )


def checkpoint_paths(directory: str, round_index: int) -> Tuple[str, str]:
    stem = os.path.join(directory, f"checkpoint-r{round_index:04d}")
    return stem + ".json", stem + ".npz"


def save_checkpoint(simulation, directory: str, metadata: Dict[str, Any] = None) -> Tuple[str, str]:
    """Écrire l'état complet d'une ``Simulation`` après son dernier round"""
    server = simulation.server
    json_path, npz_path = checkpoint_paths(directory, server.round)
    ids = sorted(simulation.clients)
    dim = server.theta_glob.shape[0]

    client_aux = np.zeros((len(ids), dim))
    aux_mask = np.zeros(len(ids), dtype=bool)
    for row, i in enumerate(ids):
        aux = simulation.clients[i].aux_grad
        if aux is not None:
            client_aux[row] = aux
            aux_mask[row] = True

    prev_keys = list(server.prev_selected)
    np.savez(
        npz_path,
        theta0=simulation.theta0,
        theta_glob=server.theta_glob,
        A=server.A,
        A_initial=simulation.A_initial,
        prev_grads=np.array([server.prev_grads[j] for j in prev_keys]).reshape(len(prev_keys), dim),
        client_theta=np.array([simulation.clients[i].theta for i in ids]),
        client_alpha=np.array([[simulation.clients[i].alpha_row[j] for j in ids] for i in ids]),
        client_aux=client_aux,
        client_aux_mask=aux_mask,
    )
    header = {
        "format": CHECKPOINT_FORMAT,
        "round": server.round,
        "algorithm": simulation.algorithm.tag,
        "seed": simulation.config.seed,
        "prev_selected": prev_keys,
        "prev_g1": _hex_map(server.prev_g1),
        "samples_processed": simulation.samples_processed,
        "ledger": [delta.to_dict() for delta in simulation.ledger.per_round],
        "history": [record_to_dict(record) for record in simulation.history],
        "metadata": metadata or {},
        "body": os.path.basename(npz_path),
    }
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(header, f, indent=2, sort_keys=True)
    logger.info(f"💾 Checkpoint écrit: round {server.round} → {os.path.basename(json_path)}")
    return json_path, npz_path


@dataclass
class CheckpointState:
    header: Dict[str, Any]
    arrays: Dict[str, np.ndarray]

    @property
    def round(self) -> int:
        return int(self.header["round"])

    @property
    def metadata(self) -> Dict[str, Any]:
        return self.header.get("metadata", {})


def load_checkpoint(json_path: str) -> CheckpointState:
    """Lire l'en-tête et le corps d'un checkpoint"""
    try:
        with open(json_path, "r", encoding="utf-8") as f:
            header = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise PersoFedError(f"checkpoint illisible {json_path}: {e}")
    if header.get("format") != CHECKPOINT_FORMAT:
        raise PersoFedError(f"format de checkpoint inconnu: {header.get('format')}")
    npz_path = os.path.join(os.path.dirname(json_path), header["body"])
    with np.load(npz_path) as body:
        arrays = {name: body[name].copy() for name in body.files}
    return CheckpointState(header, arrays)


def restore_simulation(simulation, state: CheckpointState):
    """Réinjecter un checkpoint dans une ``Simulation`` fraîchement construite"""
    header, arrays = state.header, state.arrays
    if header["algorithm"] != simulation.algorithm.tag or header["seed"] != simulation.config.seed:
        raise PersoFedError("checkpoint incompatible avec la configuration (algorithme ou graine)")
    ids = sorted(simulation.clients)
    if arrays["client_theta"].shape != (len(ids), simulation.theta0.shape[0]):
        raise PersoFedError("checkpoint incompatible: dimensions des modèles clients")

    prev_keys = [int(j) for j in header["prev_selected"]]
    simulation.theta0 = arrays["theta0"]
    simulation.A_initial = arrays["A_initial"]
    simulation.server = ServerState(
        theta_glob=arrays["theta_glob"],
        A=arrays["A"],
        prev_grads={j: arrays["prev_grads"][row].copy() for row, j in enumerate(prev_keys)},
        prev_g1=_unhex_map(header["prev_g1"]),
        prev_selected=tuple(prev_keys),
        round=int(header["round"]),
    )
    for row, i in enumerate(ids):
        client = simulation.clients[i]
        client.theta = arrays["client_theta"][row].copy()
        client.alpha_row = {j: float(arrays["client_alpha"][row, col]) for col, j in enumerate(ids)}
        client.aux_grad = arrays["client_aux"][row].copy() if arrays["client_aux_mask"][row] else None

    simulation.ledger.restore([CommLedger(**delta) for delta in header["ledger"]])
    simulation.history = [record_from_dict(data) for data in header["history"]]
    simulation.samples_processed = int(header["samples_processed"])
    logger.info(f"🔁 Reprise au round {simulation.server.round}")
