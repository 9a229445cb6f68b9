"""
Comptabilité des communications simulées

Unité modèle = un vecteur de dimension d; unité scalaire = un réel.
"""
from dataclasses import asdict, dataclass
from typing import Dict, List

_FEDAVG_LIKE = ("fedavg", "fedavg_finetune", "explicit_oracle")
_PGFED_FULL = ("pgfed", "pgfedmo")


@dataclass(frozen=True)
class CommLedger:
    """Compteurs de transferts par direction"""
    model_units_down: int = 0
    model_units_up: int = 0
    scalar_units_down: int = 0
    scalar_units_up: int = 0

    def __post_init__(self):
        if min(self.model_units_down, self.model_units_up,
               self.scalar_units_down, self.scalar_units_up) < 0:
            raise ValueError("compteurs de trafic négatifs")

    def __add__(self, other: "CommLedger") -> "CommLedger":
        return CommLedger(
            self.model_units_down + other.model_units_down,
            self.model_units_up + other.model_units_up,
            self.scalar_units_down + other.scalar_units_down,
            self.scalar_units_up + other.scalar_units_up,
        )

    def scaled(self, factor: int) -> "CommLedger":
        return CommLedger(
            self.model_units_down * factor,
            self.model_units_up * factor,
            self.scalar_units_down * factor,
            self.scalar_units_up * factor,
        )

    @property
    def model_units(self) -> int:
        return self.model_units_down + self.model_units_up

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def per_client_charge(algorithm: str, t: int, clients_per_round: int) -> CommLedger:
    """Trafic d'un client sélectionné au round t"""
    if t < 1:
        raise ValueError(f"round doit être >= 1, reçu {t}")
    M = clients_per_round
    if algorithm == "local":
        return CommLedger()
    if algorithm in _FEDAVG_LIKE:
        return CommLedger(model_units_down=1, model_units_up=1)
    if algorithm in _PGFED_FULL or algorithm == "pgfed_ce":
        # t=1: FedAvg en descente, ancre (θᵢ, ∇f, g_α⁽¹⁾) en montée
        if t == 1:
            return CommLedger(model_units_down=1, model_units_up=2, scalar_units_up=1)
        if algorithm == "pgfed_ce":
            return CommLedger(2, 2, M + 1, M + 1)
        return CommLedger(3, 2, M, M + 1)
    raise ValueError(f"algorithme inconnu '{algorithm}'")


def ledger_charge(algorithm: str, t: int, clients_per_round: int) -> CommLedger:
    """Trafic total prévu d'un round (M clients sélectionnés)"""
    return per_client_charge(algorithm, t, clients_per_round).scaled(clients_per_round)


def communication_ratio(algorithm: str, baseline: str, t: int, clients_per_round: int) -> float:
    """Rapport des unités modèle (descente + montée) entre deux algorithmes"""
    reference = ledger_charge(baseline, t, clients_per_round).model_units
    if reference == 0:
        raise ValueError(f"'{baseline}' ne transfère aucune unité modèle")
    return ledger_charge(algorithm, t, clients_per_round).model_units / reference


class LedgerHistory:
    """Deltas par round et vue cumulée"""

    def __init__(self):
        self.per_round: List[CommLedger] = []
        self._total = CommLedger()

    def record(self, delta: CommLedger) -> CommLedger:
        """Ajouter le delta d'un round; renvoie le cumul"""
        self.per_round.append(delta)
        self._total = self._total + delta
        return self._total

    @property
    def total(self) -> CommLedger:
        return self._total

    def restore(self, per_round: List[CommLedger]):
        self.per_round = []
        self._total = CommLedger()
        for delta in per_round:
            self.record(delta)
