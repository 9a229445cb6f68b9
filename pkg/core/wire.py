"""
Canal client/serveur simulé et instrumenté

Chaque objet qui traverse le canal est copié puis compté: un tableau de
dimension d vaut une unité modèle, un réel ou une entrée de dictionnaire une
unité scalaire. Ces comptes servent à vérifier les prévisions du ledger.
"""
from numbers import Real
from typing import Dict, Mapping

import numpy as np

from analyzers.comm_ledger import CommLedger


class Wire:
    """Compteur de transferts pour un round"""

    def __init__(self, dim: int):
        self.dim = dim
        self._counts = {"model_down": 0, "model_up": 0, "scalar_down": 0, "scalar_up": 0}

    def _measure(self, value) -> tuple:
        """(unités modèle, unités scalaires) d'un objet transféré"""
        if value is None:
            return 0, 0
        if isinstance(value, np.ndarray):
            if value.ndim == 1 and value.shape[0] == self.dim:
                return 1, 0
            if value.size == 1:
                return 0, 1
            raise TypeError(f"tableau de forme {value.shape} non transférable (d={self.dim})")
        if isinstance(value, Mapping):
            for entry in value.values():
                if not isinstance(entry, Real):
                    raise TypeError("seuls des dictionnaires de scalaires sont transférables")
            return 0, len(value)
        if isinstance(value, Real):
            return 0, 1
        raise TypeError(f"type non transférable: {type(value).__name__}")

    def _transfer(self, items: Mapping[str, object], direction: str) -> Dict[str, object]:
        received = {}
        for name, value in items.items():
            models, scalars = self._measure(value)
            self._counts[f"model_{direction}"] += models
            self._counts[f"scalar_{direction}"] += scalars
            if isinstance(value, np.ndarray):
                value = value.copy()
            elif isinstance(value, Mapping):
                value = dict(value)
            received[name] = value
        return received

    def download(self, items: Mapping[str, object]) -> Dict[str, object]:
        """Serveur → client; renvoie les copies reçues"""
        return self._transfer(items, "down")

    def upload(self, items: Mapping[str, object]) -> Dict[str, object]:
        """Client → serveur"""
        return self._transfer(items, "up")

    def ledger(self) -> CommLedger:
        return CommLedger(
            model_units_down=self._counts["model_down"],
            model_units_up=self._counts["model_up"],
            scalar_units_down=self._counts["scalar_down"],
            scalar_units_up=self._counts["scalar_up"],
        )
