"""
Hiérarchie d'exceptions du simulateur
"""
from typing import List, Optional, Tuple


class PersoFedError(Exception):
    """Erreur de base du simulateur"""


class DimensionMismatchError(PersoFedError, ValueError):
    """Dimensions de vecteurs incompatibles"""

    def __init__(self, expected: int, got: int, what: str = "vecteur"):
        self.expected = expected
        self.got = got
        super().__init__(f"dimension mismatch ({what}): attendu {expected}, reçu {got}")


class NonFiniteError(PersoFedError, ValueError):
    """Valeur NaN ou infinie rencontrée"""

    def __init__(self, what: str, index: Optional[int] = None, value: Optional[float] = None):
        self.what = what
        self.index = index
        self.value = value
        where = f" à la coordonnée {index} (valeur {value!r})" if index is not None else ""
        super().__init__(f"non-finite {what}{where}")


class DatasetError(PersoFedError, ValueError):
    """Erreur de génération, de partition ou de lecture d'un jeu de données"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"ligne {row}")
        if column is not None:
            location.append(f"colonne '{column}'")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class ConfigError(PersoFedError, ValueError):
    """Configuration invalide; porte toutes les violations détectées"""

    def __init__(self, errors: List[Tuple[str, str]]):
        self.errors = list(errors)
        details = "; ".join(f"{key}: {constraint}" for key, constraint in self.errors)
        super().__init__(details or "configuration invalide")


class ClientUpdateError(PersoFedError, RuntimeError):
    """Échec de la mise à jour locale d'un client; interrompt le round"""

    def __init__(self, client_id: int, round_index: int, cause: BaseException):
        self.client_id = client_id
        self.round_index = round_index
        self.cause = cause
        super().__init__(f"client {client_id} (round {round_index}): {cause}")


class SweepError(PersoFedError):
    """Un balayage de graines a été interrompu; les résultats partiels sont conservés"""

    def __init__(self, message: str, completed: int):
        self.completed = completed
        super().__init__(message)


class OutputError(PersoFedError, OSError):
    """Écriture d'un fichier de résultats impossible"""

    def __init__(self, path: str, cause: BaseException):
        self.path = path
        self.cause = cause
        super().__init__(f"écriture impossible: {path} ({cause})")
