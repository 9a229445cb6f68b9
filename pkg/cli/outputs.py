"""
Écriture des résultats d'un run: CSV, modèles, exports α, manifeste
"""
import json
import os
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from analyzers.alpha_analysis import AlphaAnalytics, export_alpha
from analyzers.round_metrics import RoundRecord, metrics_frame, rounds_to_threshold
from utils.helpers import FileUtils, HashUtils

VERSION = "1.0.0"
MANIFEST_NAME = "manifest.json"
FLOAT_FORMAT = "%.17g"


def recorded_rounds(history: Sequence[RoundRecord], eval_every: int, total_rounds: int) -> List[RoundRecord]:
    """Rounds écrits dans le CSV: multiples de eval_every, plus le dernier"""
    return [record for record in history
            if record.round % eval_every == 0 or record.round == total_rounds]


def write_metrics_csv(history: Sequence[RoundRecord], path: str, eval_every: int = 1,
                      total_rounds: Optional[int] = None) -> pd.DataFrame:
    total_rounds = total_rounds if total_rounds is not None else (history[-1].round if history else 0)
    frame = metrics_frame(recorded_rounds(history, eval_every, total_rounds))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return frame


def write_clients_csv(record: RoundRecord, n_train: Dict[int, int], n_test: Dict[int, int], path: str) -> pd.DataFrame:
    """Rapport final par client"""
    rows = [
        (i, n_train[i], n_test[i], record.per_client_test_acc[i], record.per_client_train_loss[i])
        for i in sorted(record.per_client_test_acc)
    ]
    frame = pd.DataFrame(rows, columns=["client_id", "n_train", "n_test", "test_acc", "train_loss"])
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return frame


def write_models(path: str, theta_glob: np.ndarray, personalized: Dict[int, np.ndarray]):
    """θ_glob et les modèles personnalisés (ligne i = client i)"""
    ids = sorted(personalized)
    np.savez(path, theta_glob=theta_glob, personalized=np.array([personalized[i] for i in ids]),
             client_ids=np.array(ids, dtype=np.int64))


def write_alpha_exports(directory: str, A_initial: np.ndarray, A_final: np.ndarray):
    export_alpha(A_initial, os.path.join(directory, "alpha_initial.csv"))
    export_alpha(A_final, os.path.join(directory, "alpha_final.csv"))
    export_alpha(A_final - A_initial, os.path.join(directory, "alpha_delta.csv"))


def write_analytics(path: str, history: Sequence[RoundRecord], threshold: float,
                    alpha: Optional[AlphaAnalytics] = None):
    """Résumé JSON: seuil de convergence, diagnostics α, corrélations"""
    final = history[-1]
    document = {
        "final_round": final.round,
        "final_mean_acc": final.mean_personalized_acc,
        "threshold": threshold,
        "rounds_to_threshold": rounds_to_threshold(history, threshold),
        "alpha_increases": sum(record.alpha_increases for record in history),
        "alpha_clamps": sum(record.alpha_clamps for record in history),
        "alpha": alpha.to_dict() if alpha is not None else None,
    }
    FileUtils.write_file_safe(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    """Manifeste d'un run, écrit avant le round 1 et finalisé à la fin"""
    directory: str
    config_hash: str
    seed: int
    algorithm: str
    version: str = VERSION
    status: str = "running"
    started_at: str = field(default_factory=utc_now)
    finished_at: Optional[str] = None
    wall_clock_seconds: Optional[float] = None
    samples_per_second: Optional[float] = None
    resumed_from: Optional[str] = None
    files: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    _clock: float = field(default_factory=time.perf_counter, repr=False)

    @property
    def path(self) -> str:
        return os.path.join(self.directory, MANIFEST_NAME)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("_clock")
        data.pop("directory")
        return data

    def write(self):
        FileUtils.write_file_safe(self.path, json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def finalize(self, samples_processed: int, status: str = "completed"):
        """Horodatage de fin, vitesse de calcul et inventaire des fichiers"""
        elapsed = time.perf_counter() - self._clock
        self.status = status
        self.finished_at = utc_now()
        self.wall_clock_seconds = elapsed
        self.samples_per_second = samples_processed / elapsed if elapsed > 0 else None
        self.files = FileUtils.inventory(self.directory, exclude={MANIFEST_NAME})
        self.write()


def config_hash(config_dict: Dict[str, Any]) -> str:
    return HashUtils.canonical_hash(config_dict)
