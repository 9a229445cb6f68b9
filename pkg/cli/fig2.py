"""
Étude personnalisation explicite vs implicite

Pour chaque graine: FedAvg est entraîné, puis son modèle global est
personnalisé par (a) l'oracle explicite et (b) S pas de fine-tuning local
plein batch. Les gains sont mesurés en points de pourcentage de précision
test par rapport au modèle global.
"""
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from algorithms.local_training import fine_tune_trajectory
from algorithms.oracle import explicit_oracle_trajectories
from algorithms.registry import FEDAVG
from config.settings import ExperimentConfig, max_workers_from_env, save_config
from core.errors import ConfigError, PersoFedError
from cli.outputs import FLOAT_FORMAT, RunManifest, config_hash
from cli.runner import build_simulation
from models.classifiers import ModelSpec, accuracy
from utils.helpers import FileUtils
from utils.log import attach_file_handler, detach_handler, get_logger

logger = get_logger(__name__)

EXPLICIT = "explicit"
IMPLICIT = "implicit"
HISTOGRAM_BINS = 10


@dataclass
class Fig2Result:
    directory: str
    trajectory: pd.DataFrame
    gains: pd.DataFrame
    histogram: pd.DataFrame

    def final_gains(self) -> pd.DataFrame:
        """Gain moyen final par graine et par bras (colonnes explicit, implicit)"""
        last = self.trajectory[self.trajectory["step"] == self.trajectory["step"].max()]
        return last.pivot(index="seed", columns="arm", values="mean_gain")

    def explicit_wins(self) -> int:
        """Nombre de graines où le bras explicite gagne au moins autant"""
        final = self.final_gains()
        return int((final[EXPLICIT] >= final[IMPLICIT]).sum())


def _accuracies(spec: ModelSpec, models: Sequence[np.ndarray], clients) -> np.ndarray:
    return np.array([accuracy(spec, theta, client.test) for theta, client in zip(models, clients)])


def personalization_accuracies(spec: ModelSpec, clients, theta_glob: np.ndarray,
                               steps: int, mu: float, lr: float) -> Dict[str, List[np.ndarray]]:
    """Précision test par client à chaque pas (pas 0 = modèle global) pour les deux bras"""
    explicit_paths = explicit_oracle_trajectories(clients, theta_glob, mu, steps, lr, spec)
    implicit_paths = [fine_tune_trajectory(theta_glob, client.train, steps, lr, spec, momentum=0.0)
                      for client in clients]

    accuracies = {EXPLICIT: [], IMPLICIT: []}
    for step in range(steps + 1):
        for arm, paths in ((EXPLICIT, explicit_paths), (IMPLICIT, implicit_paths)):
            accuracies[arm].append(_accuracies(spec, [path[step] for path in paths], clients))
    return accuracies


def run_fig2_study(config: ExperimentConfig, seeds: Optional[Sequence[int]] = None,
                   max_workers: Optional[int] = None) -> Fig2Result:
    """Comparer personnalisation explicite et fine-tuning sur le modèle FedAvg"""
    seeds = list(seeds if seeds is not None else config.seeds)
    if not seeds:
        raise ConfigError([("seeds", "at least one seed")])
    workers = max_workers if max_workers is not None else max_workers_from_env()
    config = config.with_run(algorithm=FEDAVG)
    oracle = config.oracle

    out_dir = FileUtils.unique_directory(config.output.directory, f"{config.name}-fig2")
    save_config(config, os.path.join(out_dir, "config.json"))
    manifest = RunManifest(out_dir, config_hash(config.to_dict()), seeds[0], "fig2")
    manifest.write()
    handler = attach_file_handler(os.path.join(out_dir, "run.log"))

    trajectory_rows, gain_rows = [], []
    samples = 0
    status = "failed"
    try:
        for seed in seeds:
            simulation, clients = build_simulation(config, seed, workers)
            simulation.run()
            samples += simulation.samples_processed
            accuracies = personalization_accuracies(simulation.spec, clients, simulation.server.theta_glob,
                                                    oracle.steps, oracle.mu, oracle.lr)
            gains = {}
            for arm, per_step in accuracies.items():
                base = per_step[0]
                gains[arm] = [100.0 * (accs - base) for accs in per_step]
                for step, accs in enumerate(per_step):
                    trajectory_rows.append({"seed": seed, "step": step, "arm": arm,
                                            "mean_acc": float(accs.mean()),
                                            "mean_gain": float(gains[arm][step].mean())})
                for client_id, value in enumerate(gains[arm][-1]):
                    gain_rows.append({"seed": seed, "client_id": client_id, "arm": arm, "gain": float(value)})
            final_explicit = float(gains[EXPLICIT][-1].mean())
            final_implicit = float(gains[IMPLICIT][-1].mean())
            logger.info(f"📊 Graine {seed}: gain explicite {final_explicit:+.2f} pts, "
                        f"implicite {final_implicit:+.2f} pts")

        trajectory = pd.DataFrame(trajectory_rows, columns=["seed", "step", "arm", "mean_acc", "mean_gain"])
        gains_frame = pd.DataFrame(gain_rows, columns=["seed", "client_id", "arm", "gain"])
        histogram = gain_histogram(gains_frame)
        trajectory.to_csv(os.path.join(out_dir, "fig2_trajectory.csv"), index=False,
                          float_format=FLOAT_FORMAT, lineterminator="\n")
        gains_frame.to_csv(os.path.join(out_dir, "fig2_gains.csv"), index=False,
                           float_format=FLOAT_FORMAT, lineterminator="\n")
        histogram.to_csv(os.path.join(out_dir, "fig2_histogram.csv"), index=False,
                         float_format=FLOAT_FORMAT, lineterminator="\n")
        status = "completed"
    except PersoFedError as e:
        logger.error(f"❌ Étude interrompue: {e}")
        raise
    finally:
        detach_handler(handler)
        manifest.finalize(samples, status=status)

    result = Fig2Result(out_dir, trajectory, gains_frame, histogram)
    logger.info(f"✅ Bras explicite >= implicite sur {result.explicit_wins()}/{len(seeds)} graine(s)")
    return result


def gain_histogram(gains: pd.DataFrame, bins: int = HISTOGRAM_BINS) -> pd.DataFrame:
    """Histogramme des gains finaux par bras, intervalles communs aux deux bras"""
    values = gains["gain"].to_numpy()
    low, high = (float(values.min()), float(values.max())) if values.size else (0.0, 0.0)
    if low == high:
        low, high = low - 0.5, high + 0.5
    edges = np.linspace(low, high, bins + 1)
    rows = []
    for arm in (EXPLICIT, IMPLICIT):
        counts, _ = np.histogram(gains.loc[gains["arm"] == arm, "gain"].to_numpy(), bins=edges)
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            rows.append({"arm": arm, "bin_left": float(left), "bin_right": float(right), "count": int(count)})
    return pd.DataFrame(rows, columns=["arm", "bin_left", "bin_right", "count"])
