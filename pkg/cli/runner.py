"""
Orchestration des expériences: run unique, reprise, balayage de graines
"""
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from algorithms.registry import LOCAL, PGFED_FAMILY, build_algorithm
from analyzers.alpha_analysis import alpha_analytics, export_alpha
from analyzers.round_metrics import RoundRecord, individual_gain, summarize_seeds
from config.settings import ExperimentConfig, max_workers_from_env, save_config
from core.checkpoint import load_checkpoint, restore_simulation, save_checkpoint
from core.engine import Simulation
from core.errors import ConfigError, OutputError, PersoFedError, SweepError
from generators.csv_loader import load_csv
from generators.dataset import ClientDataset, PartitionSpec, standardize_clients
from generators.partition import dirichlet_partition, export_partition
from generators.synthetic import synth_blobs
from cli.outputs import (
    FLOAT_FORMAT, RunManifest, config_hash, write_alpha_exports, write_analytics,
    write_clients_csv, write_metrics_csv, write_models,
)
from utils.helpers import FileUtils, format_duration
from utils.log import attach_file_handler, detach_handler, get_logger

logger = get_logger(__name__)

RUN_COLUMNS = ["algorithm", "seed", "final_mean_acc", "directory"]


@dataclass
class RunResult:
    """Résultat d'un run terminé"""
    directory: str
    algorithm: str
    seed: int
    history: List[RoundRecord]
    samples_processed: int = 0

    @property
    def final_record(self) -> RoundRecord:
        return self.history[-1]

    @property
    def final_mean_acc(self) -> float:
        return self.final_record.mean_personalized_acc


@dataclass
class SweepResult:
    directory: str
    runs: pd.DataFrame
    summary: pd.DataFrame


def prepare_clients(config: ExperimentConfig, seed: int) -> Tuple[List[ClientDataset], int, int]:
    """Générer ou lire les données puis les partitionner entre les clients"""
    ds = config.dataset
    if ds.source == "csv":
        data = load_csv(ds.path, ds.label_column, ds.test_fraction, seed=seed, n_classes=ds.n_classes)
    else:
        data = synth_blobs(ds.n_classes, ds.n_features, ds.n_samples, ds.class_separation, seed)
    spec = PartitionSpec(config.federation.n_clients, ds.dirichlet_alpha, ds.test_fraction, seed)
    clients = dirichlet_partition(data, spec)
    if ds.standardize:
        clients = standardize_clients(clients)
    return clients, data.n_features, data.n_classes


def build_simulation(config: ExperimentConfig, seed: int, max_workers: int = 1,
                     alpha_gradient=None) -> Tuple[Simulation, List[ClientDataset]]:
    """Simulation prête à tourner pour (config, seed)"""
    federation = config.with_run(seed=seed).federation
    clients, n_features, n_classes = prepare_clients(config, seed)
    spec = config.model.to_spec(n_features, n_classes)
    algorithm = build_algorithm(
        federation.algorithm, spec, federation,
        finetune_epochs=config.eval.finetune_epochs,
        oracle_steps=config.oracle.steps,
        oracle_mu=config.oracle.mu,
        oracle_lr=config.oracle.lr,
        alpha_gradient=alpha_gradient,
    )
    return Simulation(spec, federation, algorithm, clients, max_workers=max_workers), clients


def _checkpoint_hook(config: ExperimentConfig, run_dir: str):
    every = config.output.checkpoint_every
    eval_every = config.eval.eval_every
    total = config.federation.rounds

    def on_round(simulation: Simulation, record: RoundRecord):
        if record.round % eval_every == 0 or record.round == total:
            logger.info(f"📊 Round {record.round}/{total}: précision moyenne {record.mean_personalized_acc:.4f}")
        if every and record.round % every == 0:
            save_checkpoint(simulation, run_dir, metadata={"config": config.to_dict()})
            if simulation.algorithm.tag in PGFED_FAMILY:
                export_alpha(simulation.server.A, os.path.join(run_dir, f"alpha-r{record.round:04d}.csv"))

    return on_round


def _write_run_outputs(simulation: Simulation, config: ExperimentConfig, run_dir: str):
    history = simulation.history
    write_metrics_csv(history, os.path.join(run_dir, "metrics.csv"),
                      config.eval.eval_every, config.federation.rounds)
    n_train = {i: c.data.n_train for i, c in simulation.clients.items()}
    n_test = {i: c.data.n_test for i, c in simulation.clients.items()}
    write_clients_csv(history[-1], n_train, n_test, os.path.join(run_dir, "clients.csv"))
    write_models(os.path.join(run_dir, "models.npz"), simulation.server.theta_glob,
                 simulation.personalized_models())

    analytics = None
    if simulation.algorithm.tag in PGFED_FAMILY:
        write_alpha_exports(run_dir, simulation.A_initial, simulation.server.A)
        analytics = alpha_analytics(simulation.A_initial, simulation.server.A, n_train)
    write_analytics(os.path.join(run_dir, "analytics.json"), history, config.eval.threshold, analytics)


def _execute(simulation: Simulation, config: ExperimentConfig, run_dir: str, manifest: RunManifest,
             handler) -> RunResult:
    samples_before = simulation.samples_processed
    status = "failed"
    try:
        logger.info(f"🚀 Run {os.path.basename(run_dir)}: {simulation.algorithm.tag}, "
                    f"{config.federation.n_clients} clients, {config.federation.rounds} rounds")
        simulation.run(on_round=_checkpoint_hook(config, run_dir))
        _write_run_outputs(simulation, config, run_dir)
        status = "completed"
    except PersoFedError as e:
        logger.error(f"❌ Run interrompu: {e}")
        raise
    except OSError as e:
        logger.error(f"❌ Écriture des résultats impossible: {e}")
        raise OutputError(e.filename or run_dir, e) from e
    finally:
        detach_handler(handler)
        manifest.finalize(simulation.samples_processed - samples_before, status=status)
    logger.info(f"✅ Run terminé: précision finale {simulation.history[-1].mean_personalized_acc:.4f}")
    if manifest.wall_clock_seconds is not None:
        logger.info(f"⏱️ Durée {format_duration(manifest.wall_clock_seconds)}")
    return RunResult(run_dir, simulation.algorithm.tag, simulation.config.seed, list(simulation.history),
                     simulation.samples_processed - samples_before)


def run_experiment(config: ExperimentConfig, seed: Optional[int],
                   out_dir: Optional[str] = None,
                   max_workers: Optional[int] = None) -> RunResult:
    """Exécuter T rounds dans un nouveau dossier de run (jamais écrasé)"""
    if seed is None:
        raise ConfigError([("seed", "seed required")])
    workers = max_workers if max_workers is not None else max_workers_from_env()
    algorithm = config.federation.algorithm
    run_dir = FileUtils.unique_directory(out_dir or config.output.directory,
                                         f"{config.name}-{algorithm}-s{seed}")
    save_config(config, os.path.join(run_dir, "config.json"))
    manifest = RunManifest(run_dir, config_hash(config.to_dict()), seed, algorithm)
    manifest.write()

    handler = attach_file_handler(os.path.join(run_dir, "run.log"))
    try:
        simulation, clients = build_simulation(config, seed, workers)
        export_partition(clients, os.path.join(run_dir, "partition.csv"))
    except PersoFedError as e:
        logger.error(f"❌ Préparation impossible: {e}")
        detach_handler(handler)
        manifest.finalize(0, status="failed")
        raise
    return _execute(simulation, config, run_dir, manifest, handler)


def resume_experiment(checkpoint_path: str, rounds: Optional[int] = None,
                      max_workers: Optional[int] = None) -> RunResult:
    """Reprendre un run depuis un checkpoint dans un dossier frère suffixé

    Le dossier d'origine n'est jamais modifié; le nouveau contient l'historique complet.
    """
    state = load_checkpoint(checkpoint_path)
    config = ExperimentConfig.from_dict(state.metadata["config"])
    if rounds is not None:
        config = config.with_run(rounds=rounds)
    seed = int(state.header["seed"])
    source_dir = os.path.dirname(os.path.abspath(checkpoint_path))
    workers = max_workers if max_workers is not None else max_workers_from_env()

    simulation, clients = build_simulation(config, seed, workers)
    restore_simulation(simulation, state)
    run_dir = FileUtils.unique_directory(os.path.dirname(source_dir), os.path.basename(source_dir))
    save_config(config, os.path.join(run_dir, "config.json"))
    export_partition(clients, os.path.join(run_dir, "partition.csv"))
    resumed_from = f"{os.path.basename(source_dir)}/{os.path.basename(checkpoint_path)}"
    manifest = RunManifest(run_dir, config_hash(config.to_dict()), seed, config.federation.algorithm,
                           resumed_from=resumed_from)
    manifest.write()
    handler = attach_file_handler(os.path.join(run_dir, "run.log"))
    return _execute(simulation, config, run_dir, manifest, handler)


def _sweep_job(config_dict: Dict[str, Any], algorithm: str, seed: int, out_dir: str) -> Dict[str, Any]:
    config = ExperimentConfig.from_dict(config_dict).with_run(algorithm=algorithm)
    result = run_experiment(config, seed, out_dir=out_dir, max_workers=1)
    return {
        "algorithm": algorithm,
        "seed": seed,
        "final_mean_acc": result.final_mean_acc,
        "directory": os.path.basename(result.directory),
        "per_client_acc": result.final_record.per_client_test_acc,
        "samples": result.samples_processed,
    }


def _summarize(rows: List[Dict[str, Any]], algorithms: Sequence[str]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Moyenne ± écart-type par algorithme, et gains sur Local par graine"""
    local = {row["seed"]: row["per_client_acc"] for row in rows if row["algorithm"] == LOCAL}
    gains = []
    for row in rows:
        if row["algorithm"] != LOCAL and row["seed"] in local:
            mean_gain, std_gain, _ = individual_gain(row["per_client_acc"], local[row["seed"]])
            gains.append({"algorithm": row["algorithm"], "seed": row["seed"],
                          "mean_gain": mean_gain, "std_gain": std_gain})
    gains_frame = pd.DataFrame(gains, columns=["algorithm", "seed", "mean_gain", "std_gain"])

    summary = []
    for algorithm in algorithms:
        values = [row["final_mean_acc"] for row in rows if row["algorithm"] == algorithm]
        if not values:
            continue
        mean, std = summarize_seeds(values)
        entry = {"algorithm": algorithm, "n_seeds": len(values), "mean_acc": mean, "std_acc": std}
        algo_gains = gains_frame[gains_frame["algorithm"] == algorithm]["mean_gain"].tolist()
        entry["mean_gain_over_local"] = summarize_seeds(algo_gains)[0] if algo_gains else None
        summary.append(entry)
    columns = ["algorithm", "n_seeds", "mean_acc", "std_acc", "mean_gain_over_local"]
    return pd.DataFrame(summary, columns=columns), gains_frame


def _write_sweep_tables(sweep_dir: str, rows: List[Dict[str, Any]], algorithms: Sequence[str]) -> pd.DataFrame:
    runs = pd.DataFrame([{k: v for k, v in row.items() if k in RUN_COLUMNS} for row in rows],
                        columns=RUN_COLUMNS)
    runs.to_csv(os.path.join(sweep_dir, "sweep_runs.csv"), index=False, float_format=FLOAT_FORMAT,
                lineterminator="\n")
    summary, gains = _summarize(rows, algorithms)
    summary.to_csv(os.path.join(sweep_dir, "sweep_summary.csv"), index=False, float_format=FLOAT_FORMAT,
                   lineterminator="\n")
    if not gains.empty:
        gains.to_csv(os.path.join(sweep_dir, "sweep_gains.csv"), index=False, float_format=FLOAT_FORMAT,
                     lineterminator="\n")

    lines = [f"{'algorithm':<18}{'seeds':>6}  mean ± std (acc)"]
    for entry in summary.itertuples(index=False):
        lines.append(f"{entry.algorithm:<18}{entry.n_seeds:>6}  {entry.mean_acc:.4f} ± {entry.std_acc:.4f}")
    FileUtils.write_file_safe(os.path.join(sweep_dir, "sweep_summary.txt"), "\n".join(lines) + "\n")
    return summary


def run_sweep(config: ExperimentConfig, seeds: Sequence[int],
              max_workers: Optional[int] = None) -> SweepResult:
    """Toutes les paires (algorithme, graine); résumé moyenne ± écart-type"""
    if not seeds:
        raise ConfigError([("seeds", "at least one seed")])
    workers = max_workers if max_workers is not None else max_workers_from_env()
    algorithms = list(config.compare) or [config.federation.algorithm]
    sweep_dir = FileUtils.unique_directory(config.output.directory, f"{config.name}-sweep")
    save_config(config, os.path.join(sweep_dir, "config.json"))
    manifest = RunManifest(sweep_dir, config_hash(config.to_dict()), int(seeds[0]), "sweep")
    manifest.write()
    jobs = [(algorithm, int(seed)) for algorithm in algorithms for seed in seeds]
    logger.info(f"🔁 Balayage: {len(algorithms)} algorithme(s) × {len(seeds)} graine(s) → {sweep_dir}")

    rows: List[Dict[str, Any]] = []

    def collect(row: Dict[str, Any]):
        rows.append(row)
        _write_sweep_tables(sweep_dir, rows, algorithms)
        logger.info(f"✅ {row['algorithm']} s{row['seed']}: {row['final_mean_acc']:.4f} "
                    f"({len(rows)}/{len(jobs)})")

    config_dict = config.to_dict()
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_sweep_job, config_dict, a, s, sweep_dir) for a, s in jobs]
                try:
                    for future in futures:
                        collect(future.result())
                except Exception:
                    for future in futures:
                        future.cancel()
                    raise
        else:
            for algorithm, seed in jobs:
                collect(_sweep_job(config_dict, algorithm, seed, sweep_dir))
    except Exception as e:
        if rows:
            _write_sweep_tables(sweep_dir, rows, algorithms)
        logger.error(f"❌ Balayage interrompu après {len(rows)} run(s): {e}")
        manifest.finalize(sum(row["samples"] for row in rows), status="failed")
        raise SweepError(f"balayage interrompu après {len(rows)}/{len(jobs)} run(s): {e}", len(rows)) from e

    summary = _write_sweep_tables(sweep_dir, rows, algorithms)
    manifest.finalize(sum(row["samples"] for row in rows))
    runs = pd.read_csv(os.path.join(sweep_dir, "sweep_runs.csv"))
    return SweepResult(sweep_dir, runs, summary)
