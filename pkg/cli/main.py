"""
Interface en ligne de commande du simulateur

    persofed run   --config <chemin> --seed <u64> [--algo <tag>] [--rounds <n>] [--out <dossier>]
    persofed run   --resume <checkpoint.json> [--rounds <n>]
    persofed sweep --config <chemin> --seeds <s1,s2,...>
    persofed fig2  --config <chemin> [--seeds <s1,s2,...>]

Codes de sortie: 0 succès, 2 configuration invalide, 1 autre erreur.
"""
import argparse
import sys
from typing import List, Optional, Sequence

from algorithms.registry import ALGORITHM_TAGS
from config.settings import parse_config
from core.errors import ConfigError, PersoFedError
from cli.fig2 import run_fig2_study
from cli.runner import resume_experiment, run_experiment, run_sweep
from utils.log import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"graine entière attendue: {value!r}")
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError(f"graine hors de [0, 2^64): {value}")
    return seed


def _seed_list(value: str) -> List[int]:
    return [_seed(part.strip()) for part in value.split(",") if part.strip()]


def _positive(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"entier attendu: {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"entier >= 1 attendu: {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persofed",
        description="Simulateur déterministe d'apprentissage fédéré personnalisé",
    )
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="Journalisation détaillée (niveau DEBUG)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Exécuter un run (config, graine)")
    run.add_argument("--config", "-c", help="Fichier de configuration JSON (ou YAML)")
    run.add_argument("--seed", "-s", type=_seed, help="Graine du run, entier 64 bits")
    run.add_argument("--algo", choices=ALGORITHM_TAGS,
                     help="Algorithme, remplace federation.algorithm")
    run.add_argument("--rounds", type=_positive, help="Nombre de rounds T, remplace federation.rounds")
    run.add_argument("--out", help="Dossier parent des runs, remplace output.directory")
    run.add_argument("--resume", metavar="CHECKPOINT",
                     help="Reprendre depuis un checkpoint-rNNNN.json")

    sweep = subparsers.add_parser("sweep", help="Balayer graines × algorithmes de 'compare'")
    sweep.add_argument("--config", "-c", required=True, help="Fichier de configuration JSON (ou YAML)")
    sweep.add_argument("--seeds", type=_seed_list,
                       help="Graines séparées par des virgules (défaut: 'seeds' de la config)")
    sweep.add_argument("--out", help="Dossier parent, remplace output.directory")

    fig2 = subparsers.add_parser("fig2", help="Personnalisation explicite vs fine-tuning sur FedAvg")
    fig2.add_argument("--config", "-c", required=True, help="Fichier de configuration JSON (ou YAML)")
    fig2.add_argument("--seeds", type=_seed_list,
                      help="Graines séparées par des virgules (défaut: 'seeds' de la config)")
    fig2.add_argument("--out", help="Dossier parent, remplace output.directory")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "federation.algorithm": getattr(args, "algo", None),
        "federation.rounds": getattr(args, "rounds", None),
        "output.directory": getattr(args, "out", None),
    }


def _command_run(args: argparse.Namespace) -> int:
    if args.resume:
        result = resume_experiment(args.resume, rounds=args.rounds)
    else:
        if not args.config:
            raise ConfigError([("--config", "config required")])
        if args.seed is None:
            raise ConfigError([("--seed", "seed required")])
        config = parse_config(args.config, overrides=_overrides(args))
        result = run_experiment(config, args.seed)
    logger.info(f"✅ {result.algorithm} s{result.seed}: précision moyenne finale "
                f"{result.final_mean_acc:.4f} → {result.directory}")
    return EXIT_OK


def _command_sweep(args: argparse.Namespace) -> int:
    config = parse_config(args.config, overrides=_overrides(args))
    seeds = args.seeds if args.seeds is not None else config.seeds
    result = run_sweep(config, seeds)
    for entry in result.summary.itertuples(index=False):
        logger.info(f"📊 {entry.algorithm}: {entry.mean_acc:.4f} ± {entry.std_acc:.4f} "
                    f"({entry.n_seeds} graine(s))")
    logger.info(f"✅ Balayage terminé → {result.directory}")
    return EXIT_OK


def _command_fig2(args: argparse.Namespace) -> int:
    config = parse_config(args.config, overrides=_overrides(args))
    result = run_fig2_study(config, seeds=args.seeds)
    logger.info(f"✅ Étude terminée → {result.directory}")
    return EXIT_OK


COMMANDS = {
    "run": _command_run,
    "sweep": _command_sweep,
    "fig2": _command_fig2,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Point d'entrée CLI principal"""
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else None)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"❌ Configuration invalide: {e}")
        return EXIT_CONFIG
    except PersoFedError as e:
        logger.error(f"❌ Erreur: {e}")
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"❌ Erreur d'écriture: {e}")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.warning("⚠️ Interrompu par l'utilisateur")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
