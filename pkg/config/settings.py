"""
Configuration des expériences

Un document JSON (ou YAML) à blocs imbriqués: dataset, model, federation,
eval, oracle, output, plus ``name``, ``seeds`` et ``compare`` au premier
niveau. Les clés inconnues sont des erreurs; toutes les violations sont
rassemblées dans une seule ``ConfigError``.
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import yaml

from algorithms.registry import ALGORITHM_TAGS
from core.errors import ConfigError
from core.federation import FederationConfig
from models.classifiers import MLP_1HIDDEN, MODEL_KINDS, SOFTMAX_LINEAR, ModelSpec

DATASET_SOURCES = ("synthetic", "csv")
MAX_WORKERS_ENV = "PERSOFED_MAX_WORKERS"

Violation = Tuple[str, str]


@dataclass
class DatasetConfig:
    """Source des données et partition"""
    source: str = "synthetic"
    path: Optional[str] = None
    label_column: str = "label"
    n_classes: int = 10
    n_features: int = 20
    n_samples: int = 2000
    class_separation: float = 3.0
    dirichlet_alpha: float = 0.3
    test_fraction: float = 0.25
    standardize: bool = True


@dataclass
class ModelConfig:
    kind: str = SOFTMAX_LINEAR
    hidden_dim: int = 32
    l2: float = 0.0

    def to_spec(self, n_features: int, n_classes: int) -> ModelSpec:
        hidden = self.hidden_dim if self.kind == MLP_1HIDDEN else 0
        return ModelSpec(self.kind, n_features, n_classes, hidden, self.l2)


@dataclass
class EvalConfig:
    """Évaluation: cadence d'écriture des métriques, seuil, fine-tuning"""
    eval_every: int = 1
    threshold: float = 0.7
    finetune_epochs: int = 1


@dataclass
class OracleConfig:
    """Oracle explicite: S pas de gradient plein"""
    steps: int = 6
    mu: float = 1.0
    lr: float = 0.1


@dataclass
class OutputConfig:
    directory: str = "runs"
    checkpoint_every: int = 0


@dataclass
class ExperimentConfig:
    """Configuration complète d'une expérience"""
    federation: FederationConfig = field(default_factory=lambda: FederationConfig(algorithm=""))
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    name: str = "experiment"
    seeds: List[int] = field(default_factory=list)
    compare: List[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Construire et valider; lève ``ConfigError`` avec toutes les violations"""
        errors: List[Violation] = []
        if not isinstance(data, dict):
            raise ConfigError([("<racine>", "objet JSON attendu")])
        _check_keys(data, "", [f.name for f in fields(cls)], errors)

        config = cls(
            federation=_create_federation_config(_block(data, "federation", errors), errors),
            dataset=_create_block(DatasetConfig, _block(data, "dataset", errors), "dataset", errors),
            model=_create_block(ModelConfig, _block(data, "model", errors), "model", errors),
            eval=_create_block(EvalConfig, _block(data, "eval", errors), "eval", errors),
            oracle=_create_block(OracleConfig, _block(data, "oracle", errors), "oracle", errors),
            output=_create_block(OutputConfig, _block(data, "output", errors), "output", errors),
            name=_typed(data.get("name", "experiment"), str, "name", errors, "experiment"),
            seeds=_int_list(data.get("seeds", []), "seeds", errors),
            compare=_str_list(data.get("compare", []), "compare", errors),
        )
        errors.extend(config.validate_config())
        if errors:
            raise ConfigError(_unique(errors))
        return config

    def to_dict(self) -> Dict[str, Any]:
        federation = asdict(self.federation)
        federation.pop("seed")
        return {
            "name": self.name,
            "seeds": list(self.seeds),
            "compare": list(self.compare),
            "dataset": asdict(self.dataset),
            "model": asdict(self.model),
            "federation": federation,
            "eval": asdict(self.eval),
            "oracle": asdict(self.oracle),
            "output": asdict(self.output),
        }

    def validate_config(self) -> List[Violation]:
        """Valider la configuration"""
        errors: List[Violation] = []
        fed = self.federation
        if not fed.algorithm:
            errors.append(("federation.algorithm", "algorithm required"))
        elif fed.algorithm not in ALGORITHM_TAGS:
            errors.append(("federation.algorithm", f"algorithm in {list(ALGORITHM_TAGS)}"))
        errors.extend((f"federation.{key}", constraint) for key, constraint in fed.validate())

        data = self.dataset
        if data.source not in DATASET_SOURCES:
            errors.append(("dataset.source", f"source in {list(DATASET_SOURCES)}"))
        if data.source == "csv" and not data.path:
            errors.append(("dataset.path", "path required for csv source"))
        if data.n_classes < 2:
            errors.append(("dataset.n_classes", "n_classes >= 2"))
        if data.n_features < 1:
            errors.append(("dataset.n_features", "n_features >= 1"))
        if data.n_samples < data.n_classes:
            errors.append(("dataset.n_samples", "n_samples >= n_classes"))
        if not data.class_separation >= 0:
            errors.append(("dataset.class_separation", "class_separation >= 0"))
        if not data.dirichlet_alpha > 0:
            errors.append(("dataset.dirichlet_alpha", "dirichlet_alpha > 0"))
        if not 0.0 < data.test_fraction < 1.0:
            errors.append(("dataset.test_fraction", "test_fraction in (0,1)"))

        if self.model.kind not in MODEL_KINDS:
            errors.append(("model.kind", f"kind in {list(MODEL_KINDS)}"))
        if self.model.kind == MLP_1HIDDEN and self.model.hidden_dim < 1:
            errors.append(("model.hidden_dim", "hidden_dim >= 1"))
        if not self.model.l2 >= 0:
            errors.append(("model.l2", "l2 >= 0"))

        if self.eval.eval_every < 1:
            errors.append(("eval.eval_every", "eval_every >= 1"))
        if not 0.0 <= self.eval.threshold <= 1.0:
            errors.append(("eval.threshold", "threshold in [0,1]"))
        if self.eval.finetune_epochs < 0:
            errors.append(("eval.finetune_epochs", "finetune_epochs >= 0"))

        if self.oracle.steps < 0:
            errors.append(("oracle.steps", "steps >= 0"))
        if not self.oracle.mu >= 0:
            errors.append(("oracle.mu", "mu >= 0"))
        if not self.oracle.lr >= 0:
            errors.append(("oracle.lr", "lr >= 0"))

        if not self.output.directory:
            errors.append(("output.directory", "directory required"))
        if self.output.checkpoint_every < 0:
            errors.append(("output.checkpoint_every", "checkpoint_every >= 0"))

        if not self.name or os.sep in self.name:
            errors.append(("name", "nom de fichier simple requis"))
        for seed in self.seeds:
            if not 0 <= seed < 2 ** 64:
                errors.append(("seeds", "seed in [0, 2^64)"))
        for tag in self.compare:
            if tag not in ALGORITHM_TAGS:
                errors.append(("compare", f"tag '{tag}' inconnu, attendu {list(ALGORITHM_TAGS)}"))
        return errors

    def with_run(self, algorithm: Optional[str] = None, seed: Optional[int] = None,
                 rounds: Optional[int] = None) -> "ExperimentConfig":
        """Copie avec algorithme, graine ou nombre de rounds remplacés"""
        changes = {}
        if algorithm is not None:
            changes["algorithm"] = algorithm
        if seed is not None:
            changes["seed"] = seed
        if rounds is not None:
            changes["rounds"] = rounds
        return replace(self, federation=replace(self.federation, **changes))


def _get_default_config() -> Dict[str, Any]:
    """Configuration par défaut (sans algorithme ni graines)"""
    defaults = ExperimentConfig().to_dict()
    defaults["federation"].pop("algorithm")
    return defaults


def _unique(errors: List[Violation]) -> List[Violation]:
    seen = []
    for error in errors:
        if error not in seen:
            seen.append(error)
    return seen


def _check_keys(data: Dict[str, Any], prefix: str, allowed: List[str], errors: List[Violation]):
    for key in data:
        if key not in allowed:
            errors.append((f"{prefix}{key}", "clé inconnue"))


def _block(data: Dict[str, Any], name: str, errors: List[Violation]) -> Dict[str, Any]:
    block = data.get(name, {})
    if not isinstance(block, dict):
        errors.append((name, "objet attendu"))
        return {}
    return block


def _typed(value: Any, expected: type, key: str, errors: List[Violation], default: Any) -> Any:
    """Vérifier le type d'une valeur; les entiers sont acceptés pour les réels"""
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is int and isinstance(value, bool):
        errors.append((key, "entier attendu"))
        return default
    if expected == Optional[str]:
        if value is None or isinstance(value, str):
            return value
        errors.append((key, "chaîne attendue"))
        return default
    if not isinstance(value, expected):
        errors.append((key, f"{expected.__name__} attendu"))
        return default
    return value


def _create_block(cls, data: Dict[str, Any], prefix: str, errors: List[Violation]):
    """Instancier un bloc dataclass en vérifiant clés et types"""
    known = {f.name: f for f in fields(cls)}
    _check_keys(data, f"{prefix}.", list(known), errors)
    defaults = cls()
    values = {}
    for name, spec in known.items():
        if name in data:
            values[name] = _typed(data[name], spec.type, f"{prefix}.{name}", errors, getattr(defaults, name))
    return cls(**values)


def _create_federation_config(data: Dict[str, Any], errors: List[Violation]) -> FederationConfig:
    known = {f.name: f for f in fields(FederationConfig) if f.name != "seed"}
    _check_keys(data, "federation.", list(known), errors)
    defaults = FederationConfig(algorithm="")
    values = {"algorithm": ""}
    for name, spec in known.items():
        if name in data:
            values[name] = _typed(data[name], spec.type, f"federation.{name}", errors, getattr(defaults, name))
    return FederationConfig(**values)


def _int_list(value: Any, key: str, errors: List[Violation]) -> List[int]:
    if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in value):
        errors.append((key, "liste d'entiers attendue"))
        return []
    return list(value)


def _str_list(value: Any, key: str, errors: List[Violation]) -> List[str]:
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        errors.append((key, "liste de chaînes attendue"))
        return []
    return list(value)


def _load_document(path: str) -> Dict[str, Any]:
    """Lire un document JSON (.json) ou YAML (autres extensions)"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            if path.endswith(".json"):
                return json.load(f)
            return yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ConfigError([("<fichier>", f"fichier introuvable: {path}")])
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError([("<fichier>", f"document illisible: {e}")])


def _apply_overrides(data: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Surcharges pointées, par exemple {"federation.rounds": 10}"""
    data = json.loads(json.dumps(data))
    for dotted, value in overrides.items():
        if value is None:
            continue
        target = data
        *parents, leaf = dotted.split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value
    return data


def parse_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Lire et valider entièrement un fichier de configuration"""
    data = _load_document(path)
    if overrides:
        data = _apply_overrides(data, overrides)
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path: str):
    """Écrire la configuration en JSON canonique (clés triées)"""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def max_workers_from_env(default: int = 1) -> int:
    """Plafond de workers parallèles (variable PERSOFED_MAX_WORKERS)"""
    raw = os.environ.get(MAX_WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError([(MAX_WORKERS_ENV, "entier >= 1 attendu")])
    if value < 1:
        raise ConfigError([(MAX_WORKERS_ENV, "entier >= 1 attendu")])
    return value
