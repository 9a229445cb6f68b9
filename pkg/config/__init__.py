"""
Configuration des expériences
"""
from .settings import (
    DatasetConfig, EvalConfig, ExperimentConfig, ModelConfig, OracleConfig, OutputConfig,
    max_workers_from_env, parse_config, save_config,
)

__all__ = [
    "DatasetConfig", "EvalConfig", "ExperimentConfig", "ModelConfig", "OracleConfig", "OutputConfig",
    "max_workers_from_env", "parse_config", "save_config",
]
