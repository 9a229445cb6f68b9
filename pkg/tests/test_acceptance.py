"""
Réplications longues sur la configuration de bureau (marqueur slow)
"""
import os

import pytest

from cli.fig2 import run_fig2_study
from cli.runner import run_sweep
from config.settings import parse_config

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")

pytestmark = pytest.mark.slow


def test_pgfed_beats_baselines_on_desk_config(tmp_path):
    config = parse_config(os.path.join(CONFIGS, "desk.json"),
                          overrides={"output.directory": str(tmp_path),
                                     "compare": ["pgfed", "fedavg_finetune", "local"]})
    result = run_sweep(config, config.seeds)

    finals = result.runs.pivot(index="seed", columns="algorithm", values="final_mean_acc")
    assert len(finals) == 5
    assert int((finals["pgfed"] >= finals["fedavg_finetune"]).sum()) >= 4
    assert finals["pgfed"].mean() >= finals["local"].mean()


def test_explicit_personalization_wins_on_most_seeds(tmp_path):
    config = parse_config(os.path.join(CONFIGS, "fig2.json"),
                          overrides={"output.directory": str(tmp_path)})
    result = run_fig2_study(config)
    assert result.explicit_wins() >= 4
