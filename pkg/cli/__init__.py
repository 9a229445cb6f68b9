"""
Interface en ligne de commande et orchestration des expériences
"""
from .runner import RunResult, SweepResult, build_simulation, resume_experiment, run_experiment, run_sweep
from .fig2 import Fig2Result, run_fig2_study

__all__ = [
    "RunResult", "SweepResult", "build_simulation", "resume_experiment", "run_experiment", "run_sweep",
    "Fig2Result", "run_fig2_study",
]
