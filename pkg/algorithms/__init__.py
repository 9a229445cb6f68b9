"""
Stratégies de mise à jour client: Local, FedAvg, fine-tuning, oracle explicite,
PGFed, PGFedMo et PGFed-CE
"""
from .local_training import client_update_fedavg, fine_tune, fine_tune_trajectory, iterate_batches, run_local_sgd
from .oracle import explicit_objective_grad, explicit_oracle_personalize, explicit_oracle_trajectories
from .pgfed import (
    ClientUpdatePayload, client_update_first_round, client_update_pgfed,
    client_update_pgfed_ce, momentum_aux_grad,
)
from .registry import ALGORITHM_TAGS, PGFED_FAMILY, Algorithm, build_algorithm
from .surrogate import Anchor, exact_alpha_provider, linearized_risk, make_anchor, surrogate_objective
