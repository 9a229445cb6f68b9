"""
Entraînement local: SGD-momentum par mini-batch, FedAvg et fine-tuning
"""
from typing import Callable, Iterator, List, Optional, Tuple

from core.federation import FederationConfig
from core.numerics import ParamVector, SeededRng
from generators.dataset import Dataset
from models.classifiers import Batch, ModelSpec, risk_grad
from models.optimizer import OptimizerState, sgd_step

StepHook = Callable[[ParamVector], None]


def train_set(client) -> Dataset:
    """Jeu d'entraînement d'un ``ClientState`` ou d'un ``ClientDataset``"""
    data = getattr(client, "data", client)
    return data.train


def iterate_batches(data: Dataset, batch_size: int, rng: SeededRng) -> Iterator[Batch]:
    """Une époque: permutation tirée de ``rng`` puis tranches de ``batch_size``"""
    if batch_size < 1:
        raise ValueError(f"batch_size doit être >= 1, reçu {batch_size}")
    order = rng.permutation(data.n_samples)
    for start in range(0, data.n_samples, batch_size):
        rows = order[start:start + batch_size]
        yield Batch(data.features[rows], data.labels[rows])


def run_local_sgd(spec: ModelSpec,
                  theta: ParamVector,
                  data: Dataset,
                  epochs: int,
                  batch_size: int,
                  lr: float,
                  momentum: float,
                  rng: SeededRng,
                  extra_grad: Optional[ParamVector] = None,
                  after_step: Optional[StepHook] = None) -> Tuple[ParamVector, OptimizerState]:
    """Époques de SGD-momentum depuis ``theta`` (copie), vitesse initiale nulle

    ``extra_grad`` est ajouté au gradient de chaque batch; ``after_step`` est
    appelé avec le θ obtenu après chaque pas.
    """
    state = OptimizerState.fresh(theta.shape[0], momentum, lr)
    theta = theta.copy()
    for _ in range(epochs):
        for batch in iterate_batches(data, batch_size, rng):
            grad = risk_grad(spec, theta, batch)
            if extra_grad is not None:
                grad = grad + extra_grad
            theta, state = sgd_step(state, theta, grad)
            if after_step is not None:
                after_step(theta)
    return theta, state


def client_update_fedavg(client,
                         theta_glob: ParamVector,
                         config: FederationConfig,
                         spec: ModelSpec,
                         rng: SeededRng) -> ParamVector:
    """θ ← θ_glob puis E époques de SGD-momentum sur le risque local"""
    theta, _ = run_local_sgd(spec, theta_glob, train_set(client), config.local_epochs,
                             config.batch_size, config.eta1, config.momentum, rng)
    return theta


def fine_tune(theta: ParamVector,
              client,
              epochs: int,
              lr: float,
              spec: ModelSpec,
              momentum: float = 0.9,
              batch_size: Optional[int] = None,
              rng: Optional[SeededRng] = None) -> ParamVector:
    """SGD-momentum local depuis ``theta``

    Sans ``batch_size``, chaque époque est un pas de gradient plein (aucun
    tirage aléatoire).
    """
    if epochs < 0:
        raise ValueError(f"epochs doit être >= 0, reçu {epochs}")
    data = train_set(client)
    if batch_size is None:
        return fine_tune_trajectory(theta, data, epochs, lr, spec, momentum)[-1]
    tuned, _ = run_local_sgd(spec, theta, data, epochs, batch_size, lr, momentum,
                             rng if rng is not None else SeededRng(0))
    return tuned


def fine_tune_trajectory(theta: ParamVector,
                         data: Dataset,
                         steps: int,
                         lr: float,
                         spec: ModelSpec,
                         momentum: float = 0.0) -> List[ParamVector]:
    """Pas de gradient plein successifs; l'élément 0 est le point de départ"""
    state = OptimizerState.fresh(theta.shape[0], momentum, lr)
    current = theta.copy()
    trajectory = [current]
    for _ in range(steps):
        current, state = sgd_step(state, current, risk_grad(spec, current, data))
        trajectory.append(current)
    return trajectory
