"""
Cœur du simulateur: arithmétique, état fédéré, boucle serveur, canal, reprise

Seuls les modules sans dépendance vers les autres paquets sont réexportés ici;
``core.federation``, ``core.engine``, ``core.wire`` et ``core.checkpoint``
s'importent explicitement.
"""
from .errors import (
    ClientUpdateError, ConfigError, DatasetError, DimensionMismatchError,
    NonFiniteError, OutputError, PersoFedError, SweepError,
)
from .numerics import ParamVector, SeededRng, axpy, derive_seed, dot, weighted_sum
