"""
Arithmétique vectorielle dense et aléa reproductible

Un ``ParamVector`` est un ``numpy.ndarray`` 1-D en float64. Toutes les
opérations publiques renvoient un nouveau tableau et ne modifient jamais
leurs entrées.

``SeededRng`` enveloppe le générateur PCG64 de numpy (algorithme documenté,
flux de bits identique sur toutes les plateformes). Les graines enfants sont
dérivées par mélange SplitMix64, ce qui permet de donner à chaque client et
à chaque round son propre flux sans partager d'instance entre workers.
"""
import hashlib
from typing import Optional, Sequence, Union

import numpy as np

from core.errors import DimensionMismatchError, NonFiniteError

ParamVector = np.ndarray

MASK64 = (1 << 64) - 1


def as_param_vector(values: Union[Sequence[float], np.ndarray]) -> ParamVector:
    """Convertir en vecteur float64 1-D fini (copie)"""
    vector = np.array(values, dtype=np.float64).reshape(-1)
    if vector.size == 0:
        raise DimensionMismatchError(1, 0, "ParamVector vide")
    check_finite(vector, "ParamVector")
    return vector


def zeros(dim: int) -> ParamVector:
    """Vecteur nul de dimension ``dim``"""
    if dim < 1:
        raise DimensionMismatchError(1, dim, "ParamVector vide")
    return np.zeros(dim, dtype=np.float64)


def check_finite(vector: np.ndarray, what: str = "vecteur"):
    """Lever ``NonFiniteError`` sur la première coordonnée non finie"""
    finite = np.isfinite(vector)
    if not finite.all():
        index = int(np.flatnonzero(~finite.reshape(-1))[0])
        raise NonFiniteError(what, index, float(vector.reshape(-1)[index]))


def check_same_dim(a: np.ndarray, b: np.ndarray, what: str = "vecteur"):
    """Lever ``DimensionMismatchError`` si les dimensions diffèrent"""
    if a.shape[-1] != b.shape[-1] or a.ndim != 1 or b.ndim != 1:
        raise DimensionMismatchError(a.shape[-1], b.shape[-1], what)


def dot(a: ParamVector, b: ParamVector) -> float:
    """Produit scalaire Σ aₖ·bₖ"""
    check_same_dim(a, b, "dot")
    return float(np.dot(a, b))


def axpy(alpha: float, x: ParamVector, y: ParamVector) -> ParamVector:
    """Renvoie alpha·x + y"""
    check_same_dim(x, y, "axpy")
    result = alpha * x + y
    check_finite(result, "axpy")
    return result


def weighted_sum(vectors: Sequence[ParamVector], weights: Sequence[float]) -> ParamVector:
    """Σᵢ wᵢ·vᵢ, sommé de gauche à droite"""
    if not vectors:
        raise ValueError("weighted_sum: liste vide")
    if len(vectors) != len(weights):
        raise DimensionMismatchError(len(vectors), len(weights), "nombre de poids")
    for weight in weights:
        if not np.isfinite(weight):
            raise NonFiniteError("poids", None, float(weight))

    first = vectors[0]
    total = weights[0] * first
    for vector, weight in zip(vectors[1:], weights[1:]):
        check_same_dim(first, vector, "weighted_sum")
        total = total + weight * vector
    check_finite(total, "weighted_sum")
    return total


def _splitmix64(state: int) -> int:
    """Une étape SplitMix64 (Steele, Lea & Flood)"""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _key_to_int(key: Union[int, str]) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & MASK64
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    """Graine enfant déterministe pour (seed, clé1, clé2, ...)"""
    state = _splitmix64(int(seed) & MASK64)
    for key in keys:
        state = _splitmix64(state ^ _key_to_int(key))
    return state


class SeededRng:
    """Générateur pseudo-aléatoire à graine, propriété d'un seul worker"""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.stream_position = 0
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def fork(self, *keys: Union[int, str]) -> "SeededRng":
        """Flux indépendant dérivé de la graine (ne consomme rien ici)"""
        return SeededRng(derive_seed(self.seed, *keys))

    def _advance(self, count: int):
        self.stream_position += int(count)

    def next_u64(self) -> int:
        self._advance(1)
        return int(self._generator.integers(0, MASK64, dtype=np.uint64, endpoint=True))

    def uniform(self, size: Optional[int] = None):
        self._advance(1 if size is None else size)
        return self._generator.random(size)

    def normal(self, size=None, scale: float = 1.0):
        self._advance(1 if size is None else int(np.prod(size)))
        return self._generator.normal(0.0, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        self._advance(n)
        return self._generator.permutation(n)

    def sample_without_replacement(self, n: int, m: int) -> np.ndarray:
        self._advance(m)
        return self._generator.choice(n, size=m, replace=False)

    def dirichlet(self, alpha: np.ndarray) -> np.ndarray:
        self._advance(len(alpha))
        return self._generator.dirichlet(alpha)

    def multinomial(self, n: int, pvals: np.ndarray) -> np.ndarray:
        self._advance(len(pvals))
        return self._generator.multinomial(n, pvals)
