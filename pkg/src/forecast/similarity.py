"""Cosine similarity and similarity-based client selection."""

import logging
from typing import Sequence, Union

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics.pairwise import cosine_similarity as _pairwise_cosine

from ..domain.resources import ResourceVector
from .training import LocalUpdate

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.9

VectorLike = Union[ResourceVector, Sequence[float], NDArray[np.float64]]


class ZeroVector(ValueError):
    """Cosine similarity is undefined for a zero vector."""


def _as_array(vec: VectorLike) -> NDArray[np.float64]:
    if isinstance(vec, ResourceVector):
        return vec.as_array()
    return np.asarray(vec, dtype=np.float64).ravel()


def cosine_similarity(vec_a: VectorLike, vec_b: VectorLike) -> float:
    """
    Compute cosine similarity between two vectors.

    cos(θ) = (A · B) / (||A|| × ||B||)

    Args:
        vec_a: First vector (ResourceVector or 1D array)
        vec_b: Second vector of the same dimension

    Returns:
        Cosine similarity in range [-1, 1]

    Raises:
        ZeroVector: if either vector has zero norm
    """
    a = _as_array(vec_a)
    b = _as_array(vec_b)
    if a.shape != b.shape:
        raise ValueError(f"Dimension mismatch: {a.shape} vs {b.shape}")

    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise ZeroVector("Cosine similarity is undefined for a zero vector")

    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def similarity_matrix(signatures: NDArray[np.float64]) -> NDArray[np.float64]:
    """Pairwise cosine similarities of the rows of a (n, d) matrix."""
    signatures = np.asarray(signatures, dtype=np.float64)
    if np.any(np.linalg.norm(signatures, axis=1) == 0):
        raise ZeroVector("A usage signature is the zero vector")
    return np.clip(_pairwise_cosine(signatures), -1.0, 1.0)


def _best_clique(adjacency: list[set[int]]) -> tuple[int, ...]:
    """Largest clique, ties broken by the lexicographically smallest index tuple."""
    best: tuple[int, ...] = ()

    def expand(clique: list[int], candidates: set[int], excluded: set[int]) -> None:
        nonlocal best
        if not candidates and not excluded:
            found = tuple(sorted(clique))
            if len(found) > len(best) or (len(found) == len(best) and found < best):
                best = found
            return
        if len(clique) + len(candidates) < len(best):
            return
        pivot = max(candidates | excluded, key=lambda u: (len(adjacency[u] & candidates), -u))
        for v in sorted(candidates - adjacency[pivot]):
            expand(clique + [v], candidates & adjacency[v], excluded & adjacency[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    expand([], set(range(len(adjacency))), set())
    return best


def select_similar(
    updates: list[LocalUpdate],
    tau: float = DEFAULT_TAU,
) -> list[LocalUpdate]:
    """
    Select the largest group of clients with mutually similar usage.

    Every pair in the group has signature cosine similarity >= tau. If no
    group larger than one exists, the most similar pair is returned, so at
    least two clients are always selected.

    Args:
        updates: Local updates of n >= 2 clients
        tau: Similarity threshold (tau = -1 selects everyone)

    Returns:
        Selected updates sorted by client_id
    """
    if len(updates) < 2:
        raise ValueError(f"Selection needs at least 2 clients, got {len(updates)}")

    ordered = sorted(updates, key=lambda u: u.client_id)
    sims = similarity_matrix(np.vstack([u.usage_signature for u in ordered]))
    n = len(ordered)
    adjacency = [
        {j for j in range(n) if j != i and sims[i, j] >= tau}
        for i in range(n)
    ]
    chosen = _best_clique(adjacency)

    if len(chosen) <= 1:
        best_pair = (0, 1)
        for i in range(n):
            for j in range(i + 1, n):
                if sims[i, j] > sims[best_pair]:
                    best_pair = (i, j)
        chosen = best_pair
        logger.info(
            f"No similar group at tau={tau}; falling back to pair "
            f"{ordered[chosen[0]].client_id}, {ordered[chosen[1]].client_id}"
        )

    return [ordered[i] for i in chosen]
