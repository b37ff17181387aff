"""
K-Center Greedy coreset selection.

Starting from one seeded random point, repeatedly add the point whose minimum
Euclidean distance to the chosen set is largest (ties -> lowest id).
"""

import logging
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from common.errors import InputError
from embedding.store import EmbeddingMatrix

logger = logging.getLogger(__name__)


def _sq_dist_to(X: np.ndarray, point: np.ndarray) -> np.ndarray:
    diff = X - point
    return np.einsum("ij,ij->i", diff, diff)


def kcenter_greedy(emb: EmbeddingMatrix, count: int, seed: int = 0,
                   first_index: Optional[int] = None, progress: bool = False) -> List[int]:
    """
    Select `count` ids by farthest-point traversal.

    Args:
        emb: Embedding matrix
        count: Number of ids to select, 1 <= count <= n
        seed: Seed for the random first pick
        first_index: Row index of the first pick, overriding the seeded draw
        progress: Show a tqdm progress bar

    Returns:
        List[int]: selected ids in pick order
    """
    n = len(emb)
    if not 1 <= count <= n:
        raise InputError(f"count must be in [1, {n}], got {count}")

    X = emb.vectors
    if first_index is None:
        first_index = int(np.random.default_rng(seed).integers(n))
    elif not 0 <= first_index < n:
        raise InputError(f"first_index must be in [0, {n}), got {first_index}")

    picks = [first_index]
    # squared distances share the argmax of distances
    mins = _sq_dist_to(X, X[first_index])
    mins[first_index] = -1.0

    for _ in tqdm(range(1, count), desc="k-center", disable=not progress, leave=False):
        nxt = int(np.argmax(mins))
        picks.append(nxt)
        mins = np.minimum(mins, _sq_dist_to(X, X[nxt]))
        mins[nxt] = -1.0

    logger.info(f"K-Center Greedy selected {count} of {n} points")
    return [int(emb.ids[i]) for i in picks]


def covering_radius(X: np.ndarray, centers: List[int]) -> float:
    """Largest distance from any row of X to its nearest center row."""
    best = np.full(X.shape[0], np.inf)
    for c in centers:
        best = np.minimum(best, _sq_dist_to(X, X[c]))
    return float(np.sqrt(best.max()))
