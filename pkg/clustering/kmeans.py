"""
K-Means over embedding rows.

Initialization is k-means++ with a seeded generator; Lloyd iterations run
until the largest centroid shift is within `tol` or `max_iters` is reached.
Empty clusters are re-seeded from the point farthest from its centroid so k
stays fixed.

Work is split into fixed-size row chunks. Chunk boundaries never depend on
the thread count and partial sums are reduced in chunk order, so results are
bit-identical for any number of threads; threads=1 is the reference path.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from common.errors import InputError, InvariantViolation
from embedding.store import EmbeddingMatrix

logger = logging.getLogger(__name__)

CHUNK_ROWS = 2048
INERTIA_RTOL = 1e-9


@dataclass
class ClusterModel:
    """Centroids plus the cluster index of every sample."""
    k: int
    centroids: np.ndarray
    ids: np.ndarray
    labels: np.ndarray
    inertia: float
    n_iter: int = 0
    inertia_history: List[float] = field(default_factory=list)

    @property
    def assignment(self) -> Dict[int, int]:
        return {int(sample_id): int(label) for sample_id, label in zip(self.ids, self.labels)}

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def members(self) -> Dict[int, List[int]]:
        """Cluster index -> member ids in ascending id order; every index present."""
        groups: Dict[int, List[int]] = {c: [] for c in range(self.k)}
        for sample_id, label in sorted(zip(self.ids.tolist(), self.labels.tolist())):
            groups[label].append(sample_id)
        return groups

    def partition(self) -> frozenset:
        """Label-free view: set of member-id sets."""
        return frozenset(frozenset(m) for m in self.members().values() if m)


def _chunks(n: int) -> List[Tuple[int, int]]:
    return [(start, min(start + CHUNK_ROWS, n)) for start in range(0, n, CHUNK_ROWS)]


def _map_chunks(fn, n: int, threads: int) -> list:
    spans = _chunks(n)
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda span: fn(*span), spans))
    return [fn(*span) for span in spans]


def assign(X: np.ndarray, centroids: np.ndarray, threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nearest-centroid labels (ties -> lowest index) and exact squared distances.
    """
    c_sq = np.einsum("ij,ij->i", centroids, centroids)

    def work(start: int, stop: int):
        block = X[start:stop]
        d2 = c_sq[None, :] - 2.0 * block @ centroids.T
        labels = np.argmin(d2, axis=1)
        diff = block - centroids[labels]
        return labels, np.einsum("ij,ij->i", diff, diff)

    parts = _map_chunks(work, X.shape[0], threads)
    labels = np.concatenate([p[0] for p in parts])
    dist = np.concatenate([p[1] for p in parts])
    return labels, dist


def centroid_sums(X: np.ndarray, labels: np.ndarray, k: int, threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Per-cluster coordinate sums and counts, reduced chunk by chunk in fixed order."""
    def work(start: int, stop: int):
        block, block_labels = X[start:stop], labels[start:stop]
        sums = np.empty((k, X.shape[1]), dtype=np.float64)
        for j in range(X.shape[1]):
            sums[:, j] = np.bincount(block_labels, weights=block[:, j], minlength=k)
        counts = np.bincount(block_labels, minlength=k)
        return sums, counts

    parts = _map_chunks(work, X.shape[0], threads)
    sums = np.zeros((k, X.shape[1]), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for part_sums, part_counts in parts:
        sums += part_sums
        counts += part_counts
    return sums, counts


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding; falls back to the lowest unused index when all distances are 0."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = np.einsum("ij,ij->i", X - X[chosen[0]], X - X[chosen[0]])

    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            used = set(chosen)
            nxt = next(i for i in range(n) if i not in used)
        chosen.append(nxt)
        diff = X - X[nxt]
        closest = np.minimum(closest, np.einsum("ij,ij->i", diff, diff))

    return X[chosen].copy()


def _update(X: np.ndarray, labels: np.ndarray, dist: np.ndarray, centroids: np.ndarray,
            threads: int) -> np.ndarray:
    k = centroids.shape[0]
    sums, counts = centroid_sums(X, labels, k, threads)
    new = centroids.copy()
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]

    empty = np.flatnonzero(~filled)
    if empty.size:
        far = dist.copy()
        for c in empty:
            idx = int(np.argmax(far))
            new[c] = X[idx]
            far[idx] = -1.0
        logger.debug(f"Re-seeded {empty.size} empty clusters from farthest points")
    return new


def kmeans(emb: EmbeddingMatrix, k: int, seed: int = 0, max_iters: int = 100, tol: float = 1e-6,
           threads: int = 1) -> ClusterModel:
    """
    Partition embedding rows into k clusters.

    Args:
        emb: Embedding matrix (n rows)
        k: Number of clusters, 1 <= k <= n
        seed: Seed for k-means++ initialization
        max_iters: Maximum Lloyd iterations (>= 1)
        tol: Stop once the largest centroid shift is <= tol (>= 0)
        threads: Worker threads for chunked assignment/accumulation

    Returns:
        ClusterModel: final centroids, labels consistent with them, and inertia

    Raises:
        InputError: parameter out of range
        InvariantViolation: inertia increased between iterations
    """
    n = len(emb)
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if k > n:
        raise InputError(f"k={k} exceeds the number of samples n={n}")
    if max_iters < 1:
        raise InputError(f"max_iters must be >= 1, got {max_iters}")
    if tol < 0:
        raise InputError(f"tol must be >= 0, got {tol}")

    X = emb.vectors
    rng = np.random.default_rng(seed)
    centroids = kmeans_plus_plus(X, k, rng)
    labels, dist = assign(X, centroids, threads)
    inertia = float(dist.sum())
    history = [inertia]

    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        new_centroids = _update(X, labels, dist, centroids, threads)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids

        labels, dist = assign(X, centroids, threads)
        new_inertia = float(dist.sum())
        if new_inertia > inertia * (1.0 + INERTIA_RTOL) + 1e-12:
            raise InvariantViolation(f"k-means inertia increased at iteration {n_iter}: "
                                     f"{inertia!r} -> {new_inertia!r}")
        inertia = new_inertia
        history.append(inertia)
        logger.debug(f"k-means iteration {n_iter}: inertia={inertia:.6f} shift={shift:.3e}")

        if shift <= tol:
            break

    logger.info(f"K-Means k={k} on {n} points converged in {n_iter} iterations, inertia={inertia:.4f}")
    return ClusterModel(k=k, centroids=centroids, ids=emb.ids.copy(), labels=labels.astype(np.int64),
                        inertia=inertia, n_iter=n_iter, inertia_history=history)


def recompute_inertia(emb: EmbeddingMatrix, model: ClusterModel) -> float:
    diff = emb.vectors - model.centroids[model.labels]
    return float(np.einsum("ij,ij->", diff, diff))


def model_from_assignment(emb: EmbeddingMatrix, assignment: Dict[int, int], k: int,
                          centroids: Optional[np.ndarray] = None) -> ClusterModel:
    """
    Rebuild a ClusterModel from an id -> cluster map (for example, read back from disk).

    Centroids default to member means; inertia is recomputed.
    """
    missing = [int(i) for i in emb.ids if int(i) not in assignment]
    if missing:
        raise InputError(f"cluster assignment missing ids: {missing[:10]}")
    labels = np.asarray([assignment[int(i)] for i in emb.ids], dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InputError(f"cluster index out of range [0, {k})")

    if centroids is None:
        sums, counts = centroid_sums(emb.vectors, labels, k)
        centroids = np.zeros_like(sums)
        filled = counts > 0
        centroids[filled] = sums[filled] / counts[filled, None]

    model = ClusterModel(k=k, centroids=np.asarray(centroids, dtype=np.float64), ids=emb.ids.copy(),
                         labels=labels, inertia=0.0)
    model.inertia = recompute_inertia(emb, model)
    return model
