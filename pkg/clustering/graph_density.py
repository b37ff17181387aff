"""
Graph Density coreset selection.

Builds a mutual k-nearest-neighbour graph with Gaussian edge weights, then
greedily picks the densest remaining node and damps its neighbours so the
next pick comes from a different region.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist
from tqdm import tqdm

from common.errors import InputError
from embedding.store import EmbeddingMatrix

logger = logging.getLogger(__name__)

KNN_CHUNK_ROWS = 512


def knn_indices(X: np.ndarray, knn: int) -> tuple:
    """
    Indices and squared distances of each row's `knn` nearest other rows.

    Neighbours are ordered by (distance, index); a row is never its own neighbour.
    """
    n = X.shape[0]
    neighbours = np.empty((n, knn), dtype=np.int64)
    distances = np.empty((n, knn), dtype=np.float64)
    for start in range(0, n, KNN_CHUNK_ROWS):
        stop = min(start + KNN_CHUNK_ROWS, n)
        d2 = cdist(X[start:stop], X, metric="sqeuclidean")
        rows = np.arange(stop - start)
        d2[rows, rows + start] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")[:, :knn]
        neighbours[start:stop] = order
        distances[start:stop] = np.take_along_axis(d2, order, axis=1)
    return neighbours, distances


def mutual_knn_graph(X: np.ndarray, knn: int, gamma: float) -> sparse.csr_matrix:
    """Symmetric weight matrix: w(i,j) = exp(-gamma*||xi-xj||^2) iff i and j list each other."""
    n = X.shape[0]
    neighbours, distances = knn_indices(X, knn)
    rows = np.repeat(np.arange(n), knn)
    weights = np.exp(-gamma * distances.ravel())
    directed = sparse.csr_matrix((weights, (rows, neighbours.ravel())), shape=(n, n))
    mask = (directed > 0).astype(np.float64)
    mutual = mask.multiply(mask.T)
    return sparse.csr_matrix(directed.multiply(mutual))


def graph_density_select(emb: EmbeddingMatrix, count: int, knn: int = 10,
                         gamma: Optional[float] = None, progress: bool = False) -> List[int]:
    """
    Select `count` ids by greedy density with neighbour damping.

    Args:
        emb: Embedding matrix
        count: Number of ids to select, 1 <= count <= n
        knn: Neighbours per node, 1 <= knn < n
        gamma: Kernel width (> 0); defaults to 1/dim
        progress: Show a tqdm progress bar

    Returns:
        List[int]: selected ids in pick order
    """
    n = len(emb)
    if not 1 <= count <= n:
        raise InputError(f"count must be in [1, {n}], got {count}")
    if not 1 <= knn < n:
        raise InputError(f"knn must be in [1, {n}), got {knn}")
    if gamma is None:
        gamma = 1.0 / emb.dim
    if gamma <= 0:
        raise InputError(f"gamma must be > 0, got {gamma}")

    graph = mutual_knn_graph(emb.vectors, knn, gamma)
    density = np.asarray(graph.sum(axis=1)).ravel()
    logger.debug(f"Graph density: {graph.nnz} mutual edges, {int((density == 0).sum())} isolated nodes")

    picks: List[int] = []
    for _ in tqdm(range(count), desc="graph-density", disable=not progress, leave=False):
        p = int(np.argmax(density))
        picks.append(p)
        start, stop = graph.indptr[p], graph.indptr[p + 1]
        cols, w = graph.indices[start:stop], graph.data[start:stop]
        density[cols] *= 1.0 - w
        density[picks] = -1.0

    logger.info(f"Graph Density selected {count} of {n} points (knn={knn}, gamma={gamma:.4g})")
    return [int(emb.ids[i]) for i in picks]


def initial_density(emb: EmbeddingMatrix, knn: int = 10, gamma: Optional[float] = None) -> np.ndarray:
    """Per-row density before any pick."""
    gamma = 1.0 / emb.dim if gamma is None else gamma
    graph = mutual_knn_graph(emb.vectors, knn, gamma)
    return np.asarray(graph.sum(axis=1)).ravel()
