"""
Cluster assignment and centroid files.

clusters.jsonl:  {"id": int, "cluster": int} per sample
centroids.jsonl: header {k, inertia, n_iter}, then {"cluster": int, "centroid": [float, ...]}
"""

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from clustering.kmeans import ClusterModel, model_from_assignment
from common.errors import InputError
from embedding.store import EmbeddingMatrix
from storage.artifacts import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


def write_clusters(model: ClusterModel, clusters_path: Union[str, Path],
                   centroids_path: Union[str, Path]) -> None:
    write_jsonl(clusters_path, ({"id": int(i), "cluster": int(c)} for i, c in zip(model.ids, model.labels)))
    write_jsonl(
        centroids_path,
        ({"cluster": c, "centroid": model.centroids[c].tolist()} for c in range(model.k)),
        header={"k": model.k, "inertia": model.inertia, "n_iter": model.n_iter},
    )


def read_assignment(path: Union[str, Path]) -> Dict[int, int]:
    _, records = read_jsonl(path)
    assignment: Dict[int, int] = {}
    for record in records:
        try:
            sample_id, cluster = int(record["id"]), int(record["cluster"])
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"{path}: malformed cluster record {record!r}") from e
        if sample_id in assignment:
            raise InputError(f"{path}: duplicate id {sample_id}")
        assignment[sample_id] = cluster
    return assignment


def read_clusters(clusters_path: Union[str, Path], centroids_path: Union[str, Path],
                  emb: EmbeddingMatrix) -> ClusterModel:
    """
    Rebuild the ClusterModel written by write_clusters against its embeddings.

    Raises:
        InputError: ids that do not match the embeddings, or inconsistent centroids
    """
    assignment = read_assignment(clusters_path)
    unknown = sorted(set(assignment) - {int(i) for i in emb.ids})
    if unknown:
        raise InputError(f"cluster file has ids not in embeddings: {unknown[:10]}")

    header, records = read_jsonl(centroids_path)
    if header is None or "k" not in header:
        raise InputError(f"{centroids_path}: missing header with k")
    k = int(header["k"])
    centroids = np.zeros((k, emb.dim), dtype=np.float64)
    seen = set()
    for record in records:
        c = int(record["cluster"])
        vector = record["centroid"]
        if not 0 <= c < k or len(vector) != emb.dim:
            raise InputError(f"{centroids_path}: bad centroid record for cluster {c}")
        centroids[c] = vector
        seen.add(c)
    if len(seen) != k:
        raise InputError(f"{centroids_path}: expected {k} centroids, found {len(seen)}")

    model = model_from_assignment(emb, assignment, k, centroids)
    model.n_iter = int(header.get("n_iter", 0))
    logger.info(f"Loaded {k} clusters over {len(assignment)} samples from {clusters_path}")
    return model
