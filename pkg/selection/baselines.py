"""
Baseline selectors and the strategy dispatcher.

- random:        uniform without replacement over the pool
- complexity:    global top IFD, ignoring clusters
- diversity:     uniform within each cluster, using the cdas quotas
- kcenter:       K-Center Greedy over the embeddings
- graph-density: Graph Density over the embeddings
"""

import logging
from typing import List, Mapping, Optional, Sequence

import numpy as np

from clustering.graph_density import graph_density_select
from clustering.kcenter import kcenter_greedy
from clustering.kmeans import ClusterModel
from common.errors import InputError
from corpus.loader import Corpus
from embedding.store import EmbeddingMatrix
from scoring.perplexity import ScoreRecord
from selection.apportion import check_m_percent, target_size
from selection.cdas import (SelectionResult, cluster_members, build_result, cdas_select, check_scores,
                            cluster_quotas, resolve_pool)

logger = logging.getLogger(__name__)

STRATEGIES = ("cdas", "random", "complexity", "diversity", "kcenter", "graph-density")


def random_select(corpus: Optional[Corpus], m_percent: float = 40.0, seed: int = 0,
                  pool: Optional[Sequence[int]] = None, clusters: Optional[ClusterModel] = None,
                  scores: Optional[Mapping[int, ScoreRecord]] = None,
                  dropped: Sequence[int] = ()) -> SelectionResult:
    """Seeded uniform sample of ceil(m% * n) ids, returned in ascending id order."""
    check_m_percent(m_percent)
    pool = resolve_pool(corpus, pool)
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=target_size(len(pool), m_percent), replace=False)
    selected = sorted(pool[i] for i in picks)
    return build_result("random", m_percent, selected, pool, clusters, scores, seed=seed, dropped=dropped)


def complexity_select(scores: Mapping[int, ScoreRecord], m_percent: float = 40.0,
                      pool: Optional[Sequence[int]] = None, clusters: Optional[ClusterModel] = None,
                      dropped: Sequence[int] = ()) -> SelectionResult:
    """Global top IFD (ties -> lower id), in descending IFD order."""
    check_m_percent(m_percent)
    pool = sorted(scores) if pool is None else sorted(pool)
    check_scores(scores, pool)
    ranked = sorted(pool, key=lambda i: (-scores[i].ifd, i))
    selected = ranked[:target_size(len(pool), m_percent)]
    return build_result("complexity", m_percent, selected, pool, clusters, scores, dropped=dropped)


def diversity_select(clusters: ClusterModel, m_percent: float = 40.0, seed: int = 0,
                     pool: Optional[Sequence[int]] = None,
                     scores: Optional[Mapping[int, ScoreRecord]] = None,
                     dropped: Sequence[int] = ()) -> SelectionResult:
    """
    Seeded uniform sample inside every cluster with the cdas quotas.

    Clusters are visited in ascending index with one generator; picks within a
    cluster are listed in ascending id order.
    """
    check_m_percent(m_percent)
    pool = sorted(int(i) for i in clusters.ids) if pool is None else sorted(pool)
    groups = cluster_members(clusters, pool)
    quotas = cluster_quotas(clusters, m_percent, pool)

    rng = np.random.default_rng(seed)
    selected: List[int] = []
    for c in range(clusters.k):
        members = groups[c]
        if quotas[c] == 0:
            continue
        picks = rng.choice(len(members), size=quotas[c], replace=False)
        selected.extend(sorted(members[i] for i in picks))
    return build_result("diversity", m_percent, selected, pool, clusters, scores, seed=seed, dropped=dropped)


def kcenter_select(emb: EmbeddingMatrix, m_percent: float = 40.0, seed: int = 0,
                   pool: Optional[Sequence[int]] = None, clusters: Optional[ClusterModel] = None,
                   scores: Optional[Mapping[int, ScoreRecord]] = None, dropped: Sequence[int] = (),
                   progress: bool = False) -> SelectionResult:
    check_m_percent(m_percent)
    pool = sorted(int(i) for i in emb.ids) if pool is None else sorted(pool)
    sub = emb if len(pool) == len(emb) else emb.subset(pool)
    selected = kcenter_greedy(sub, target_size(len(pool), m_percent), seed=seed, progress=progress)
    return build_result("kcenter", m_percent, selected, pool, clusters, scores, seed=seed, dropped=dropped)


def graph_density_baseline(emb: EmbeddingMatrix, m_percent: float = 40.0, knn: int = 10,
                           gamma: Optional[float] = None, pool: Optional[Sequence[int]] = None,
                           clusters: Optional[ClusterModel] = None,
                           scores: Optional[Mapping[int, ScoreRecord]] = None,
                           dropped: Sequence[int] = (), progress: bool = False) -> SelectionResult:
    check_m_percent(m_percent)
    pool = sorted(int(i) for i in emb.ids) if pool is None else sorted(pool)
    sub = emb if len(pool) == len(emb) else emb.subset(pool)
    target = target_size(len(pool), m_percent)
    if len(pool) < 2:
        # no neighbours to build a graph from
        selected = pool[:target]
    else:
        selected = graph_density_select(sub, target, knn=min(knn, len(pool) - 1), gamma=gamma,
                                        progress=progress)
    return build_result("graph-density", m_percent, selected, pool, clusters, scores, dropped=dropped)


def run_strategy(strategy: str, *, m_percent: float, seed: int = 0, corpus: Optional[Corpus] = None,
                 emb: Optional[EmbeddingMatrix] = None, clusters: Optional[ClusterModel] = None,
                 scores: Optional[Mapping[int, ScoreRecord]] = None, pool: Optional[Sequence[int]] = None,
                 dropped: Sequence[int] = (), knn: int = 10, gamma: Optional[float] = None,
                 progress: bool = False) -> SelectionResult:
    """
    Run one named strategy with whatever inputs it needs.

    Raises:
        InputError: unknown strategy, or an input the strategy needs is missing
    """
    def need(value, what: str):
        if value is None:
            raise InputError(f"strategy '{strategy}' needs {what}")
        return value

    if strategy == "cdas":
        return cdas_select(corpus, need(clusters, "a cluster model"), need(scores, "scores"),
                           m_percent, pool=pool, dropped=dropped)
    if strategy == "random":
        if corpus is None and pool is None:
            pool = [int(i) for i in need(emb, "a corpus or embeddings").ids]
        return random_select(corpus, m_percent, seed, pool=pool, clusters=clusters, scores=scores,
                             dropped=dropped)
    if strategy == "complexity":
        return complexity_select(need(scores, "scores"), m_percent, pool=pool, clusters=clusters,
                                 dropped=dropped)
    if strategy == "diversity":
        return diversity_select(need(clusters, "a cluster model"), m_percent, seed, pool=pool,
                                scores=scores, dropped=dropped)
    if strategy == "kcenter":
        return kcenter_select(need(emb, "embeddings"), m_percent, seed, pool=pool, clusters=clusters,
                              scores=scores, dropped=dropped, progress=progress)
    if strategy == "graph-density":
        return graph_density_baseline(need(emb, "embeddings"), m_percent, knn=knn, gamma=gamma, pool=pool,
                                      clusters=clusters, scores=scores, dropped=dropped, progress=progress)
    raise InputError(f"unknown selection strategy '{strategy}'; choose from {', '.join(STRATEGIES)}")
