"""
Complexity-and-diversity aware sampling.

The corpus is partitioned by the cluster model; the global budget
ceil(m% * n) is apportioned across clusters by the quota method; each cluster
contributes its highest-IFD samples. Picks are concatenated in ascending
cluster index, each cluster's picks in descending IFD order (ties -> lower id).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from clustering.kmeans import ClusterModel
from common.errors import InputError
from corpus.loader import Corpus
from scoring.perplexity import ScoreRecord
from selection.apportion import check_m_percent, quota_apportion, target_size

logger = logging.getLogger(__name__)

NO_CLUSTER = -1


@dataclass(frozen=True)
class SelectionRow:
    id: int
    cluster: int
    ifd: Optional[float]
    rank_in_cluster: int

    def to_dict(self) -> dict:
        return {"id": self.id, "cluster": self.cluster, "ifd": self.ifd, "rank_in_cluster": self.rank_in_cluster}


@dataclass
class SelectionResult:
    """
    Output of any selection strategy.

    `per_cluster_counts` maps cluster -> (members in the pool, selected); it is
    empty when the strategy ran without a cluster model.
    """
    strategy: str
    m_percent: float
    selected_ids: List[int]
    per_cluster_counts: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    rows: List[SelectionRow] = field(default_factory=list)
    seed: Optional[int] = None
    dropped_ids: List[int] = field(default_factory=list)
    pool_size: int = 0

    def __len__(self) -> int:
        return len(self.selected_ids)

    @property
    def id_set(self) -> frozenset:
        return frozenset(self.selected_ids)

    def by_cluster(self) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = {}
        for row in self.rows:
            groups.setdefault(row.cluster, []).append(row.id)
        return groups


def cluster_members(clusters: ClusterModel, pool: Sequence[int]) -> Dict[int, List[int]]:
    assignment = clusters.assignment
    missing = [i for i in pool if i not in assignment]
    if missing:
        raise InputError(f"cluster assignment missing ids: {missing[:10]}")
    groups: Dict[int, List[int]] = {c: [] for c in range(clusters.k)}
    for sample_id in sorted(pool):
        groups[assignment[sample_id]].append(sample_id)
    return groups


def resolve_pool(corpus: Optional[Corpus], pool: Optional[Sequence[int]]) -> List[int]:
    """Eligible ids in ascending order: the explicit pool, else every corpus id."""
    if pool is not None:
        return sorted(int(i) for i in pool)
    if corpus is None:
        raise InputError("either a corpus or an explicit id pool is required")
    return list(corpus.ids)


def check_scores(scores: Mapping[int, ScoreRecord], ids: Sequence[int]) -> None:
    missing = [i for i in ids if i not in scores]
    if missing:
        raise InputError(f"scores missing ids: {missing[:10]}")


def cluster_quotas(clusters: ClusterModel, m_percent: float, pool: Sequence[int]) -> Dict[int, int]:
    """Per-cluster quotas shared by cdas and diversity sampling."""
    groups = cluster_members(clusters, pool)
    sizes = [len(groups[c]) for c in range(clusters.k)]
    quotas = quota_apportion(sizes, target_size(len(pool), m_percent))
    return dict(enumerate(quotas))


def build_result(strategy: str, m_percent: float, selected: Sequence[int], pool: Sequence[int],
                 clusters: Optional[ClusterModel] = None,
                 scores: Optional[Mapping[int, ScoreRecord]] = None,
                 seed: Optional[int] = None, dropped: Sequence[int] = ()) -> SelectionResult:
    """Assemble a SelectionResult, checking uniqueness and membership of the picks."""
    selected = [int(i) for i in selected]
    if len(set(selected)) != len(selected):
        raise InputError(f"{strategy}: selection contains duplicate ids")
    pool_set = set(pool)
    outside = [i for i in selected if i not in pool_set]
    if outside:
        raise InputError(f"{strategy}: selected ids not in the pool: {outside[:10]}")

    assignment = clusters.assignment if clusters is not None else {}
    rows: List[SelectionRow] = []
    seen_in_cluster: Dict[int, int] = {}
    for sample_id in selected:
        cluster = assignment.get(sample_id, NO_CLUSTER)
        rank = seen_in_cluster.get(cluster, 0)
        seen_in_cluster[cluster] = rank + 1
        ifd = scores[sample_id].ifd if scores is not None and sample_id in scores else None
        rows.append(SelectionRow(sample_id, cluster, ifd, rank))

    per_cluster: Dict[int, Tuple[int, int]] = {}
    if clusters is not None:
        for c, members in cluster_members(clusters, pool).items():
            per_cluster[c] = (len(members), seen_in_cluster.get(c, 0))

    return SelectionResult(strategy=strategy, m_percent=float(m_percent), selected_ids=selected,
                           per_cluster_counts=per_cluster, rows=rows, seed=seed,
                           dropped_ids=sorted(int(i) for i in dropped), pool_size=len(pool))


def cdas_select(corpus: Optional[Corpus], clusters: ClusterModel, scores: Mapping[int, ScoreRecord],
                m_percent: float = 40.0, pool: Optional[Sequence[int]] = None,
                dropped: Sequence[int] = ()) -> SelectionResult:
    """
    Take the top-IFD share of every cluster.

    Args:
        corpus: Corpus the clusters and scores were computed on
        clusters: Cluster model covering every pool id
        scores: ScoreRecord per id
        m_percent: Sampling rate in (0, 100]
        pool: Ids eligible for selection (defaults to the whole corpus)
        dropped: Ids removed before selection, recorded in the result

    Returns:
        SelectionResult: ceil(m% * |pool|) ids

    Raises:
        InputError: missing scores or cluster assignments, or m_percent out of range
    """
    check_m_percent(m_percent)
    pool = resolve_pool(corpus, pool)
    check_scores(scores, pool)

    groups = cluster_members(clusters, pool)
    quotas = cluster_quotas(clusters, m_percent, pool)

    selected: List[int] = []
    for c in range(clusters.k):
        ranked = sorted(groups[c], key=lambda i: (-scores[i].ifd, i))
        selected.extend(ranked[:quotas[c]])

    logger.info(f"CDAS selected {len(selected)} of {len(pool)} samples across {clusters.k} clusters "
                f"(m={m_percent}%)")
    return build_result("cdas", m_percent, selected, pool, clusters, scores, dropped=dropped)


def nesting_violations(smaller: SelectionResult, larger: SelectionResult) -> Dict[int, List[int]]:
    """
    Per cluster, ids picked at the smaller rate but missing at the larger one.

    An empty result means the smaller selection is nested in the larger one
    cluster by cluster.
    """
    larger_groups = {c: set(ids) for c, ids in larger.by_cluster().items()}
    violations: Dict[int, List[int]] = {}
    for c, ids in smaller.by_cluster().items():
        missing = sorted(set(ids) - larger_groups.get(c, set()))
        if missing:
            violations[c] = missing
    return violations
