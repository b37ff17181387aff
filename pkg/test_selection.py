#!/usr/bin/env python3
"""Tests for budget apportionment, CDAS selection, the baseline selectors and selection files."""

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from clustering.kmeans import model_from_assignment
from common.errors import InputError
from corpus.loader import Corpus, InstructionPair
from embedding.store import EmbeddingMatrix
from scoring.perplexity import ScoreRecord
from selection.apportion import check_m_percent, quota_apportion, target_size
from selection.baselines import (complexity_select, diversity_select, graph_density_baseline, kcenter_select,
                                 random_select, run_strategy)
from selection.cdas import cdas_select, nesting_violations
from selection.store import read_selection, write_selection


def make_scores(values):
    """ScoreRecords whose ifd equals the given value per id."""
    return {i: ScoreRecord.from_perplexities(i, float(v), 1.0) for i, v in values.items()}


def make_clusters(labels, dim=2):
    ids = np.arange(len(labels))
    emb = EmbeddingMatrix(ids, np.random.default_rng(0).normal(size=(len(labels), dim)))
    k = max(labels) + 1
    return model_from_assignment(emb, {int(i): int(c) for i, c in zip(ids, labels)}, k), emb


def make_corpus(n):
    return Corpus([InstructionPair(i, f"task {i}", None, f"answer {i}") for i in range(n)])


def synthetic(n, k, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(k, size=n).tolist()
    labels[:k] = list(range(k))
    clusters, emb = make_clusters(labels)
    scores = make_scores({i: float(v) for i, v in enumerate(rng.lognormal(size=n))})
    return clusters, emb, scores


def quota_oracle(sizes, target):
    """Quota method computed with exact Fractions, one unit at a time."""
    n = sum(sizes)
    quotas = [0] * len(sizes)
    for units in range(1, target + 1):
        eligible = [c for c in range(len(sizes)) if quotas[c] < Fraction(units * sizes[c], n)]
        best = max(eligible, key=lambda c: (Fraction(sizes[c], quotas[c] + 1), -c))
        quotas[best] += 1
    return quotas


def test_target_size_uses_exact_arithmetic():
    assert target_size(1000, 40) == 400
    assert target_size(3, 40) == 2
    assert target_size(1000, 0.3) == 3
    assert target_size(7, 100) == 7
    assert target_size(1, 0.001) == 1
    assert check_m_percent(100) == 100
    for bad in (0, -5, 100.5, "abc"):
        with pytest.raises(InputError):
            check_m_percent(bad)


def test_quota_apportion_examples():
    assert quota_apportion([10, 30], 16) == [4, 12]
    assert quota_apportion([5, 3, 2], 5) == [3, 1, 1]
    assert quota_apportion([1, 1, 1], 2) == [1, 1, 0]
    assert quota_apportion([0, 4], 2) == [0, 2]
    assert quota_apportion([], 0) == []
    with pytest.raises(InputError):
        quota_apportion([2, 2], 5)


def test_quota_apportion_matches_oracle_and_bounds():
    rng = np.random.default_rng(1)
    for _ in range(300):
        sizes = rng.integers(0, 40, size=rng.integers(1, 9)).tolist()
        n = sum(sizes)
        target = int(rng.integers(0, n + 1)) if n else 0
        quotas = quota_apportion(sizes, target)
        assert sum(quotas) == target
        assert quotas == quota_oracle(sizes, target)
        for size, quota in zip(sizes, quotas):
            assert quota <= size
            if n:
                assert abs(quota - Fraction(target * size, n)) < 1


def test_quota_apportion_never_shrinks_a_cluster_as_target_grows():
    rng = np.random.default_rng(5)
    for _ in range(50):
        sizes = rng.integers(1, 20, size=rng.integers(2, 8)).tolist()
        previous = [0] * len(sizes)
        for target in range(sum(sizes) + 1):
            quotas = quota_apportion(sizes, target)
            assert all(q >= p for q, p in zip(quotas, previous))
            previous = quotas


def test_cdas_single_cluster_takes_top_ifd():
    clusters, _ = make_clusters([0, 0, 0, 0])
    scores = make_scores({0: 0.9, 1: 0.7, 2: 0.5, 3: 0.3})
    result = cdas_select(make_corpus(4), clusters, scores, 50)
    assert result.selected_ids == [0, 1]
    assert result.per_cluster_counts == {0: (4, 2)}
    assert [row.rank_in_cluster for row in result.rows] == [0, 1]


def test_cdas_quotas_follow_cluster_sizes():
    clusters, _ = make_clusters([0] * 10 + [1] * 30)
    scores = make_scores({i: 1.0 + (i % 7) / 10 for i in range(40)})
    result = cdas_select(make_corpus(40), clusters, scores, 40)
    assert len(result) == 16
    assert result.per_cluster_counts == {0: (10, 4), 1: (30, 12)}


def test_cdas_structure_on_large_synthetic_corpus():
    clusters, _, scores = synthetic(1000, 5, seed=2)
    result = cdas_select(None, clusters, scores, 40, pool=range(1000))
    assert len(result) == 400
    assert len(result.id_set) == 400

    members = clusters.members()
    chosen = result.id_set
    for c, ids in members.items():
        total, picked = result.per_cluster_counts[c]
        assert total == len(ids)
        assert abs(picked - Fraction(400 * total, 1000)) <= 1
        inside = [scores[i].ifd for i in ids if i in chosen]
        outside = [scores[i].ifd for i in ids if i not in chosen]
        if inside and outside:
            assert min(inside) >= max(outside)

    cubed = {i: ScoreRecord.from_perplexities(i, r.ifd ** 3, 1.0) for i, r in scores.items()}
    assert cdas_select(None, clusters, cubed, 40, pool=range(1000)).selected_ids == result.selected_ids


def test_cdas_matches_sort_and_apportion_oracle():
    clusters, _, scores = synthetic(120, 5, seed=3)
    result = cdas_select(make_corpus(120), clusters, scores, 40)
    members = clusters.members()
    quotas = quota_oracle([len(members[c]) for c in range(5)], 48)
    expected = []
    for c in range(5):
        expected.extend(sorted(members[c], key=lambda i: (-scores[i].ifd, i))[:quotas[c]])
    assert result.selected_ids == expected


def test_cdas_ties_go_to_lower_id_and_full_rate_takes_everything():
    clusters, _ = make_clusters([0, 1, 0, 1, 0, 1])
    scores = make_scores({i: 1.0 for i in range(6)})
    assert cdas_select(make_corpus(6), clusters, scores, 50).selected_ids == [0, 2, 1]
    assert sorted(cdas_select(make_corpus(6), clusters, scores, 100).selected_ids) == list(range(6))


def test_cdas_requires_scores_for_every_id():
    clusters, _ = make_clusters([0, 0, 1])
    with pytest.raises(InputError, match="scores missing"):
        cdas_select(make_corpus(3), clusters, make_scores({0: 1.0, 1: 1.0}), 50)
    with pytest.raises(InputError):
        cdas_select(make_corpus(3), clusters, make_scores({0: 1.0, 1: 1.0, 2: 1.0}), 0)


def test_cdas_is_nested_across_rates_when_clusters_are_large():
    clusters, _, scores = synthetic(2000, 4, seed=4)
    results = [cdas_select(None, clusters, scores, m, pool=range(2000)) for m in (10, 20, 30, 40, 50, 60)]
    for smaller, larger in zip(results, results[1:]):
        assert nesting_violations(smaller, larger) == {}
        assert smaller.id_set <= larger.id_set


def test_cdas_is_nested_across_rates_with_a_singleton_cluster():
    labels = [0] * 8 + [1] * 8 + [2] * 9 + [3] * 8 + [4] * 10 + [5]
    clusters, _ = make_clusters(labels)
    scores = make_scores({i: 1.0 + i / 100 for i in range(44)})
    at_40 = cdas_select(make_corpus(44), clusters, scores, 40)
    at_50 = cdas_select(make_corpus(44), clusters, scores, 50)
    assert (len(at_40), len(at_50)) == (18, 22)
    assert nesting_violations(at_40, at_50) == {}
    for c, (size, picked) in at_50.per_cluster_counts.items():
        assert picked >= at_40.per_cluster_counts[c][1]
        assert abs(picked - Fraction(22 * size, 44)) < 1

    results = [cdas_select(make_corpus(44), clusters, scores, m) for m in range(5, 101, 5)]
    for smaller, larger in zip(results, results[1:]):
        assert nesting_violations(smaller, larger) == {}
        assert smaller.id_set <= larger.id_set


def test_nesting_violations_reports_missing_ids():
    clusters, _ = make_clusters([0, 0, 1, 1])
    scores = make_scores({0: 4.0, 1: 3.0, 2: 2.0, 3: 1.0})
    big = cdas_select(make_corpus(4), clusters, scores, 50)
    small = cdas_select(make_corpus(4), clusters, scores, 25)
    assert nesting_violations(small, big) == {}
    assert nesting_violations(big, small) == {1: [2]}


def test_random_select_is_seeded_and_sorted():
    corpus = make_corpus(50)
    a = random_select(corpus, 40, seed=7)
    assert a.selected_ids == random_select(corpus, 40, seed=7).selected_ids
    assert a.selected_ids == sorted(a.selected_ids)
    assert len(a) == 20
    assert random_select(corpus, 100, seed=1).selected_ids == list(range(50))


def test_random_select_is_uniform():
    corpus = make_corpus(10)
    counts = np.zeros(10)
    trials = 10000
    for seed in range(trials):
        counts[random_select(corpus, 50, seed=seed).selected_ids] += 1
    frequencies = counts / trials
    assert np.all(frequencies >= 0.45) and np.all(frequencies <= 0.55)


def test_complexity_select_global_top_ifd():
    scores = make_scores({0: 0.9, 1: 0.7, 2: 0.5, 3: 0.3})
    assert complexity_select(scores, 25).selected_ids == [0]
    equal = make_scores({i: 1.0 for i in range(10)})
    assert complexity_select(equal, 30).selected_ids == [0, 1, 2]


def test_complexity_agrees_with_cdas_on_one_cluster():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(5, 60))
        clusters, _ = make_clusters([0] * n)
        scores = make_scores({i: float(v) for i, v in enumerate(rng.lognormal(size=n))})
        m = float(rng.integers(1, 101))
        assert complexity_select(scores, m).selected_ids == cdas_select(make_corpus(n), clusters, scores, m).selected_ids


def test_diversity_uses_cdas_quotas():
    clusters, _, scores = synthetic(300, 6, seed=9)
    diverse = diversity_select(clusters, 40, seed=3)
    cdas = cdas_select(None, clusters, scores, 40, pool=range(300))
    assert diverse.per_cluster_counts == cdas.per_cluster_counts
    assert diverse.selected_ids == diversity_select(clusters, 40, seed=3).selected_ids
    for ids in diverse.by_cluster().values():
        assert ids == sorted(ids)


def test_diversity_singletons_full_rate_and_uniformity():
    clusters, _ = make_clusters(list(range(5)))
    assert diversity_select(clusters, 100).selected_ids == [0, 1, 2, 3, 4]

    clusters, _ = make_clusters([0] * 10 + [1] * 10)
    counts = np.zeros(20)
    trials = 10000
    for seed in range(trials):
        counts[diversity_select(clusters, 30, seed=seed).selected_ids] += 1
    frequencies = counts / trials
    assert np.all(np.abs(frequencies - 0.3) <= 0.05)


def test_embedding_baselines_return_target_size():
    clusters, emb, scores = synthetic(60, 3, seed=10)
    kc = kcenter_select(emb, 40, seed=2, clusters=clusters)
    assert len(kc) == 24
    assert sum(picked for _, picked in kc.per_cluster_counts.values()) == 24
    gd = graph_density_baseline(emb, 40, knn=5)
    assert len(gd) == 24
    assert len(gd.id_set) == 24

    pool = list(range(0, 60, 2))
    kc_pool = kcenter_select(emb, 50, pool=pool)
    assert len(kc_pool) == 15
    assert kc_pool.id_set <= set(pool)


def test_graph_density_on_a_single_id_pool():
    _, emb, _ = synthetic(20, 2, seed=14)
    result = graph_density_baseline(emb, 40, knn=5, pool=[7], dropped=[i for i in range(20) if i != 7])
    assert result.selected_ids == [7]
    assert result.pool_size == 1
    assert run_strategy("graph-density", m_percent=100, emb=emb, pool=[3], knn=5).selected_ids == [3]


def test_run_strategy_dispatch_and_errors():
    clusters, emb, scores = synthetic(40, 2, seed=11)
    corpus = make_corpus(40)
    for strategy in ("cdas", "random", "complexity", "diversity", "kcenter", "graph-density"):
        result = run_strategy(strategy, m_percent=25, corpus=corpus, emb=emb, clusters=clusters, scores=scores,
                              knn=5)
        assert result.strategy == strategy
        assert len(result) == 10
    with pytest.raises(InputError, match="unknown selection strategy"):
        run_strategy("best", m_percent=25, corpus=corpus)
    with pytest.raises(InputError, match="needs scores"):
        run_strategy("complexity", m_percent=25, corpus=corpus)


def test_drop_filter_shrinks_the_pool():
    clusters, _, scores = synthetic(100, 4, seed=12)
    pool = [i for i in range(100) if i % 5]
    dropped = [i for i in range(100) if i % 5 == 0]
    result = cdas_select(make_corpus(100), clusters, scores, 40, pool=pool, dropped=dropped)
    assert len(result) == 32
    assert result.pool_size == 80
    assert result.dropped_ids == dropped
    assert not result.id_set & set(dropped)


def test_selection_file_round_trip(tmp_path):
    clusters, _, scores = synthetic(50, 3, seed=13)
    result = cdas_select(make_corpus(50), clusters, scores, 40, pool=range(1, 50), dropped=[0])
    path = tmp_path / "selection.jsonl"
    write_selection(result, path)
    loaded = read_selection(path)
    assert loaded.strategy == "cdas"
    assert loaded.m_percent == 40.0
    assert loaded.selected_ids == result.selected_ids
    assert loaded.per_cluster_counts == result.per_cluster_counts
    assert loaded.dropped_ids == [0]
    assert loaded.pool_size == 49
    assert [row.to_dict() for row in loaded.rows] == [row.to_dict() for row in result.rows]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
