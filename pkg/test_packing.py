#!/usr/bin/env python3
"""Tests for the padding strategies, first-fit decreasing, exact packing and pack manifests."""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from common.errors import InputError, InvariantViolation
from packing.optimal import optimal_pack
from packing.planner import (check_lengths, ffd_witness_holds, first_fit_decreasing, plan, plan_dynamic,
                             plan_dynamic_pack, plan_global_pack, plan_traditional)
from packing.plans import Batch, PackPlan, as_samples, build_sequence
from packing.report import efficiency_report
from packing.store import read_manifest, write_manifest


def three_plans(lengths, max_len, batch_size, separator_cost=0):
    samples = as_samples(lengths)
    return (plan_traditional(samples, max_len, batch_size),
            plan_dynamic(samples, max_len, batch_size),
            plan_dynamic_pack(samples, max_len, batch_size, separator_cost))


def test_single_sample_traditional_padding():
    p = plan_traditional(as_samples([5]), max_len=10, batch_size=1)
    assert p.padding_tokens == 5
    assert p.padding_ratio == 0.5


def test_four_sample_batch_across_strategies():
    traditional, dynamic, packed = three_plans([12, 7, 5, 3], max_len=16, batch_size=4)

    assert (traditional.padding_tokens, traditional.padded_total) == (37, 64)
    assert (dynamic.padding_tokens, dynamic.padded_total) == (21, 48)
    assert dynamic.padding_ratio == pytest.approx(0.4375)
    assert (packed.padding_tokens, packed.padded_total) == (3, 30)
    assert packed.padding_ratio == pytest.approx(0.1)
    assert packed.total_sequences == 2

    for p in (traditional, dynamic, packed):
        p.validate(range(4))
    report = efficiency_report([traditional, dynamic, packed])
    assert report.sequence_reduction == pytest.approx(0.5)
    assert report["dynamic-pack"].content_tokens == 27
    assert report.to_frame().loc["traditional", "padding_tokens"] == 37


def test_equal_halves_pack_without_padding():
    p = plan_dynamic_pack(as_samples([10, 10, 10, 10]), max_len=20, batch_size=4, separator_cost=0)
    assert p.total_sequences == 2
    assert p.padding_tokens == 0


def test_separator_cost_can_block_a_fit():
    p = plan_dynamic_pack(as_samples([9, 8, 2]), max_len=10, batch_size=3, separator_cost=1)
    assert p.total_sequences == 3
    p.validate(range(3))


def test_segments_carry_separator_offsets():
    sequence = build_sequence([(4, 3), (7, 2)], separator_cost=1, seq_len=8)
    assert [s.to_dict() for s in sequence.segments] == [{"id": 4, "offset": 0, "len": 3},
                                                        {"id": 7, "offset": 4, "len": 2}]
    assert (sequence.content_tokens, sequence.separator_tokens, sequence.pad) == (5, 1, 2)
    with pytest.raises(InvariantViolation):
        build_sequence([(0, 5), (1, 5)], separator_cost=1, seq_len=10)


def test_ffd_places_into_first_bin_that_fits():
    bins = first_fit_decreasing([(0, 3), (1, 6), (2, 4), (3, 6)], capacity=10)
    assert bins == [[(1, 6), (2, 4)], [(3, 6), (0, 3)]]
    with pytest.raises(InputError):
        first_fit_decreasing([(0, 11)], capacity=10)


def test_optimal_pack_small_cases():
    assert optimal_pack([10, 10, 10, 10], 20) == 2
    assert optimal_pack([6, 6, 6], 10) == 3
    assert optimal_pack([], 10) == 0
    assert optimal_pack([4, 4, 4], 14, separator_cost=1) == 1
    assert optimal_pack([4, 4, 4], 13, separator_cost=1) == 2
    with pytest.raises(InputError):
        optimal_pack([1] * 13, 20)
    with pytest.raises(InputError):
        optimal_pack([21], 20)


def test_ffd_stays_within_bound_of_optimal():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 13))
        max_len = int(rng.integers(10, 40))
        sep = int(rng.integers(0, 3))
        lengths = rng.integers(1, max_len - sep + 1, size=n).tolist()
        ffd = len(first_fit_decreasing(list(enumerate(lengths)), max_len, sep))
        best = optimal_pack(lengths, max_len, sep)
        assert best <= ffd <= math.ceil(11 * best / 9) + 1


def test_optimal_pack_beats_ffd_when_ffd_is_suboptimal():
    lengths = [5, 4, 4, 3, 2, 2]
    assert len(first_fit_decreasing(list(enumerate(lengths)), 10)) == 3
    assert optimal_pack(lengths, 10) == 2


def test_dynamic_pack_never_pads_more_than_dynamic():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n = int(rng.integers(1, 80))
        max_len = int(rng.integers(16, 512))
        batch_size = int(rng.integers(1, 17))
        sep = int(rng.integers(0, 3))
        lengths = rng.integers(1, max_len - sep + 1, size=n).tolist()
        traditional, dynamic, packed = three_plans(lengths, max_len, batch_size, sep)
        packed.validate(range(n))
        assert dynamic.padding_tokens <= traditional.padding_tokens
        assert packed.padding_tokens <= dynamic.padding_tokens
        assert packed.padded_total <= dynamic.padded_total
        assert packed.total_sequences <= dynamic.total_sequences
        for batch in packed.batches:
            assert ffd_witness_holds(batch, sep)


def draw_lengths(rng, kind, n, max_len):
    if kind == "uniform":
        lengths = rng.integers(1, max_len + 1, size=n)
    elif kind == "lognormal":
        lengths = rng.lognormal(mean=np.log(max_len / 8), sigma=1.0, size=n)
    else:
        short = rng.normal(0.1 * max_len, 0.03 * max_len, size=n)
        long = rng.normal(0.7 * max_len, 0.1 * max_len, size=n)
        lengths = np.where(rng.random(n) < 0.7, short, long)
    return np.clip(np.asarray(lengths).astype(int), 1, max_len).tolist()


def test_padding_dominance_across_length_distributions():
    rng = np.random.default_rng(7)
    kinds = ("uniform", "lognormal", "bimodal")
    for trial in range(1000):
        n = 10_000 if trial < 3 else int(10 ** rng.uniform(0, 3.5))
        max_len = int(rng.choice([512, 2048, 4096]))
        batch_size = int(rng.integers(1, 65))
        lengths = draw_lengths(rng, kinds[trial % 3], n, max_len)
        traditional, dynamic, packed = three_plans(lengths, max_len, batch_size)
        assert packed.padding_tokens <= dynamic.padding_tokens <= traditional.padding_tokens, (trial, n)


def test_skewed_lengths_reduce_sequences():
    rng = np.random.default_rng(2)
    lengths = np.clip(rng.lognormal(mean=4.0, sigma=1.0, size=2000).astype(int), 1, 2047).tolist()
    _, dynamic, packed = three_plans(lengths, 2048, 64, 1)
    report = efficiency_report([dynamic, packed])
    assert report.sequence_reduction > 0.5
    assert packed.padding_ratio < dynamic.padding_ratio


def test_dynamic_pack_is_thread_independent():
    rng = np.random.default_rng(3)
    samples = as_samples(rng.integers(1, 200, size=300).tolist())
    single = plan_dynamic_pack(samples, 256, 16, 1)
    multi = plan_dynamic_pack(samples, 256, 16, 1, threads=4)
    assert single == multi


def test_global_pack_groups_bins_into_batches():
    samples = as_samples([12, 7, 5, 3, 9, 9, 2])
    p = plan_global_pack(samples, max_len=16, batch_size=2, separator_cost=0)
    assert p.global_pack
    p.validate(range(7))
    assert all(len(batch.sequences) <= 2 for batch in p.batches)
    assert p.total_sequences == len(first_fit_decreasing([(s.id, s.total_tokens) for s in samples], 16))
    assert plan("dynamic-pack", samples, 16, 2, 0, global_pack=True) == p


def test_length_checks_name_offending_ids():
    with pytest.raises(InputError, match=r"ids \[1\]"):
        plan_traditional(as_samples([5, 11]), max_len=10, batch_size=2)
    with pytest.raises(InputError, match="separator_cost"):
        plan_dynamic_pack(as_samples([10]), max_len=10, batch_size=1, separator_cost=1)
    with pytest.raises(InputError, match="at least one token"):
        check_lengths([(0, 0)], 10)
    with pytest.raises(InputError):
        plan_dynamic(as_samples([1]), max_len=10, batch_size=0)
    with pytest.raises(InputError, match="unknown packing strategy"):
        plan("greedy", as_samples([1]), 10, 1)


def test_validate_catches_broken_plans():
    good = plan_dynamic(as_samples([3, 4]), max_len=10, batch_size=2)
    with pytest.raises(InvariantViolation):
        good.validate([0, 1, 2])

    duplicate = PackPlan("dynamic", 10, 2, 0, [Batch(0, [build_sequence([(0, 3)], 0, 3),
                                                         build_sequence([(0, 3)], 0, 3)])])
    with pytest.raises(InvariantViolation, match="more than one segment"):
        duplicate.validate()

    uneven = PackPlan("dynamic", 10, 2, 0, [Batch(0, [build_sequence([(0, 3)], 0, 3),
                                                      build_sequence([(1, 4)], 0, 5)])])
    with pytest.raises(InvariantViolation, match="longest"):
        uneven.validate()


def test_efficiency_report_rejects_mismatched_plans():
    a = plan_dynamic(as_samples([3, 4]), 10, 2)
    b = plan_dynamic(as_samples([3, 4, 5]), 10, 2)
    with pytest.raises(InputError, match="different sample sets"):
        efficiency_report([a, b])
    with pytest.raises(InputError):
        efficiency_report([])


def test_manifest_round_trip(tmp_path):
    samples = as_samples([12, 7, 5, 3, 9, 1], start_id=100)
    for p in (plan_traditional(samples, 16, 4), plan_dynamic_pack(samples, 16, 4, 1),
              plan_global_pack(samples, 16, 4, 1)):
        path = write_manifest(p, tmp_path / f"{p.strategy}.jsonl")
        loaded = read_manifest(path)
        assert loaded == p
        assert loaded.sample_ids() == p.sample_ids()


def test_manifest_without_header_is_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"batch": 0}\n', encoding="utf-8")
    with pytest.raises(InputError):
        read_manifest(path)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
