"""
Padding strategies.

traditional:  one sample per sequence, padded to max_len
dynamic:      one sample per sequence, padded to the longest sample of its batch
dynamic-pack: each batch's samples are concatenated by first-fit decreasing
              (separator tokens between neighbours), then padded to the
              longest packed sequence of the batch

For dynamic-pack every batch is packed twice, with bin capacity max_len and
with capacity equal to the batch's longest sample, and the plan with the
smaller padded total is kept (ties keep max_len). Packing at the longest
sample never pads more than dynamic padding, so dynamic-pack padding never
exceeds dynamic padding.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from common.errors import InputError
from packing.plans import Batch, PackPlan, build_sequence

logger = logging.getLogger(__name__)

Item = Tuple[int, int]


def _items(samples: Sequence) -> List[Item]:
    return [(int(s.id), int(s.total_tokens)) for s in samples]


def _check_params(max_len: int, batch_size: int, separator_cost: int = 0) -> None:
    if max_len < 1:
        raise InputError(f"max_len must be >= 1, got {max_len}")
    if batch_size < 1:
        raise InputError(f"batch_size must be >= 1, got {batch_size}")
    if separator_cost < 0:
        raise InputError(f"separator_cost must be >= 0, got {separator_cost}")


def check_lengths(items: Sequence[Item], max_len: int, separator_cost: int = 0) -> None:
    """
    Raises:
        InputError: listing the ids of samples that cannot fit a sequence
    """
    limit = max_len - separator_cost
    oversized = [sample_id for sample_id, length in items if length > limit]
    if oversized:
        extra = f" + separator_cost {separator_cost}" if separator_cost else ""
        raise InputError(f"{len(oversized)} samples exceed max_len {max_len}{extra}: ids {oversized[:10]}")
    empty = [sample_id for sample_id, length in items if length < 1]
    if empty:
        raise InputError(f"samples must have at least one token: ids {empty[:10]}")


def _batches(items: Sequence[Item], batch_size: int) -> List[List[Item]]:
    return [list(items[i:i + batch_size]) for i in range(0, len(items), batch_size)]


def ffd_order(items: Sequence[Item]) -> List[Item]:
    """Descending length, ties -> lower id."""
    return sorted(items, key=lambda item: (-item[1], item[0]))


def first_fit_decreasing(items: Sequence[Item], capacity: int, separator_cost: int = 0) -> List[List[Item]]:
    """
    Pack (id, length) items into bins of `capacity` tokens.

    A non-empty bin accepts an item when used + separator_cost + length <= capacity.
    Each item goes to the first (oldest) bin that accepts it, else opens a new bin.

    Returns:
        bins in creation order, each listing its items in placement order
    """
    bins: List[List[Item]] = []
    # room[b]: largest item bin b can still take
    room = np.empty(len(items), dtype=np.int64)
    for sample_id, length in ffd_order(items):
        n_bins = len(bins)
        if n_bins:
            b = int(np.argmax(room[:n_bins] >= length))
            if room[b] >= length:
                bins[b].append((sample_id, length))
                room[b] -= length + separator_cost
                continue
        if length > capacity:
            raise InputError(f"sample {sample_id} of length {length} exceeds bin capacity {capacity}")
        bins.append([(sample_id, length)])
        room[n_bins] = capacity - length - separator_cost
    return bins


def _bin_used(bin_items: Sequence[Item], separator_cost: int) -> int:
    return sum(length for _, length in bin_items) + separator_cost * (len(bin_items) - 1)


def _pad_bins(index: int, bins: List[List[Item]], separator_cost: int, capacity: int) -> Batch:
    seq_len = max(_bin_used(b, separator_cost) for b in bins)
    return Batch(index, [build_sequence(b, separator_cost, seq_len) for b in bins], capacity=capacity)


def pack_batch(index: int, items: Sequence[Item], max_len: int, separator_cost: int) -> Batch:
    """FFD at max_len and at the longest sample; keep the smaller padded total."""
    wide = first_fit_decreasing(items, max_len, separator_cost)
    wide_batch = _pad_bins(index, wide, separator_cost, max_len)

    longest = max(length for _, length in items)
    if longest == max_len:
        return wide_batch
    tight = first_fit_decreasing(items, longest, separator_cost)
    tight_batch = _pad_bins(index, tight, separator_cost, longest)

    wide_total = len(wide_batch.sequences) * wide_batch.seq_len
    tight_total = len(tight_batch.sequences) * tight_batch.seq_len
    chosen = tight_batch if tight_total < wide_total else wide_batch
    logger.debug(f"batch {index}: {len(items)} samples -> {len(chosen.sequences)} sequences "
                 f"(capacity {chosen.capacity}, padded total {min(wide_total, tight_total)})")
    return chosen


def plan_traditional(samples: Sequence, max_len: int, batch_size: int) -> PackPlan:
    """One sample per sequence padded to max_len; batches in input order."""
    _check_params(max_len, batch_size)
    items = _items(samples)
    check_lengths(items, max_len)
    batches = [Batch(i, [build_sequence([item], 0, max_len) for item in chunk])
               for i, chunk in enumerate(_batches(items, batch_size))]
    return PackPlan("traditional", max_len, batch_size, 0, batches)


def plan_dynamic(samples: Sequence, max_len: int, batch_size: int) -> PackPlan:
    """One sample per sequence padded to its batch's longest sample."""
    _check_params(max_len, batch_size)
    items = _items(samples)
    check_lengths(items, max_len)
    batches = []
    for i, chunk in enumerate(_batches(items, batch_size)):
        longest = max(length for _, length in chunk)
        batches.append(Batch(i, [build_sequence([item], 0, longest) for item in chunk]))
    return PackPlan("dynamic", max_len, batch_size, 0, batches)


def plan_dynamic_pack(samples: Sequence, max_len: int, batch_size: int, separator_cost: int = 1,
                      threads: int = 1, progress: bool = False) -> PackPlan:
    """
    Within-batch first-fit-decreasing concatenation followed by dynamic padding.

    Raises:
        InputError: a sample longer than max_len - separator_cost, or bad parameters
    """
    _check_params(max_len, batch_size, separator_cost)
    items = _items(samples)
    check_lengths(items, max_len, separator_cost)
    chunks = _batches(items, batch_size)

    def work(args):
        index, chunk = args
        return pack_batch(index, chunk, max_len, separator_cost)

    jobs = list(enumerate(chunks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(tqdm(pool.map(work, jobs), total=len(jobs), desc="packing",
                                disable=not progress, leave=False))
    else:
        batches = [work(job) for job in tqdm(jobs, desc="packing", disable=not progress, leave=False)]

    plan = PackPlan("dynamic-pack", max_len, batch_size, separator_cost, batches)
    logger.info(f"Dynamic pack: {len(items)} samples -> {plan.total_sequences} sequences "
                f"in {len(batches)} batches")
    return plan


def plan_global_pack(samples: Sequence, max_len: int, batch_size: int, separator_cost: int = 1) -> PackPlan:
    """
    First-fit decreasing over the whole dataset, then consecutive bins grouped
    into batches of `batch_size` sequences, each padded to its longest bin.
    """
    _check_params(max_len, batch_size, separator_cost)
    items = _items(samples)
    check_lengths(items, max_len, separator_cost)
    bins = first_fit_decreasing(items, max_len, separator_cost)
    batches = [_pad_bins(i, bins[start:start + batch_size], separator_cost, max_len)
               for i, start in enumerate(range(0, len(bins), batch_size))]
    plan = PackPlan("dynamic-pack", max_len, batch_size, separator_cost, batches, global_pack=True)
    logger.info(f"Global pack: {len(items)} samples -> {len(bins)} sequences in {len(batches)} batches")
    return plan


def plan(strategy: str, samples: Sequence, max_len: int, batch_size: int, separator_cost: int = 1,
         global_pack: bool = False, threads: int = 1, progress: bool = False) -> PackPlan:
    """Dispatch on strategy name."""
    if strategy == "traditional":
        return plan_traditional(samples, max_len, batch_size)
    if strategy == "dynamic":
        return plan_dynamic(samples, max_len, batch_size)
    if strategy == "dynamic-pack":
        if global_pack:
            return plan_global_pack(samples, max_len, batch_size, separator_cost)
        return plan_dynamic_pack(samples, max_len, batch_size, separator_cost, threads, progress)
    raise InputError(f"unknown packing strategy '{strategy}'")


def ffd_witness_holds(batch: Batch, separator_cost: int) -> bool:
    """Replaying FFD at the batch's capacity reproduces its sequences exactly."""
    items = [(s.id, s.length) for seq in batch.sequences for s in seq.segments]
    replay = first_fit_decreasing(items, batch.capacity, separator_cost)
    actual = [[(s.id, s.length) for s in seq.segments] for seq in batch.sequences]
    return replay == actual
