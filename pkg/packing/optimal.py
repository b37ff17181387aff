"""
Exact minimum bin count for small instances, used to check FFD quality.

Separators are folded into the weights: a bin holding items l1..lc needs
sum(l) + s*(c-1) <= C, which is sum(l + s) <= C + s.
"""

import math
from typing import List, Sequence

from common.errors import InputError
from packing.planner import first_fit_decreasing

MAX_ITEMS = 12


def optimal_pack(lengths: Sequence[int], max_len: int, separator_cost: int = 0) -> int:
    """
    Minimum number of bins by branch-and-bound.

    Raises:
        InputError: more than 12 items, or an item that fits no bin
    """
    if len(lengths) > MAX_ITEMS:
        raise InputError(f"optimal_pack is limited to {MAX_ITEMS} samples, got {len(lengths)}")
    if not lengths:
        return 0
    if any(length + separator_cost > max_len or length < 1 for length in lengths):
        raise InputError(f"every length must be in [1, {max_len - separator_cost}]")

    capacity = max_len + separator_cost
    weights = sorted((length + separator_cost for length in lengths), reverse=True)
    items = [(i, length) for i, length in enumerate(lengths)]
    best = len(first_fit_decreasing(items, max_len, separator_cost))
    lower = math.ceil(sum(weights) / capacity)
    if best == lower:
        return best

    loads: List[int] = []

    def search(k: int) -> None:
        nonlocal best
        if len(loads) >= best:
            return
        if k == len(weights):
            best = len(loads)
            return
        remaining = sum(weights[k:])
        free = sum(capacity - load for load in loads)
        if len(loads) + math.ceil(max(0, remaining - free) / capacity) >= best:
            return
        w = weights[k]
        tried = set()
        for b, load in enumerate(loads):
            if load + w <= capacity and load not in tried:
                tried.add(load)
                loads[b] += w
                search(k + 1)
                loads[b] -= w
                if best == lower:
                    return
        loads.append(w)
        search(k + 1)
        loads.pop()

    search(0)
    return best
