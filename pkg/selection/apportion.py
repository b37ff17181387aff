"""
Sampling budgets and their apportionment across clusters.

Budgets use exact arithmetic (integers and Fractions) so a rate like 40% of
1,000 is 400, never 399 or 401 from a float artefact.
"""

import math
from fractions import Fraction
from typing import List, Sequence, Union

import numpy as np

from common.errors import InputError


def check_m_percent(m_percent: Union[int, float]) -> Fraction:
    """Validate a sampling rate in (0, 100] and return it as an exact Fraction."""
    try:
        m = Fraction(str(m_percent))
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"m_percent must be a number, got {m_percent!r}") from e
    if not 0 < m <= 100:
        raise InputError(f"m_percent must be in (0, 100], got {m_percent}")
    return m


def target_size(n: int, m_percent: Union[int, float]) -> int:
    """ceil(m_percent * n / 100)."""
    m = check_m_percent(m_percent)
    return math.ceil(m * n / 100)


def quota_apportion(sizes: Sequence[int], target: int) -> List[int]:
    """
    Integer quotas proportional to `sizes` that sum to exactly `target`,
    by the quota method.

    Units are handed out one at a time. Unit h goes to the cluster with the
    largest size/(quota+1) among clusters whose quota is still below their exact
    share of h units; ties go to the lower cluster index. Every quota stays
    within 1 of its exact share target*size/n, and raising the target never
    lowers any quota, so selections at growing rates are nested.
    """
    n = sum(sizes)
    if any(s < 0 for s in sizes):
        raise InputError("cluster sizes must be >= 0")
    if not 0 <= target <= n:
        raise InputError(f"target {target} must be in [0, {n}]")

    weights = np.asarray(sizes, dtype=np.int64)
    quotas = np.zeros(len(weights), dtype=np.int64)
    for units in range(1, target + 1):
        eligible = quotas * n < weights * units
        priority = np.where(eligible, weights / (quotas + 1), -1.0)
        quotas[int(np.argmax(priority))] += 1
    return [int(q) for q in quotas]
