"""Length statistics over rendered samples."""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Sequence

import numpy as np

from common.errors import InputError
from corpus.render import RenderedSample

logger = logging.getLogger(__name__)

DEFAULT_BIN_WIDTH = 64


@dataclass
class LengthStats:
    """Distribution of total_tokens across a corpus."""
    count: int
    total: int
    min: int
    max: int
    mean: float
    p50: int
    p90: int
    p99: int
    bin_width: int
    histogram: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["histogram"] = {str(start): n for start, n in sorted(self.histogram.items())}
        return data


def nearest_rank(sorted_values: np.ndarray, percent: float) -> int:
    """Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n)."""
    n = len(sorted_values)
    rank = max(1, math.ceil(percent / 100.0 * n))
    return int(sorted_values[rank - 1])


def length_stats(lengths: Sequence[int], bin_width: int = DEFAULT_BIN_WIDTH) -> LengthStats:
    """
    Compute LengthStats from raw lengths.

    Histogram bins are [k*w, (k+1)*w) keyed by their start; empty bins are omitted.
    """
    if len(lengths) == 0:
        raise InputError("cannot compute length statistics of an empty corpus")
    if bin_width < 1:
        raise InputError(f"bin_width must be >= 1, got {bin_width}")

    values = np.sort(np.asarray(lengths, dtype=np.int64))
    bins = np.bincount(values // bin_width)
    histogram = {int(i) * bin_width: int(n) for i, n in enumerate(bins) if n > 0}

    return LengthStats(
        count=int(values.size),
        total=int(values.sum()),
        min=int(values[0]),
        max=int(values[-1]),
        mean=float(values.mean()),
        p50=nearest_rank(values, 50),
        p90=nearest_rank(values, 90),
        p99=nearest_rank(values, 99),
        bin_width=bin_width,
        histogram=histogram,
    )


def corpus_stats(samples: Sequence[RenderedSample], bin_width: int = DEFAULT_BIN_WIDTH) -> LengthStats:
    """
    Length statistics of total_tokens for a rendered corpus.

    Raises:
        InputError: empty corpus
    """
    stats = length_stats([sample.total_tokens for sample in samples], bin_width)
    logger.info(f"Corpus lengths: n={stats.count}, min={stats.min}, max={stats.max}, "
                f"mean={stats.mean:.1f}, p90={stats.p90}")
    return stats
