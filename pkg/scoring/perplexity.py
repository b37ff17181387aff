"""
Perplexity and instruction-following difficulty (IFD).

ppl(a | q) is exp of the mean negative natural-log likelihood of the response
tokens given the complete instruction; ppl(a) is the same without it. IFD is
their ratio: above 1 the instruction makes the response harder to predict,
well below 1 it nearly forces the response.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple, runtime_checkable

from tqdm import tqdm

from common.errors import InputError, ScoringError
from corpus.render import RenderedSample

logger = logging.getLogger(__name__)


@runtime_checkable
class LogProbProvider(Protocol):
    """Anything that can return per-token natural-log probabilities of a target given a context."""

    def score(self, context_text: str, target_text: str) -> List[float]:
        """Log-probabilities (each <= 0) for every token of target_text, conditioned on context_text."""
        ...

    def count_tokens(self, text: str) -> int:
        """Number of tokens the provider sees in text."""
        ...


@dataclass(frozen=True)
class ScoreRecord:
    id: int
    ppl_cond: float
    ppl_uncond: float
    ifd: float

    @classmethod
    def from_perplexities(cls, sample_id: int, ppl_cond: float, ppl_uncond: float) -> "ScoreRecord":
        """Build a record with ifd recomputed from the two perplexities."""
        for name, value in (("ppl_cond", ppl_cond), ("ppl_uncond", ppl_uncond)):
            if not math.isfinite(value):
                raise ScoringError(f"{name} is not finite ({value!r})", sample_id)
            if value <= 0.0:
                raise ScoringError(f"{name} must be > 0, got {value!r}", sample_id)
        ifd_value = ppl_cond / ppl_uncond
        if not math.isfinite(ifd_value) or ifd_value <= 0.0:
            raise ScoringError(f"ifd is not a finite positive number ({ifd_value!r})", sample_id)
        return cls(id=int(sample_id), ppl_cond=float(ppl_cond), ppl_uncond=float(ppl_uncond), ifd=ifd_value)

    def to_dict(self) -> dict:
        return {"id": self.id, "ppl_cond": self.ppl_cond, "ppl_uncond": self.ppl_uncond, "ifd": self.ifd}


def ppl(logprobs: Sequence[float]) -> float:
    """
    Perplexity of a token sequence: exp(-(1/N) * sum(logprobs)).

    Raises:
        InputError: empty list or any entry > 0
    """
    if len(logprobs) == 0:
        raise InputError("cannot compute perplexity of an empty token list")
    for i, lp in enumerate(logprobs):
        if lp > 0.0:
            raise InputError(f"log-probability at position {i} is positive ({lp!r})")
    try:
        return math.exp(-math.fsum(logprobs) / len(logprobs))
    except OverflowError:
        return math.inf


def _checked_ppl(logprobs: Sequence[float], expected: int, label: str, sample_id: int) -> float:
    if len(logprobs) != expected:
        raise ScoringError(f"provider returned {len(logprobs)} {label} log-probabilities "
                           f"for {expected} response tokens", sample_id)
    try:
        value = ppl(logprobs)
    except InputError as e:
        raise ScoringError(f"{label}: {e}", sample_id) from e
    if not math.isfinite(value):
        raise ScoringError(f"{label} perplexity is not finite", sample_id)
    return value


def ifd(sample: RenderedSample, provider: LogProbProvider) -> ScoreRecord:
    """
    Score one rendered sample. Only the response tokens are scored.

    Raises:
        ScoringError: the provider broke its contract or a perplexity is non-finite
    """
    if not sample.response_text.strip():
        raise InputError(f"sample {sample.id}: empty response")
    expected = provider.count_tokens(sample.response_text)
    cond = provider.score(sample.prompt_text, sample.response_text)
    uncond = provider.score("", sample.response_text)
    return ScoreRecord.from_perplexities(
        sample.id,
        _checked_ppl(cond, expected, "conditional", sample.id),
        _checked_ppl(uncond, expected, "unconditional", sample.id),
    )


def score_samples(samples: Sequence[RenderedSample], provider: LogProbProvider, threads: int = 1,
                  progress: bool = False) -> Dict[int, ScoreRecord]:
    """Score every sample; the result is keyed by id and independent of thread count."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(tqdm(pool.map(lambda s: ifd(s, provider), samples), total=len(samples),
                                desc="scoring", disable=not progress, leave=False))
    else:
        records = [ifd(s, provider) for s in tqdm(samples, desc="scoring", disable=not progress, leave=False)]

    scores = {record.id: record for record in records}
    above = sum(1 for record in records if record.ifd > 1.0)
    logger.info(f"Scored {len(scores)} samples ({above} with IFD > 1)")
    return scores


def drop_ifd_above(scores: Mapping[int, ScoreRecord], threshold: Optional[float]) -> Tuple[List[int], List[int]]:
    """
    Split ids into (kept, dropped) by an IFD ceiling; None keeps everything.

    Both lists are in ascending id order.
    """
    if threshold is None:
        return sorted(scores), []
    kept = sorted(i for i, record in scores.items() if record.ifd <= threshold)
    dropped = sorted(i for i, record in scores.items() if record.ifd > threshold)
    if dropped:
        logger.info(f"Dropped {len(dropped)} samples with IFD > {threshold}")
    return kept, dropped
