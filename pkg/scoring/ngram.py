"""
Add-k smoothed n-gram language model used as the built-in log-probability provider.

Token streams are whitespace tokens of the rendered prompt followed by the
response. Every stream is left-padded with order-1 begin markers. Tokens not
seen in training map to a single unknown symbol, so

    P(w | c) = (count(c, w) + k) / (count(c) + k * (V + 1))

sums to 1 over the V training tokens plus the unknown symbol for every context,
including contexts never seen in training (which get the uniform 1 / (V + 1)).
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

from common.errors import InputError
from corpus.loader import Corpus
from corpus.render import DEFAULT_TEMPLATE, PromptTemplate, render_prompt

logger = logging.getLogger(__name__)

BOS = "\u0002bos"
UNK = "\u0002unk"

Context = Tuple[str, ...]


class NGramLM:
    """Immutable after fit(); safe to share read-only between scoring threads."""

    def __init__(self, order: int = 2, add_k: float = 1.0):
        if order < 1:
            raise InputError(f"n-gram order must be >= 1, got {order}")
        if not add_k > 0:
            raise InputError(f"add_k must be > 0, got {add_k}")
        self.order = order
        self.add_k = float(add_k)
        self.vocab: frozenset = frozenset()
        self.counts: Dict[Context, Counter] = defaultdict(Counter)
        self.context_totals: Counter = Counter()

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @classmethod
    def fit(cls, streams: Iterable[Sequence[str]], order: int = 2, add_k: float = 1.0) -> "NGramLM":
        lm = cls(order, add_k)
        streams = [list(s) for s in streams]
        lm.vocab = frozenset(token for stream in streams for token in stream)
        for stream in streams:
            history = [BOS] * (order - 1)
            for token in stream:
                context = lm._context(history)
                lm.counts[context][token] += 1
                lm.context_totals[context] += 1
                history.append(token)
        lm.counts = dict(lm.counts)
        logger.info(f"Trained order-{order} n-gram LM: vocab={lm.vocab_size}, "
                    f"contexts={len(lm.counts)}, tokens={sum(lm.context_totals.values())}")
        return lm

    def _context(self, history: Sequence[str]) -> Context:
        if self.order == 1:
            return ()
        tail = history[len(history) - (self.order - 1):]
        return tuple(t if t == BOS or t in self.vocab else UNK for t in tail)

    def _symbol(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def prob(self, token: str, context: Context) -> float:
        seen = self.counts.get(context)
        count = seen[self._symbol(token)] if seen else 0
        total = self.context_totals.get(context, 0)
        return (count + self.add_k) / (total + self.add_k * (self.vocab_size + 1))

    def distribution(self, context: Context) -> Dict[str, float]:
        """Full next-token distribution over vocab plus the unknown symbol."""
        return {token: self.prob(token, context) for token in sorted(self.vocab) + [UNK]}

    def count_tokens(self, text: str) -> int:
        return len(text.split())

    def score(self, context_text: str, target_text: str) -> List[float]:
        history = [BOS] * (self.order - 1) + context_text.split()
        logprobs = []
        for token in target_text.split():
            logprobs.append(math.log(self.prob(token, self._context(history))))
            history.append(token)
        return logprobs


def training_streams(corpus: Corpus, template: PromptTemplate = DEFAULT_TEMPLATE) -> List[List[str]]:
    """Whitespace tokens of rendered prompt + response for every pair."""
    streams = []
    for pair in corpus:
        sample = render_prompt(pair, template)
        streams.append(sample.prompt_text.split() + sample.response_text.split())
    return streams


def train_ngram(corpus: Corpus, order: int = 2, add_k: float = 1.0,
                template: PromptTemplate = DEFAULT_TEMPLATE) -> NGramLM:
    """
    Train the built-in provider on a corpus.

    Raises:
        InputError: order < 1, add_k <= 0 or empty corpus
    """
    if order < 1:
        raise InputError(f"n-gram order must be >= 1, got {order}")
    if len(corpus) == 0:
        raise InputError("cannot train an n-gram LM on an empty corpus")
    return NGramLM.fit(training_streams(corpus, template), order=order, add_k=add_k)
