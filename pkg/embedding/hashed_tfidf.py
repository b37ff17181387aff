"""
Deterministic instruction embedder: signed feature-hashed TF-IDF.

Each whitespace token of the rendered prompt is hashed into one of `dim`
buckets, with an independent sign bit so bucket collisions cancel in
expectation instead of accumulating. Weights are raw term counts times a
smoothed IDF, log((N+1)/(df+1)) + 1, and rows are L2-normalized.
"""

import hashlib
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Sequence, Tuple

import numpy as np

from common.errors import InputError
from corpus.loader import Corpus
from corpus.render import DEFAULT_TEMPLATE, PromptTemplate, render_prompt
from embedding.store import EmbeddingMatrix, normalize_rows

logger = logging.getLogger(__name__)

MIN_DIM = 16


class SignedHasher:
    """Seeded token -> (bucket, sign) map; stable across processes and platforms."""

    def __init__(self, dim: int, seed: int):
        self.dim = dim
        self.key = f"curator-hash-{seed}".encode("utf-8")
        self._cache: Dict[str, Tuple[int, float]] = {}

    def __call__(self, token: str) -> Tuple[int, float]:
        hit = self._cache.get(token)
        if hit is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16, key=self.key).digest()
            bucket = int.from_bytes(digest[:8], "little") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            hit = (bucket, sign)
            self._cache[token] = hit
        return hit


def smoothed_idf(document_tokens: Sequence[Sequence[str]]) -> Dict[str, float]:
    """IDF table over distinct tokens per document."""
    n_docs = len(document_tokens)
    df: Counter = Counter()
    for tokens in document_tokens:
        df.update(set(tokens))
    return {token: math.log((n_docs + 1) / (count + 1)) + 1.0 for token, count in df.items()}


def _embed_row(tokens: Sequence[str], idf: Dict[str, float], hasher: SignedHasher) -> np.ndarray:
    row = np.zeros(hasher.dim, dtype=np.float64)
    # sorted so per-bucket accumulation order is fixed
    for token, tf in sorted(Counter(tokens).items()):
        bucket, sign = hasher(token)
        row[bucket] += sign * tf * idf[token]
    return row


def embed_texts(ids: Sequence[int], texts: Sequence[str], dim: int = 256, seed: int = 0,
                threads: int = 1) -> EmbeddingMatrix:
    """Embed already-rendered texts keyed by sample id."""
    if dim < MIN_DIM:
        raise InputError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
    if len(texts) == 0:
        raise InputError("cannot embed an empty corpus")

    documents = [text.split() for text in texts]
    idf = smoothed_idf(documents)
    hasher = SignedHasher(dim, seed)

    # warm the hash cache in one pass so worker threads only read it
    for token in sorted(idf):
        hasher(token)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda tokens: _embed_row(tokens, idf, hasher), documents))
    else:
        rows = [_embed_row(tokens, idf, hasher) for tokens in documents]

    vectors, zero = normalize_rows(np.vstack(rows))
    zero_ids = frozenset(int(sample_id) for sample_id, z in zip(ids, zero) if z)
    if zero_ids:
        logger.warning(f"{len(zero_ids)} instructions embedded to the zero vector: {sorted(zero_ids)[:10]}")

    logger.info(f"Embedded {len(texts)} instructions into {dim} hashed TF-IDF buckets (seed={seed})")
    return EmbeddingMatrix(np.asarray(ids, dtype=np.int64), vectors, zero_ids)


def embed_hashed_tfidf(corpus: Corpus, dim: int = 256, seed: int = 0,
                       template: PromptTemplate = DEFAULT_TEMPLATE,
                       threads: int = 1) -> EmbeddingMatrix:
    """
    Embed every instruction of a corpus.

    The text embedded is the rendered prompt (instruction plus input under the
    template); each row depends only on its own text and the global IDF table.

    Raises:
        InputError: dim < 16 or empty corpus
    """
    if dim < MIN_DIM:
        raise InputError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
    texts = [render_prompt(pair, template).prompt_text for pair in corpus]
    return embed_texts(corpus.ids, texts, dim=dim, seed=seed, threads=threads)
