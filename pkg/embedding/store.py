"""
EmbeddingMatrix and embedding file I/O.

Embedding file: one record per line {"id": int, "vector": [float, ...]}.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Sequence, Union

import numpy as np

from common.errors import InputError
from corpus.loader import Corpus

logger = logging.getLogger(__name__)

UNIT_NORM_TOLERANCE = 1e-6
RENORM_WARNING = 1e-4


@dataclass
class EmbeddingMatrix:
    """
    Per-sample vectors, rows ordered by ascending id.

    Rows have unit Euclidean norm, except zero rows listed in `zero_ids`.
    """
    ids: np.ndarray
    vectors: np.ndarray
    zero_ids: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.ids.shape[0]:
            raise InputError("embedding rows do not match ids")
        order = np.argsort(self.ids, kind="stable")
        if not np.array_equal(order, np.arange(len(order))):
            self.ids = self.ids[order]
            self.vectors = self.vectors[order]
        if len(np.unique(self.ids)) != len(self.ids):
            raise InputError("embedding ids must be unique")
        self._index = {int(sample_id): i for i, sample_id in enumerate(self.ids)}

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def row(self, sample_id: int) -> np.ndarray:
        return self.vectors[self._index[sample_id]]

    @property
    def rows(self) -> Dict[int, np.ndarray]:
        return {int(sample_id): self.vectors[i] for i, sample_id in enumerate(self.ids)}

    def subset(self, ids: Sequence[int]) -> "EmbeddingMatrix":
        idx = [self._index[int(sample_id)] for sample_id in ids]
        zero = frozenset(int(i) for i in ids if int(i) in self.zero_ids)
        return EmbeddingMatrix(self.ids[idx], self.vectors[idx], zero)


def normalize_rows(vectors: np.ndarray, tolerance: float = 0.0) -> tuple:
    """
    L2-normalize rows whose norm differs from 1 by more than `tolerance`.

    Returns:
        (normalized vectors, boolean mask of zero rows)
    """
    norms = np.linalg.norm(vectors, axis=1)
    zero = norms == 0.0
    needs = (np.abs(norms - 1.0) > tolerance) & ~zero
    out = vectors.copy()
    out[needs] = vectors[needs] / norms[needs, None]
    return out, zero


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def load_embeddings(path: Union[str, Path], corpus: Corpus) -> EmbeddingMatrix:
    """
    Load an embedding file covering every corpus id exactly once.

    Rows are renormalized when their norm is off by more than 1e-6; a warning
    is logged when any row was off by more than 1e-4.

    Raises:
        InputError: missing file, malformed record, duplicate/unknown/missing ids,
                    or inconsistent dimension
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"embedding file not found: {path}")

    ids: List[int] = []
    vectors: List[List[float]] = []
    dim = None

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                sample_id = int(record["id"])
                vector = [float(x) for x in record["vector"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise InputError(f"{path} line {line_no}: malformed embedding record ({e})") from e

            if dim is None:
                dim = len(vector)
                if dim == 0:
                    raise InputError(f"{path} line {line_no}: empty vector")
            elif len(vector) != dim:
                raise InputError(f"{path} line {line_no}: dimension mismatch, "
                                 f"expected {dim} got {len(vector)}")
            ids.append(sample_id)
            vectors.append(vector)

    if len(set(ids)) != len(ids):
        seen, dups = set(), []
        for sample_id in ids:
            if sample_id in seen:
                dups.append(sample_id)
            seen.add(sample_id)
        raise InputError(f"duplicate ids in embedding file: {dups[:10]}")

    present = set(ids)
    missing = [sample_id for sample_id in corpus.ids if sample_id not in present]
    if missing:
        raise InputError(f"ids missing: {missing[:10]}")
    unknown = sorted(present - set(corpus.ids))
    if unknown:
        raise InputError(f"ids not in corpus: {unknown[:10]}")

    raw = np.asarray(vectors, dtype=np.float64)
    drift = np.abs(np.linalg.norm(raw, axis=1) - 1.0)
    matrix, zero = normalize_rows(raw, UNIT_NORM_TOLERANCE)
    off = int(np.count_nonzero((drift > RENORM_WARNING) & ~zero))
    if off:
        logger.warning(f"Renormalized {off} rows of {path} that were not unit norm")
    zero_ids = frozenset(sample_id for sample_id, z in zip(ids, zero) if z)
    if zero_ids:
        logger.warning(f"{len(zero_ids)} zero vectors in {path}")

    logger.info(f"Loaded {len(ids)} embeddings of dim {dim} from {path}")
    return EmbeddingMatrix(np.asarray(ids), matrix, zero_ids)


def write_embeddings(emb: EmbeddingMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for sample_id, vector in zip(emb.ids, emb.vectors):
            f.write(json.dumps({"id": int(sample_id), "vector": vector.tolist()}) + "\n")
    return path
