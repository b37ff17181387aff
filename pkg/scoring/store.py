"""
Score file export and external log-probability import.

Score file: {"id", "ppl_cond", "ppl_uncond", "ifd"} per line.
External files may carry either two perplexities or two log-probability lists
({"id", "cond_logprobs", "uncond_logprobs"}); ifd is always recomputed.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from common.errors import InputError, ScoringError
from corpus.loader import Corpus
from scoring.perplexity import ScoreRecord, ppl
from storage.artifacts import write_jsonl

logger = logging.getLogger(__name__)


def write_scores(scores: Mapping[int, ScoreRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    write_jsonl(path, (scores[i].to_dict() for i in sorted(scores)))
    return path


def _record_to_score(record: dict, path: Path, line_no: int) -> ScoreRecord:
    where = f"{path} line {line_no}"
    try:
        sample_id = int(record["id"])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{where}: record has no integer id") from e

    has_ppl = "ppl_cond" in record and "ppl_uncond" in record
    has_logprobs = "cond_logprobs" in record and "uncond_logprobs" in record
    if not (has_ppl or has_logprobs):
        raise InputError(f"{where}: needs both perplexities or both log-probability lists")

    try:
        if has_ppl:
            ppl_cond, ppl_uncond = float(record["ppl_cond"]), float(record["ppl_uncond"])
        else:
            ppl_cond = ppl([float(x) for x in record["cond_logprobs"]])
            ppl_uncond = ppl([float(x) for x in record["uncond_logprobs"]])
    except (TypeError, ValueError) as e:
        # InputError from ppl() is also a ValueError
        raise InputError(f"{where}: malformed score record ({e})") from e

    try:
        return ScoreRecord.from_perplexities(sample_id, ppl_cond, ppl_uncond)
    except ScoringError as e:
        raise InputError(f"{where}: {e}") from e


def load_logprob_file(path: Union[str, Path], corpus: Optional[Corpus] = None) -> Dict[int, ScoreRecord]:
    """
    Load externally computed scores, keyed by id.

    Raises:
        InputError: missing file, malformed or duplicate record, non-positive
                    perplexity, or ids that do not cover the corpus
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"score file not found: {path}")

    scores: Dict[int, ScoreRecord] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"{path} line {line_no}: malformed JSON ({e.msg})") from e
            score = _record_to_score(record, path, line_no)
            if score.id in scores:
                raise InputError(f"{path} line {line_no}: duplicate id {score.id}")
            scores[score.id] = score

    if corpus is not None:
        missing = [i for i in corpus.ids if i not in scores]
        if missing:
            raise InputError(f"ids missing: {missing[:10]}")
        unknown = sorted(set(scores) - set(corpus.ids))
        if unknown:
            raise InputError(f"ids not in corpus: {unknown[:10]}")

    logger.info(f"Loaded {len(scores)} score records from {path}")
    return scores


read_scores = load_logprob_file
