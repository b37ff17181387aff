"""
Dataset loading and export.

Two line-oriented schemas are supported:
- alpaca:          {"instruction": str, "input": str-or-empty, "output": str}
- prompt-response: {"id": int?, "prompt": str, "response": str}

Both accept an optional integer "id". When absent, ids are the 0-based record
index in file order. All downstream artifacts key on id, never on text.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Literal, Optional, Sequence, Union

from common.errors import DatasetError, InputError

logger = logging.getLogger(__name__)

Schema = Literal["alpaca", "prompt-response"]
SCHEMAS = ("alpaca", "prompt-response")

# (instruction key, input key or None, response key) per schema
_FIELDS = {
    "alpaca": ("instruction", "input", "output"),
    "prompt-response": ("prompt", None, "response"),
}


@dataclass(frozen=True)
class InstructionPair:
    """One (instruction, optional input, response) record with a stable id."""
    id: int
    instruction: str
    input: Optional[str]
    response: str

    @property
    def has_input(self) -> bool:
        return bool(self.input and self.input.strip())


class Corpus:
    """
    Ordered, id-keyed collection of InstructionPair records.

    Ids are unique and strictly increasing in order.
    """

    def __init__(self, pairs: Sequence[InstructionPair], schema: Schema = "alpaca",
                 explicit_ids: bool = False, source: Optional[str] = None):
        self.pairs: List[InstructionPair] = list(pairs)
        self.schema = schema
        self.explicit_ids = explicit_ids
        self.source = source
        self._index: Dict[int, int] = {pair.id: i for i, pair in enumerate(self.pairs)}

        if len(self._index) != len(self.pairs):
            raise InputError("corpus ids must be unique")
        for prev, cur in zip(self.pairs, self.pairs[1:]):
            if cur.id <= prev.id:
                raise InputError(f"corpus ids must be strictly increasing: {prev.id} then {cur.id}")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[InstructionPair]:
        return iter(self.pairs)

    def __contains__(self, sample_id: int) -> bool:
        return sample_id in self._index

    @property
    def ids(self) -> List[int]:
        return [pair.id for pair in self.pairs]

    def get(self, sample_id: int) -> InstructionPair:
        try:
            return self.pairs[self._index[sample_id]]
        except KeyError:
            raise InputError(f"unknown sample id: {sample_id}")

    def subset(self, ids: Iterable[int]) -> "Corpus":
        """Corpus restricted to `ids`, keeping file order."""
        wanted = set(ids)
        missing = sorted(wanted - set(self._index))
        if missing:
            raise InputError(f"ids missing: {missing[:10]}")
        pairs = [pair for pair in self.pairs if pair.id in wanted]
        return Corpus(pairs, schema=self.schema, explicit_ids=self.explicit_ids, source=self.source)

    def __repr__(self) -> str:
        return f"Corpus(n={len(self)}, schema='{self.schema}', source={self.source!r})"


def _require_text(record: dict, key: str, label: str, line_no: int) -> str:
    value = record.get(key)
    if value is None:
        raise DatasetError(f"missing {label}", line=line_no)
    if not isinstance(value, str):
        raise DatasetError(f"{label} must be a string", line=line_no)
    if not value.strip():
        raise DatasetError(f"empty {label}", line=line_no)
    return value


def _parse_record(record: dict, schema: Schema, line_no: int, position: int) -> tuple:
    instruction_key, input_key, response_key = _FIELDS[schema]

    instruction = _require_text(record, instruction_key, "instruction", line_no)
    response = _require_text(record, response_key, "response", line_no)

    input_text = None
    if input_key is not None:
        raw_input = record.get(input_key)
        if raw_input is not None and not isinstance(raw_input, str):
            raise DatasetError("input must be a string", line=line_no)
        input_text = raw_input if raw_input else None

    explicit = "id" in record
    if explicit:
        sample_id = record["id"]
        if isinstance(sample_id, bool) or not isinstance(sample_id, int) or sample_id < 0:
            raise DatasetError(f"id must be a non-negative integer, got {sample_id!r}", line=line_no)
    else:
        sample_id = position

    return InstructionPair(sample_id, instruction, input_text, response), explicit


def load_dataset(path: Union[str, Path], schema: Schema = "alpaca") -> Corpus:
    """
    Load a one-record-per-line UTF-8 dataset.

    Args:
        path: Dataset file
        schema: "alpaca" or "prompt-response"

    Returns:
        Corpus: all records in file order

    Raises:
        InputError: unknown schema or missing file
        DatasetError: malformed line, empty field, duplicate or decreasing id, empty file
    """
    if schema not in SCHEMAS:
        raise InputError(f"unknown schema '{schema}', expected one of {SCHEMAS}")

    path = Path(path)
    if not path.exists():
        raise InputError(f"dataset file not found: {path}")

    pairs: List[InstructionPair] = []
    seen: Dict[int, int] = {}
    any_explicit = False

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"malformed JSON ({e.msg})", line=line_no) from e
            if not isinstance(record, dict):
                raise DatasetError("record must be a JSON object", line=line_no)

            pair, explicit = _parse_record(record, schema, line_no, len(pairs))
            any_explicit = any_explicit or explicit

            if pair.id in seen:
                raise DatasetError(f"duplicate id {pair.id} (first seen on line {seen[pair.id]})", line=line_no)
            if pairs and pair.id <= pairs[-1].id:
                raise DatasetError(f"id {pair.id} is not increasing after {pairs[-1].id}", line=line_no)

            seen[pair.id] = line_no
            pairs.append(pair)

    if not pairs:
        raise DatasetError(f"empty dataset: {path}")

    logger.info(f"Loaded {len(pairs)} records from {path} (schema={schema})")
    return Corpus(pairs, schema=schema, explicit_ids=any_explicit, source=str(path))


def pair_to_record(pair: InstructionPair, schema: Schema, with_id: bool) -> dict:
    """Serialize one pair in the given schema."""
    instruction_key, input_key, response_key = _FIELDS[schema]
    record = {}
    if with_id:
        record["id"] = pair.id
    record[instruction_key] = pair.instruction
    if input_key is not None:
        record[input_key] = pair.input or ""
    record[response_key] = pair.response
    return record


def write_dataset(corpus: Corpus, path: Union[str, Path], schema: Optional[Schema] = None,
                  with_ids: Optional[bool] = None) -> Path:
    """
    Write a corpus back to a one-record-per-line file.

    Ids are written when the source carried them (or when forced with `with_ids`),
    so load -> write reproduces the input modulo field order.
    """
    schema = schema or corpus.schema
    with_ids = corpus.explicit_ids if with_ids is None else with_ids
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8") as f:
        for pair in corpus:
            f.write(json.dumps(pair_to_record(pair, schema, with_ids), ensure_ascii=False) + "\n")

    logger.info(f"Wrote {len(corpus)} records to {path}")
    return path
