"""
Pack plan data types.

A plan is a list of batches; a batch is a list of packed sequences; a packed
sequence is an ordered list of segments (sample id, offset, length) followed by
padding. Adjacent segments are separated by `separator_cost` tokens.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from common.errors import InvariantViolation

STRATEGIES = ("traditional", "dynamic", "dynamic-pack")


class SampleLength(NamedTuple):
    """Minimal sample view the planners need; RenderedSample satisfies the same shape."""
    id: int
    total_tokens: int


def as_samples(lengths: Sequence[int], start_id: int = 0) -> List[SampleLength]:
    """Give raw lengths consecutive ids."""
    return [SampleLength(start_id + i, int(length)) for i, length in enumerate(lengths)]


@dataclass(frozen=True)
class Segment:
    id: int
    offset: int
    length: int

    def to_dict(self) -> dict:
        return {"id": self.id, "offset": self.offset, "len": self.length}


@dataclass(frozen=True)
class PackedSequence:
    segments: Tuple[Segment, ...]
    seq_len: int
    pad: int

    @property
    def content_tokens(self) -> int:
        return sum(s.length for s in self.segments)

    @property
    def separator_tokens(self) -> int:
        return self.seq_len - self.pad - self.content_tokens

    @property
    def used(self) -> int:
        return self.seq_len - self.pad


def build_sequence(items: Sequence[Tuple[int, int]], separator_cost: int, seq_len: int) -> PackedSequence:
    """Lay (id, length) items out with separators between them and pad to seq_len."""
    segments = []
    offset = 0
    for i, (sample_id, length) in enumerate(items):
        if i:
            offset += separator_cost
        segments.append(Segment(int(sample_id), offset, int(length)))
        offset += length
    if offset > seq_len:
        raise InvariantViolation(f"sequence content {offset} exceeds its length {seq_len}")
    return PackedSequence(tuple(segments), seq_len, seq_len - offset)


@dataclass
class Batch:
    index: int
    sequences: List[PackedSequence]
    # bin capacity FFD used for this batch (dynamic-pack only)
    capacity: Optional[int] = None

    @property
    def seq_len(self) -> int:
        return self.sequences[0].seq_len if self.sequences else 0


@dataclass
class PackPlan:
    strategy: str
    max_len: int
    batch_size: int
    separator_cost: int = 0
    batches: List[Batch] = field(default_factory=list)
    global_pack: bool = False

    def sequences(self) -> Iterator[Tuple[int, int, PackedSequence]]:
        """(batch index, sequence index, sequence) in manifest order."""
        for batch in self.batches:
            for seq_index, sequence in enumerate(batch.sequences):
                yield batch.index, seq_index, sequence

    def sample_ids(self) -> List[int]:
        return [segment.id for _, _, sequence in self.sequences() for segment in sequence.segments]

    @property
    def total_sequences(self) -> int:
        return sum(len(batch.sequences) for batch in self.batches)

    @property
    def content_tokens(self) -> int:
        return sum(sequence.content_tokens for _, _, sequence in self.sequences())

    @property
    def separator_tokens(self) -> int:
        return sum(sequence.separator_tokens for _, _, sequence in self.sequences())

    @property
    def padding_tokens(self) -> int:
        return sum(sequence.pad for _, _, sequence in self.sequences())

    @property
    def padded_total(self) -> int:
        return sum(sequence.seq_len for _, _, sequence in self.sequences())

    @property
    def padding_ratio(self) -> float:
        total = self.padded_total
        return self.padding_tokens / total if total else 0.0

    def validate(self, expected_ids: Optional[Iterable[int]] = None) -> None:
        """
        Check coverage and per-sequence length accounting.

        Raises:
            InvariantViolation: on the first broken invariant
        """
        ids = self.sample_ids()
        if len(set(ids)) != len(ids):
            raise InvariantViolation(f"{self.strategy}: a sample appears in more than one segment")
        if expected_ids is not None and set(ids) != set(expected_ids):
            raise InvariantViolation(f"{self.strategy}: plan does not cover the input samples exactly")

        for batch in self.batches:
            longest = max((s.used for s in batch.sequences), default=0)
            for sequence in batch.sequences:
                n_seg = len(sequence.segments)
                expected_used = sequence.content_tokens + self.separator_cost * max(n_seg - 1, 0)
                if sequence.used != expected_used:
                    raise InvariantViolation(f"{self.strategy}: batch {batch.index} separator accounting broken")
                if sequence.seq_len > self.max_len:
                    raise InvariantViolation(f"{self.strategy}: batch {batch.index} sequence exceeds max_len")
                if self.strategy == "traditional" and sequence.seq_len != self.max_len:
                    raise InvariantViolation(f"traditional: batch {batch.index} not padded to max_len")
                if self.strategy != "traditional" and sequence.seq_len != longest:
                    raise InvariantViolation(f"{self.strategy}: batch {batch.index} not padded to its "
                                             f"longest sequence")
