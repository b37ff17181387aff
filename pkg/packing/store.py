"""
Pack manifest I/O.

Header: strategy, max_len, batch_size, separator_cost, global, and the FFD
capacity used per batch; then one record per packed sequence:
{"batch", "seq", "segments": [{"id", "offset", "len"}], "pad", "seq_len"}.
"""

from pathlib import Path
from typing import Dict, List, Union

from common.errors import InputError
from packing.plans import Batch, PackedSequence, PackPlan, Segment
from storage.artifacts import read_jsonl, write_jsonl


def write_manifest(plan: PackPlan, path: Union[str, Path]) -> Path:
    header = {
        "strategy": plan.strategy,
        "max_len": plan.max_len,
        "batch_size": plan.batch_size,
        "separator_cost": plan.separator_cost,
        "global": plan.global_pack,
        "batch_capacity": [batch.capacity for batch in plan.batches],
    }
    records = ({
        "batch": batch_index,
        "seq": seq_index,
        "segments": [segment.to_dict() for segment in sequence.segments],
        "pad": sequence.pad,
        "seq_len": sequence.seq_len,
    } for batch_index, seq_index, sequence in plan.sequences())
    write_jsonl(path, records, header=header)
    return Path(path)


def read_manifest(path: Union[str, Path]) -> PackPlan:
    header, records = read_jsonl(path)
    if header is None or "strategy" not in header:
        raise InputError(f"{path}: missing manifest header")

    grouped: Dict[int, List[PackedSequence]] = {}
    try:
        for record in records:
            segments = tuple(Segment(int(s["id"]), int(s["offset"]), int(s["len"])) for s in record["segments"])
            grouped.setdefault(int(record["batch"]), []).append(
                PackedSequence(segments, int(record["seq_len"]), int(record["pad"])))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: malformed manifest record ({e})") from e

    capacities = header.get("batch_capacity") or []
    batches = [Batch(index, grouped[index], capacities[index] if index < len(capacities) else None)
               for index in sorted(grouped)]
    return PackPlan(header["strategy"], int(header["max_len"]), int(header["batch_size"]),
                    int(header["separator_cost"]), batches, global_pack=bool(header.get("global", False)))
