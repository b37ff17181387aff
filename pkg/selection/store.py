"""
Selection file I/O.

Header line: strategy, m_percent, seed, count, pool size, dropped ids and the
per-cluster (total, selected) table; then one row per selected id in
selection order: {"id", "cluster", "ifd", "rank_in_cluster"}.
"""

import logging
from pathlib import Path
from typing import Union

from common.errors import InputError
from selection.cdas import SelectionResult, SelectionRow
from storage.artifacts import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


def write_selection(result: SelectionResult, path: Union[str, Path]) -> Path:
    path = Path(path)
    header = {
        "strategy": result.strategy,
        "m_percent": result.m_percent,
        "seed": result.seed,
        "count": len(result),
        "pool_size": result.pool_size,
        "dropped": result.dropped_ids,
        "per_cluster": [[c, total, chosen] for c, (total, chosen) in sorted(result.per_cluster_counts.items())],
    }
    write_jsonl(path, (row.to_dict() for row in result.rows), header=header)
    logger.info(f"Wrote {len(result)} selected ids to {path}")
    return path


def read_selection(path: Union[str, Path]) -> SelectionResult:
    """
    Raises:
        InputError: missing header, malformed row, or a count that disagrees with the rows
    """
    header, records = read_jsonl(path)
    if header is None or "strategy" not in header:
        raise InputError(f"{path}: missing selection header")

    try:
        rows = [SelectionRow(int(r["id"]), int(r["cluster"]),
                             None if r.get("ifd") is None else float(r["ifd"]),
                             int(r["rank_in_cluster"])) for r in records]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: malformed selection row ({e})") from e

    if header.get("count") is not None and int(header["count"]) != len(rows):
        raise InputError(f"{path}: header count {header['count']} but {len(rows)} rows")

    return SelectionResult(
        strategy=header["strategy"],
        m_percent=float(header["m_percent"]),
        selected_ids=[row.id for row in rows],
        per_cluster_counts={int(c): (int(t), int(s)) for c, t, s in header.get("per_cluster", [])},
        rows=rows,
        seed=header.get("seed"),
        dropped_ids=[int(i) for i in header.get("dropped", [])],
        pool_size=int(header.get("pool_size", 0)),
    )
