"""
Artifact storage for the Code Curator toolkit.

This module provides:
- Line-oriented JSON (jsonl) reading and writing with an optional header line
- ArtifactStore: the per-run output directory with one file per stage output,
  the resolved config, run metadata and the FAILED marker
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from common.errors import InputError
from common.utils_time import timestamp_iso

logger = logging.getLogger(__name__)

HEADER_KEY = "header"


def write_jsonl(path: Union[str, Path], records: Iterable[dict], header: Optional[dict] = None) -> int:
    """
    Write records one per line; a header, when given, is the first line as {"header": {...}}.

    Returns:
        int: number of records written (header excluded)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header is not None:
            f.write(json.dumps({HEADER_KEY: header}) + "\n")
        for record in records:
            f.write(json.dumps(record) + "\n")
            count += 1
    logger.debug(f"Wrote {count} records to {path}")
    return count


def read_jsonl(path: Union[str, Path]) -> Tuple[Optional[dict], List[dict]]:
    """
    Read a jsonl file written by write_jsonl.

    Returns:
        (header or None, records)

    Raises:
        InputError: missing file or malformed line (with line number)
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"artifact not found: {path}")

    header: Optional[dict] = None
    records: List[dict] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"{path} line {line_no}: malformed JSON ({e.msg})") from e
            if line_no == 1 and isinstance(record, dict) and set(record) == {HEADER_KEY}:
                header = record[HEADER_KEY]
                continue
            records.append(record)
    return header, records


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.exists():
        raise InputError(f"artifact not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


class ArtifactStore:
    """
    One run's output directory.

    Every stage reads its inputs from files written here by earlier stages (or
    named by the config) so stages can be re-run on their own. Timestamps are
    written only to metadata.json; every other artifact is a pure function of
    the configuration and inputs.
    """

    SAMPLES = "samples.jsonl"
    CORPUS_STATS = "corpus_stats.json"
    CODE_AUDIT = "code_audit.json"
    EMBEDDINGS = "embeddings.jsonl"
    CLUSTERS = "clusters.jsonl"
    CENTROIDS = "centroids.jsonl"
    SCORES = "scores.jsonl"
    SELECTION = "selection.jsonl"
    MANIFEST = "manifest.jsonl"
    REPORT_JSON = "report.json"
    REPORT_TEXT = "report.txt"
    RESOLVED_CONFIG = "resolved_config.toml"
    METADATA = "metadata.json"
    FAILED = "FAILED"

    def __init__(self, root: Union[str, Path], tz_name: Optional[str] = None):
        self.logger = logging.getLogger(__name__)
        self.root = Path(root)
        self.tz_name = tz_name
        self.root.mkdir(parents=True, exist_ok=True)
        self._metadata: Dict[str, Any] = {}

    def path(self, name: str) -> Path:
        return self.root / name

    def has(self, name: str) -> bool:
        return self.path(name).exists()

    def require(self, name: str, stage: str) -> Path:
        """Path of an artifact an upstream stage must have produced."""
        p = self.path(name)
        if not p.exists():
            raise InputError(f"{p} not found; run the stage that produces it before '{stage}'")
        return p

    def mark_failed(self, stage: str, message: str) -> Path:
        """Write the FAILED marker; earlier outputs are left in place."""
        p = self.path(self.FAILED)
        with open(p, "w", encoding="utf-8") as f:
            f.write(f"stage: {stage}\nerror: {message}\n")
        self.logger.error(f"Marked {self.root} as failed at stage '{stage}'")
        return p

    def clear_failed(self) -> None:
        p = self.path(self.FAILED)
        if p.exists():
            p.unlink()

    def is_failed(self) -> bool:
        return self.has(self.FAILED)

    def record_stage(self, stage: str, seconds: float, **details) -> None:
        """Collect per-stage timing for metadata.json."""
        self._metadata.setdefault("stages", {})[stage] = {
            "finished_at": timestamp_iso(self.tz_name),
            "seconds": round(seconds, 6),
            **details,
        }

    def write_metadata(self, **extra) -> Path:
        """Merge with existing metadata so separately run stages accumulate."""
        existing: Dict[str, Any] = {}
        if self.has(self.METADATA):
            try:
                existing = read_json(self.path(self.METADATA))
            except (InputError, json.JSONDecodeError):
                existing = {}
        stages = {**existing.get("stages", {}), **self._metadata.get("stages", {})}
        data = {**existing, **extra, "stages": stages, "written_at": timestamp_iso(self.tz_name)}
        return write_json(self.path(self.METADATA), data)

    def __repr__(self) -> str:
        return f"ArtifactStore(root='{self.root}')"
