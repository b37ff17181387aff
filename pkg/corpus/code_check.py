"""
Syntax audit of fenced Python code in responses.

Complex samples are the ones most likely to carry broken code. This audit
flags responses whose ```python fenced blocks do not parse, so they can be
reported or dropped before selection.
"""

import ast
import logging
import re
import warnings
from dataclasses import dataclass, field
from typing import List

from corpus.loader import Corpus

logger = logging.getLogger(__name__)

_FENCE = re.compile(r"```(?:python|py|python3)[ \t]*\r?\n(.*?)```", re.DOTALL | re.IGNORECASE)


@dataclass
class CodeAudit:
    checked_samples: int = 0
    checked_blocks: int = 0
    unparsable_ids: List[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "checked_samples": self.checked_samples,
            "checked_blocks": self.checked_blocks,
            "unparsable_ids": list(self.unparsable_ids),
        }


def python_blocks(text: str) -> List[str]:
    return _FENCE.findall(text)


def block_parses(source: str) -> bool:
    with warnings.catch_warnings():
        # invalid escape sequences in snippets are noise here
        warnings.simplefilter("ignore", SyntaxWarning)
        try:
            ast.parse(source)
        except (SyntaxError, ValueError):
            return False
    return True


def audit_code_blocks(corpus: Corpus) -> CodeAudit:
    """Parse every fenced Python block; a sample fails if any of its blocks fails."""
    audit = CodeAudit()
    for pair in corpus:
        blocks = python_blocks(pair.response)
        if not blocks:
            continue
        audit.checked_samples += 1
        audit.checked_blocks += len(blocks)
        if not all(block_parses(block) for block in blocks):
            audit.unparsable_ids.append(pair.id)

    if audit.unparsable_ids:
        logger.warning(f"{len(audit.unparsable_ids)} of {audit.checked_samples} samples "
                       f"with Python code fail to parse")
    return audit
