"""
Prompt rendering and token counting.

The complete instruction q is produced by substituting the instruction (and
input when present) into a control-token template. Token counts come from the
active TokenizerSpec: unicode-whitespace splitting by default, UTF-8 bytes, or
precomputed per-sample counts from an external file.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from common.errors import InputError
from corpus.loader import Corpus, InstructionPair

logger = logging.getLogger(__name__)


DEFAULT_PROMPT_NO_INPUT = "### Instruction:\n{instruction}\n\n### Response:\n"
DEFAULT_PROMPT_INPUT = "### Instruction:\n{instruction}\n\n### Input:\n{input}\n\n### Response:\n"

_PLACEHOLDER = re.compile(r"\{(instruction|input)\}")

TokenizerKind = Literal["whitespace", "byte", "external-counts"]


@dataclass(frozen=True)
class PromptTemplate:
    """Control-token layout of the complete instruction, with and without an input section."""
    prompt_input: str = DEFAULT_PROMPT_INPUT
    prompt_no_input: str = DEFAULT_PROMPT_NO_INPUT

    def __post_init__(self):
        for name in ("prompt_input", "prompt_no_input"):
            if "{instruction}" not in getattr(self, name):
                raise InputError(f"template {name} is missing the {{instruction}} placeholder")
        if "{input}" not in self.prompt_input:
            logger.warning("Template prompt_input has no {input} placeholder; inputs will be dropped")

    def fill(self, instruction: str, input_text: Optional[str]) -> str:
        # Single pass so placeholder-like text inside an instruction is never re-substituted
        template = self.prompt_input if input_text else self.prompt_no_input
        values = {"instruction": instruction, "input": input_text or ""}
        return _PLACEHOLDER.sub(lambda m: values[m.group(1)], template)


DEFAULT_TEMPLATE = PromptTemplate()


@dataclass(frozen=True)
class TokenizerSpec:
    kind: TokenizerKind = "whitespace"
    external_path: Optional[str] = None


@dataclass(frozen=True)
class RenderedSample:
    id: int
    prompt_text: str
    response_text: str
    prompt_tokens: int
    response_tokens: int

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.response_tokens


def count_whitespace(text: str) -> int:
    return len(text.split())


def count_bytes(text: str) -> int:
    return len(text.encode("utf-8"))


class TokenCounter:
    """
    Counts prompt/response tokens for a sample under a TokenizerSpec.

    External counts are keyed by sample id, so counting always receives the id.
    """

    def __init__(self, spec: TokenizerSpec = TokenizerSpec(),
                 external_counts: Optional[Dict[int, Tuple[int, int]]] = None):
        self.spec = spec
        self.external_counts = external_counts or {}
        if spec.kind == "external-counts" and external_counts is None:
            raise InputError("external-counts tokenizer needs loaded counts; use build_token_counter")

    def count_text(self, text: str) -> int:
        if self.spec.kind == "byte":
            return count_bytes(text)
        return count_whitespace(text)

    def count(self, sample_id: int, prompt_text: str, response_text: str) -> Tuple[int, int]:
        if self.spec.kind == "external-counts":
            try:
                return self.external_counts[sample_id]
            except KeyError:
                raise InputError(f"external token counts missing sample id {sample_id}")
        return self.count_text(prompt_text), self.count_text(response_text)


def load_token_counts(path: Union[str, Path]) -> Dict[int, Tuple[int, int]]:
    """
    Load {"id", "prompt_tokens", "response_tokens"} records.

    Raises:
        InputError: missing file, malformed record, duplicate id or count < 1
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"token counts file not found: {path}")

    counts: Dict[int, Tuple[int, int]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                sample_id = int(record["id"])
                prompt_tokens = int(record["prompt_tokens"])
                response_tokens = int(record["response_tokens"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise InputError(f"{path} line {line_no}: malformed token count record ({e})") from e
            if sample_id in counts:
                raise InputError(f"{path} line {line_no}: duplicate id {sample_id}")
            if prompt_tokens < 1 or response_tokens < 1:
                raise InputError(f"{path} line {line_no}: token counts must be >= 1")
            counts[sample_id] = (prompt_tokens, response_tokens)
    return counts


def build_token_counter(spec: TokenizerSpec, corpus: Optional[Corpus] = None) -> TokenCounter:
    """
    Build a TokenCounter; external counts must exist and cover every corpus id.
    """
    if spec.kind != "external-counts":
        return TokenCounter(spec)
    if not spec.external_path:
        raise InputError("external-counts tokenizer requires external_path")

    counts = load_token_counts(spec.external_path)
    if corpus is not None:
        missing = [sample_id for sample_id in corpus.ids if sample_id not in counts]
        if missing:
            raise InputError(f"external token counts missing ids: {missing[:10]}")
    return TokenCounter(spec, counts)


_DEFAULT_COUNTER = TokenCounter()


def render_prompt(pair: InstructionPair, template: PromptTemplate = DEFAULT_TEMPLATE,
                  counter: Optional[TokenCounter] = None) -> RenderedSample:
    """
    Render the complete instruction for a pair and count its tokens.

    Raises:
        InputError: the pair breaks its invariants, or a count is below 1
    """
    if not pair.instruction.strip():
        raise InputError(f"sample {pair.id}: empty instruction")
    if not pair.response.strip():
        raise InputError(f"sample {pair.id}: empty response")

    counter = counter or _DEFAULT_COUNTER
    prompt_text = template.fill(pair.instruction, pair.input if pair.has_input else None)
    prompt_tokens, response_tokens = counter.count(pair.id, prompt_text, pair.response)

    if prompt_tokens < 1 or response_tokens < 1:
        raise InputError(f"sample {pair.id}: prompt and response need at least one token each")

    return RenderedSample(
        id=pair.id,
        prompt_text=prompt_text,
        response_text=pair.response,
        prompt_tokens=prompt_tokens,
        response_tokens=response_tokens,
    )


def render_corpus(corpus: Corpus, template: PromptTemplate = DEFAULT_TEMPLATE,
                  counter: Optional[TokenCounter] = None) -> List[RenderedSample]:
    """Render every pair in corpus order."""
    return [render_prompt(pair, template, counter) for pair in corpus]
