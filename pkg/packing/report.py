"""
Padding efficiency report across strategies.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import pandas as pd

from common.errors import InputError
from packing.plans import PackPlan

logger = logging.getLogger(__name__)

COLUMNS = ["total_sequences", "content_tokens", "separator_tokens", "padding_tokens",
           "padded_total", "padding_ratio"]


@dataclass(frozen=True)
class StrategyEfficiency:
    strategy: str
    total_sequences: int
    content_tokens: int
    separator_tokens: int
    padding_tokens: int
    padded_total: int
    padding_ratio: float

    @classmethod
    def from_plan(cls, plan: PackPlan) -> "StrategyEfficiency":
        return cls(plan.strategy, plan.total_sequences, plan.content_tokens, plan.separator_tokens,
                   plan.padding_tokens, plan.padded_total, plan.padding_ratio)

    def to_dict(self) -> dict:
        return {column: getattr(self, column) for column in COLUMNS}


@dataclass
class EfficiencyReport:
    strategies: Dict[str, StrategyEfficiency] = field(default_factory=dict)
    # 1 - sequences(dynamic-pack) / sequences(dynamic), when both plans are present
    sequence_reduction: Optional[float] = None
    samples: int = 0

    def __getitem__(self, strategy: str) -> StrategyEfficiency:
        return self.strategies[strategy]

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "strategies": {name: row.to_dict() for name, row in self.strategies.items()},
            "sequence_reduction": self.sequence_reduction,
        }

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([row.to_dict() for row in self.strategies.values()],
                             index=list(self.strategies), columns=COLUMNS)
        frame.index.name = "strategy"
        return frame


def efficiency_report(plans: Sequence[PackPlan]) -> EfficiencyReport:
    """
    Token accounting per strategy.

    Raises:
        InputError: no plans, or plans that do not cover the same samples
    """
    if not plans:
        raise InputError("efficiency_report needs at least one plan")
    reference = sorted(plans[0].sample_ids())
    for p in plans[1:]:
        if sorted(p.sample_ids()) != reference:
            raise InputError(f"plans cover different sample sets ({plans[0].strategy} vs {p.strategy})")

    report = EfficiencyReport(samples=len(reference))
    for p in plans:
        report.strategies[p.strategy] = StrategyEfficiency.from_plan(p)

    if "dynamic" in report.strategies and "dynamic-pack" in report.strategies:
        dynamic = report.strategies["dynamic"].total_sequences
        packed = report.strategies["dynamic-pack"].total_sequences
        report.sequence_reduction = 1.0 - packed / dynamic if dynamic else 0.0

    for name, row in report.strategies.items():
        logger.info(f"{name}: {row.total_sequences} sequences, padding ratio {row.padding_ratio:.4f}")
    return report
