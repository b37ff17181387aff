"""Format curation reports for output."""

from typing import Dict, Optional

from packing.report import EfficiencyReport
from selection.cdas import SelectionResult


class ReportFormatter:
    """Format selection and padding results into a readable report."""

    def format(self, report: EfficiencyReport, selection: Optional[SelectionResult] = None,
               corpus_stats: Optional[Dict] = None) -> str:
        """Format an efficiency report (and optionally the selection it was built from)."""
        lines = []
        lines.append("=== CODE CURATOR REPORT ===")
        lines.append("")

        if corpus_stats:
            lines.append("Corpus")
            lines.append(f"  samples: {corpus_stats.get('count')}  total tokens: {corpus_stats.get('total')}")
            lines.append(f"  length min/mean/max: {corpus_stats.get('min')} / "
                         f"{corpus_stats.get('mean', 0.0):.1f} / {corpus_stats.get('max')}")
            lines.append(f"  p50/p90/p99: {corpus_stats.get('p50')} / {corpus_stats.get('p90')} / "
                         f"{corpus_stats.get('p99')}")
            lines.append("")

        if selection is not None:
            lines.append(self.format_selection(selection))
            lines.append("")

        lines.append(f"Padding ({report.samples} samples)")
        frame = report.to_frame()
        frame["padding_ratio"] = frame["padding_ratio"].map(lambda r: f"{r:.4f}")
        lines.append(frame.to_string())
        if report.sequence_reduction is not None:
            lines.append("")
            lines.append(f"Dynamic pack uses {report.sequence_reduction:.1%} fewer sequences than dynamic padding")

        return "\n".join(lines) + "\n"

    def format_selection(self, selection: SelectionResult) -> str:
        lines = [f"Selection: {selection.strategy}, m={selection.m_percent:g}%, "
                 f"{len(selection)} of {selection.pool_size} samples"]
        if selection.dropped_ids:
            lines.append(f"  dropped before selection: {len(selection.dropped_ids)}")
        if selection.per_cluster_counts:
            lines.append("  cluster  members  selected")
            for c, (total, chosen) in sorted(selection.per_cluster_counts.items()):
                lines.append(f"  {c:>7}  {total:>7}  {chosen:>8}")
        return "\n".join(lines)


def format_report(report: EfficiencyReport, selection: Optional[SelectionResult] = None,
                  corpus_stats: Optional[Dict] = None) -> str:
    return ReportFormatter().format(report, selection, corpus_stats)
