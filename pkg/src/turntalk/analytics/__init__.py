"""Usage analytics over persisted session snapshots: card-usage counts,
conversation metrics, vocabulary-overlap trends, transcript export, and
figure rendering."""

from .report import (
    UsageReport,
    build_report,
    card_usage_by_dyad,
    overlap_coefficient,
    overlap_by_ordinal,
    session_rows,
    syllable_count,
    top_labels,
)
from .transcript import export_transcript

__all__ = [
    "UsageReport",
    "build_report",
    "card_usage_by_dyad",
    "export_transcript",
    "overlap_by_ordinal",
    "overlap_coefficient",
    "session_rows",
    "syllable_count",
    "top_labels",
]
