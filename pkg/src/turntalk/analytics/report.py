"""Aggregate metrics over persisted session snapshots.

All functions here consume the plain-dict snapshots the storage layer
writes (``Session.snapshot()`` shape); nothing touches live sessions or
providers, so reports can run offline against a data directory.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from statistics import fmean
from typing import Iterable, Optional

from ..domain import CardCategory
from ..errors import EmptySet, InsufficientData

CATEGORIES = tuple(c.value for c in CardCategory)
TOP_K = 20

_HANGUL_FIRST = 0xAC00
_HANGUL_LAST = 0xD7A3


def syllable_count(text: str, locale: str = "en") -> int:
    """Syllables in one utterance. Korean locales count Hangul syllable
    blocks; other locales fall back to a whitespace-token proxy."""
    if locale.lower().startswith("ko"):
        return sum(1 for ch in text if _HANGUL_FIRST <= ord(ch) <= _HANGUL_LAST)
    return len(text.split())


def overlap_coefficient(a: Iterable[str], b: Iterable[str]) -> float:
    """|A intersect B| / min(|A|, |B|)."""
    set_a, set_b = set(a), set(b)
    if not set_a or not set_b:
        raise EmptySet("overlap coefficient is undefined for an empty set")
    return len(set_a & set_b) / min(len(set_a), len(set_b))


def child_turn_ordinal(turn_index: int) -> Optional[int]:
    """1-based child-turn position for a global turn index, or None for
    parent turns. Turns alternate parent/child starting at parent 0, so
    child turns sit at odd indices."""
    if turn_index % 2 == 0:
        return None
    return (turn_index + 1) // 2


def card_usage_by_dyad(snapshots: list[dict]) -> dict[str, dict[str, int]]:
    """Selected-card counts per dyad per category (the strip at commit
    time, repeats included)."""
    usage: dict[str, dict[str, int]] = {}
    for snapshot in snapshots:
        row = usage.setdefault(snapshot["dyad_id"], {c: 0 for c in CATEGORIES})
        for selection in snapshot.get("selection_log", ()):
            row[selection["category"]] += 1
    return usage


def top_labels(
    snapshots: list[dict],
    ordinal: int,
    k: int = TOP_K,
    basis: str = "recommended",
) -> list[str]:
    """The k most frequent non-core labels at one child-turn ordinal,
    across every given snapshot.

    ``recommended`` counts labels dealt in decks (what the system offered);
    ``selected`` counts labels the child actually committed. Core cards are
    excluded either way: the fixed row is shared by every dyad and would
    drown the personalized signal.
    """
    counts: Counter[str] = Counter()
    if basis == "recommended":
        for snapshot in snapshots:
            for deck in snapshot.get("decks", ()):
                if child_turn_ordinal(deck["turn_index"]) != ordinal:
                    continue
                for card in deck["cards"]:
                    if card["category"] != CardCategory.CORE.value:
                        counts[card["label_canonical"]] += 1
    elif basis == "selected":
        for snapshot in snapshots:
            for selection in snapshot.get("selection_log", ()):
                if child_turn_ordinal(selection["turn_index"]) != ordinal:
                    continue
                if selection["category"] != CardCategory.CORE.value:
                    counts[selection["label_canonical"]] += 1
    else:
        raise ValueError(f"unknown basis {basis!r}")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [label for label, _ in ranked[:k]]


def overlap_by_ordinal(
    snapshots: list[dict],
    max_ordinal: int = 4,
    k: int = TOP_K,
    basis: str = "recommended",
) -> list[dict]:
    """Mean pairwise top-k label overlap between dyads, per child-turn
    ordinal. Falling overlap across ordinals means recommendations diverge
    as conversations become more personal."""
    by_dyad: dict[str, list[dict]] = {}
    for snapshot in snapshots:
        by_dyad.setdefault(snapshot["dyad_id"], []).append(snapshot)
    rows = []
    for ordinal in range(1, max_ordinal + 1):
        tops = {
            dyad_id: top_labels(group, ordinal, k=k, basis=basis)
            for dyad_id, group in sorted(by_dyad.items())
        }
        tops = {d: labels for d, labels in tops.items() if labels}
        if len(tops) < 2:
            # Data only gets sparser at later ordinals; stop rather than
            # discard the ordinals that did have enough dyads.
            break
        pair_scores = [
            overlap_coefficient(tops[a], tops[b]) for a, b in combinations(sorted(tops), 2)
        ]
        rows.append(
            {"ordinal": ordinal, "dyads": len(tops), "mean_overlap": fmean(pair_scores)}
        )
    if not rows:
        raise InsufficientData("overlap needs at least two dyads with data")
    return rows


def session_rows(snapshots: list[dict]) -> list[dict]:
    """One flat row per session for the delimited export."""
    rows = []
    for snapshot in sorted(snapshots, key=lambda s: (s["dyad_id"], s["session_id"])):
        started = snapshot.get("started_at") or 0.0
        ended = snapshot.get("ended_at")
        duration = (ended - started) if ended is not None else None
        locale = snapshot.get("locale_target", "en")
        syllables = sum(
            syllable_count(m.get("parent_text") or "", locale)
            for m in snapshot.get("history", ())
            if m["speaker"] == "parent"
        )
        rows.append(
            {
                "session_id": snapshot["session_id"],
                "dyad_id": snapshot["dyad_id"],
                "started_at": started,
                "ended_at": ended,
                "duration_seconds": duration,
                "exchanges": snapshot.get("exchanges", 0),
                "stars": snapshot.get("stars"),
                "parent_syllables": syllables,
            }
        )
    return rows


@dataclass
class UsageReport:
    sessions: int
    mean_duration_seconds: Optional[float]
    mean_exchanges: float
    mean_parent_syllables: float
    usage_by_dyad: dict[str, dict[str, int]] = field(default_factory=dict)
    category_totals: dict[str, int] = field(default_factory=dict)
    grand_total: int = 0
    overlap: list[dict] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "sessions": self.sessions,
            "mean_duration_seconds": self.mean_duration_seconds,
            "mean_exchanges": self.mean_exchanges,
            "mean_parent_syllables": self.mean_parent_syllables,
            "usage_by_dyad": self.usage_by_dyad,
            "category_totals": self.category_totals,
            "grand_total": self.grand_total,
            "overlap": self.overlap,
        }


def build_report(
    snapshots: list[dict],
    k: int = TOP_K,
    max_ordinal: int = 4,
    basis: str = "recommended",
) -> UsageReport:
    if not snapshots:
        raise InsufficientData("no sessions to report on")
    rows = session_rows(snapshots)
    durations = [r["duration_seconds"] for r in rows if r["duration_seconds"] is not None]
    usage = card_usage_by_dyad(snapshots)
    totals = {c: sum(row[c] for row in usage.values()) for c in CATEGORIES}
    try:
        overlap = overlap_by_ordinal(snapshots, max_ordinal=max_ordinal, k=k, basis=basis)
    except InsufficientData:
        overlap = []
    return UsageReport(
        sessions=len(rows),
        mean_duration_seconds=fmean(durations) if durations else None,
        mean_exchanges=fmean([r["exchanges"] for r in rows]),
        mean_parent_syllables=fmean([r["parent_syllables"] for r in rows]),
        usage_by_dyad=usage,
        category_totals=totals,
        grand_total=sum(totals.values()),
        overlap=overlap,
    )
