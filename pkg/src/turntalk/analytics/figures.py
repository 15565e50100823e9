"""Figure rendering for the usage report.

Everything draws through the Agg backend and writes straight to files, so
reports work on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import CATEGORIES

_CATEGORY_COLORS = {
    "topic": "#4c72b0",
    "action": "#dd8452",
    "emotion": "#55a868",
    "core": "#c44e52",
}


def card_usage_figure(usage_by_dyad: dict[str, dict[str, int]], path: Path) -> Path:
    """Stacked bars: one bar per dyad, one segment per card category."""
    dyads = sorted(usage_by_dyad)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(dyads) + 2.0), 4.5))
    bottoms = [0] * len(dyads)
    for category in CATEGORIES:
        values = [usage_by_dyad[d].get(category, 0) for d in dyads]
        ax.bar(dyads, values, bottom=bottoms, label=category, color=_CATEGORY_COLORS[category])
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_ylabel("cards selected")
    ax.set_title("Card usage by dyad and category")
    ax.legend()
    if len(dyads) > 6:
        plt.setp(ax.get_xticklabels(), rotation=45, ha="right")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def overlap_figure(overlap_rows: list[dict], path: Path) -> Path:
    """Mean top-k recommendation overlap per child-turn position."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [row["ordinal"] for row in overlap_rows]
    ys = [row["mean_overlap"] * 100 for row in overlap_rows]
    ax.plot(xs, ys, marker="o", color="#4c72b0")
    ax.set_xlabel("child turn position")
    ax.set_ylabel("mean overlap (%)")
    ax.set_title("Recommendation overlap across dyads")
    ax.set_xticks(xs)
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def session_metrics_figure(session_rows: list[dict], path: Path) -> Path:
    """Histograms of session duration and exchange counts."""
    durations = [
        r["duration_seconds"] for r in session_rows if r.get("duration_seconds") is not None
    ]
    exchanges = [r["exchanges"] for r in session_rows]
    fig, (left, right) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    if durations:
        left.hist(durations, bins=min(12, max(3, len(durations))), color="#55a868")
    left.set_xlabel("duration (s)")
    left.set_ylabel("sessions")
    left.set_title("Session duration")
    if exchanges:
        upper = max(exchanges) + 1
        right.hist(exchanges, bins=range(0, upper + 1), color="#dd8452", align="left")
    right.set_xlabel("exchanges")
    right.set_title("Exchanges per session")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
