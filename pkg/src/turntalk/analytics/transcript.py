"""Readable transcript export.

Messages are numbered per speaker (P1, C1, P2, ...), child messages are
the space-joined card labels in selection order, and empty commits are
marked so a silent pass is visible in the record.
"""

from __future__ import annotations

PASSED_MARK = "(passed)"


def export_transcript(snapshot: dict, include_guides: bool = False) -> str:
    lines = [f"Session {snapshot['session_id']} [{snapshot['dyad_id']}]"]
    topic = snapshot.get("topic") or {}
    kind = topic.get("kind", "unknown")
    if topic.get("interest_label"):
        lines.append(f"Topic: {kind} ({topic['interest_label']})")
    else:
        lines.append(f"Topic: {kind}")
    lines.append("")
    guide_turns = {t["turn_index"]: t for t in snapshot.get("guide_turns", ())}
    parent_n = 0
    child_n = 0
    for message in snapshot.get("history", ()):
        if message["speaker"] == "parent":
            parent_n += 1
            if include_guides:
                lines.extend(_guide_lines(guide_turns.get(message["turn_index"])))
            text = message.get("parent_text") or PASSED_MARK
            lines.append(f"P{parent_n}: {text}")
        else:
            child_n += 1
            cards = message.get("child_cards") or []
            text = " ".join(cards) if cards else PASSED_MARK
            lines.append(f"C{child_n}: {text}")
    lines.append("")
    exchanges = snapshot.get("exchanges", 0)
    lines.append(f"Exchanges: {exchanges}")
    stars = snapshot.get("stars")
    if stars is not None:
        lines.append(f"Stars: {stars}")
    return "\n".join(lines) + "\n"


def _guide_lines(turn: dict | None) -> list[str]:
    if not turn:
        return []
    lines = []
    feedback = turn.get("feedback")
    if feedback:
        lines.append(f"  [feedback/{feedback['category']}] {feedback['text']}")
    for guide in turn.get("guides", ()):
        lines.append(f"  [{guide['direction']}] {guide['text']}")
        if guide.get("example"):
            lines.append(f"    e.g. {guide['example']}")
    return lines
