"""Coaching content for the parent's side of a turn.

Each parent turn gets three coaching slots. When the previous parent
message tripped the inspector (blaming, overcorrecting, or an overly
complex prompt), one slot becomes feedback about that message and two
remain guides; otherwise all three are guides. The wrap-up move is held
back until the dyad has completed at least three exchanges.

Guides arrive in the parent's reading locale through the formal
translation route. Concrete spoken examples are generated only when the
parent asks for one, and the reveal is monotone: once generated, the same
example comes back on every later request.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .domain import DialogueMessage, DyadProfile, FeedbackCategory, GuideDirection, Speaker
from .errors import MalformedOutput, ProviderUnavailable, UnknownGuide
from .providers.base import CompletionGateway, CompletionRequest, PromptContext, TaskTag
from .translation import TranslationMemory

DIALOGUE_WINDOW = 8
WRAP_UP_MIN_EXCHANGES = 3

# Shown when the guide provider is down; degraded coaching beats a dead turn.
FALLBACK_GUIDES = (
    (GuideDirection.SHOW_ENCOURAGEMENT, "Praise something your child just did or chose"),
    (GuideDirection.ASK_FOR_ELABORATION, "Ask one short what-question about their answer"),
    (GuideDirection.SUGGEST_CHOICES, "Offer two simple options they can pick between"),
)


@dataclass(frozen=True)
class ParentGuide:
    guide_id: str
    direction: GuideDirection
    text_canonical: str
    text: str
    untranslated: bool = False
    example_canonical: Optional[str] = None
    example: Optional[str] = None
    example_untranslated: bool = False

    @property
    def revealed(self) -> bool:
        return self.example is not None

    def to_record(self) -> dict:
        return {
            "guide_id": self.guide_id,
            "direction": self.direction.value,
            "text_canonical": self.text_canonical,
            "text": self.text,
            "untranslated": self.untranslated,
            "example_canonical": self.example_canonical,
            "example": self.example,
            "example_untranslated": self.example_untranslated,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ParentGuide":
        return cls(
            guide_id=record["guide_id"],
            direction=GuideDirection(record["direction"]),
            text_canonical=record["text_canonical"],
            text=record["text"],
            untranslated=record.get("untranslated", False),
            example_canonical=record.get("example_canonical"),
            example=record.get("example"),
            example_untranslated=record.get("example_untranslated", False),
        )


@dataclass(frozen=True)
class FeedbackMessage:
    category: FeedbackCategory
    text_canonical: str
    text: str
    regarding_turn: int
    untranslated: bool = False

    def to_record(self) -> dict:
        return {
            "category": self.category.value,
            "text_canonical": self.text_canonical,
            "text": self.text,
            "regarding_turn": self.regarding_turn,
            "untranslated": self.untranslated,
        }

    @classmethod
    def from_record(cls, record: dict) -> "FeedbackMessage":
        return cls(
            category=FeedbackCategory(record["category"]),
            text_canonical=record["text_canonical"],
            text=record["text"],
            regarding_turn=record["regarding_turn"],
            untranslated=record.get("untranslated", False),
        )


@dataclass
class GuideTurn:
    turn_index: int
    guides: list[ParentGuide] = field(default_factory=list)
    feedback: Optional[FeedbackMessage] = None

    def find(self, guide_id: str) -> Optional[ParentGuide]:
        for guide in self.guides:
            if guide.guide_id == guide_id:
                return guide
        return None

    def to_record(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "guides": [g.to_record() for g in self.guides],
            "feedback": self.feedback.to_record() if self.feedback else None,
        }

    @classmethod
    def from_record(cls, record: dict) -> "GuideTurn":
        return cls(
            turn_index=record["turn_index"],
            guides=[ParentGuide.from_record(g) for g in record["guides"]],
            feedback=FeedbackMessage.from_record(record["feedback"]) if record.get("feedback") else None,
        )


def dialogue_for_prompt(history: list[DialogueMessage], window: int = DIALOGUE_WINDOW) -> list[dict]:
    rows = []
    for message in history[-window:]:
        if message.speaker is Speaker.PARENT:
            rows.append({"speaker": "parent", "text": message.parent_text or ""})
        else:
            rows.append({"speaker": "child", "text": " ".join(message.child_cards or ())})
    return rows


def dyad_summary(dyad: DyadProfile) -> dict:
    return {
        "child_name": dyad.child_name,
        "child_age": dyad.child_age,
        "characteristics": dyad.child_characteristics,
        "interests": list(dyad.interests),
    }


class GuidePipeline:
    def __init__(self, gateway: CompletionGateway, memory: TranslationMemory):
        self._gateway = gateway
        self._memory = memory

    def inspect(self, dyad: DyadProfile, previous_text: str) -> Optional[tuple[FeedbackCategory, str]]:
        """Classify the previous parent message. Fails open: inspector
        trouble means no feedback, never a blocked turn."""
        if not previous_text.strip():
            return None
        request = CompletionRequest(
            task=TaskTag.INSPECT,
            context=PromptContext(
                constraints={"message": previous_text, "child_name": dyad.child_name},
            ),
        )
        try:
            result = self._gateway.complete(request)
        except (ProviderUnavailable, MalformedOutput):
            return None
        if result["category"] == "none":
            return None
        return FeedbackCategory(result["category"]), result["feedback"] or ""

    def plan_turn(
        self,
        dyad: DyadProfile,
        history: list[DialogueMessage],
        turn_index: int,
        exchanges: int,
        topic_hint: str = "",
    ) -> GuideTurn:
        previous_parent = next(
            (m for m in reversed(history) if m.speaker is Speaker.PARENT), None
        )
        feedback = None
        if previous_parent is not None and previous_parent.parent_text:
            inspected = self.inspect(dyad, previous_parent.parent_text)
            if inspected is not None:
                category, text = inspected
                localized = self._memory.localize_guide(
                    text, dyad.locale_source, dyad.locale_target
                )
                feedback = FeedbackMessage(
                    category=category,
                    text_canonical=text,
                    text=localized.text,
                    regarding_turn=previous_parent.turn_index,
                    untranslated=localized.untranslated,
                )
        guide_count = 2 if feedback is not None else 3
        allowed = [d for d in GuideDirection if d is not GuideDirection.WRAP_UP]
        if exchanges >= WRAP_UP_MIN_EXCHANGES:
            allowed.append(GuideDirection.WRAP_UP)
        raw_guides = self._generate(dyad, history, guide_count, allowed, topic_hint)
        guides = []
        for i, (direction, canonical) in enumerate(raw_guides):
            localized = self._memory.localize_guide(
                canonical, dyad.locale_source, dyad.locale_target
            )
            guides.append(
                ParentGuide(
                    guide_id=f"t{turn_index}-g{i}",
                    direction=direction,
                    text_canonical=canonical,
                    text=localized.text,
                    untranslated=localized.untranslated,
                )
            )
        return GuideTurn(turn_index=turn_index, guides=guides, feedback=feedback)

    def _generate(
        self,
        dyad: DyadProfile,
        history: list[DialogueMessage],
        count: int,
        allowed: list[GuideDirection],
        topic_hint: str,
    ) -> list[tuple[GuideDirection, str]]:
        request = CompletionRequest(
            task=TaskTag.GUIDES,
            context=PromptContext(
                dyad_summary=dyad_summary(dyad),
                dialogue=dialogue_for_prompt(history),
                constraints={
                    "count": count,
                    "allowed_directions": [d.value for d in allowed],
                    "topic_hint": topic_hint,
                },
            ),
        )
        try:
            rows = self._gateway.complete(request)
        except (ProviderUnavailable, MalformedOutput):
            rows = []
        allowed_set = set(allowed)
        picked: list[tuple[GuideDirection, str]] = []
        seen: set[GuideDirection] = set()
        for row in rows:
            direction = GuideDirection(row["direction"])
            # The direction constraint is re-checked here because live
            # models can ignore it.
            if direction not in allowed_set or direction in seen:
                continue
            seen.add(direction)
            picked.append((direction, row["guide"]))
            if len(picked) == count:
                break
        for direction, text in FALLBACK_GUIDES:
            if len(picked) == count:
                break
            if direction not in seen:
                seen.add(direction)
                picked.append((direction, text))
        return picked

    def reveal_example(
        self, turn: GuideTurn, guide_id: str, dyad: DyadProfile, history: list[DialogueMessage]
    ) -> ParentGuide:
        """Generate the concrete example for one guide. Monotone: a second
        reveal returns the stored example without another provider call."""
        guide = turn.find(guide_id)
        if guide is None:
            raise UnknownGuide(f"no guide {guide_id!r} on turn {turn.turn_index}")
        if guide.example is not None:
            return guide
        request = CompletionRequest(
            task=TaskTag.EXAMPLE,
            context=PromptContext(
                dyad_summary=dyad_summary(dyad),
                dialogue=dialogue_for_prompt(history),
                constraints={"guide": guide.text_canonical},
            ),
        )
        result = self._gateway.complete(request)
        canonical = result["example"]
        localized = self._memory.localize_example(
            canonical, dyad.locale_source, dyad.locale_target
        )
        updated = replace(
            guide,
            example_canonical=canonical,
            example=localized.text,
            example_untranslated=localized.untranslated,
        )
        turn.guides[turn.guides.index(guide)] = updated
        return updated
