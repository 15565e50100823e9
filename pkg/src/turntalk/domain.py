"""Core domain vocabulary: profiles, topics, cards, messages, and the
closed taxonomies used everywhere else (guide directions, feedback
categories, emotion pool, card categories).

All types here are plain value objects; they carry no behavior beyond
validation and serialization, and are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union


class ParentRole(str, Enum):
    MOTHER = "mother"
    FATHER = "father"


class TopicKind(str, Enum):
    PLAN = "plan"
    RECALL = "recall"
    INTEREST = "interest"


class GuideDirection(str, Enum):
    """The 12 strategy categories a generated parent guide instantiates."""

    ASK_FOR_ELABORATION = "AskForElaboration"
    SHOW_ENCOURAGEMENT = "ShowEncouragement"
    SUGGEST_CHOICES = "SuggestChoices"
    ENCOURAGE_SELF_DISCLOSURE = "EncourageSelfDisclosure"
    ASK_FOR_INTENTIONS = "AskForIntentions"
    EXTEND_TOPIC = "ExtendTopic"
    OPEN_UP = "OpenUp"
    SHOW_EMPATHY = "ShowEmpathy"
    PIQUE_INTEREST = "PiqueInterest"
    PROVIDE_CLUES = "ProvideClues"
    SUGGEST_COPING_STRATEGIES = "SuggestCopingStrategies"
    WRAP_UP = "WrapUp"


class FeedbackCategory(str, Enum):
    """Negative-pattern detections on parent speech."""

    BLAME = "blame"
    CORRECTION = "correction"
    COMPLEX = "complex"


class EmotionLabel(str, Enum):
    """The fixed 12-emotion pool the child's Emotion cards draw from."""

    JOYFUL = "joyful"
    GLAD = "glad"
    HAPPY = "happy"
    EXCITED = "excited"
    SAD = "sad"
    ANGRY = "angry"
    UPSET = "upset"
    SCARED = "scared"
    AFRAID = "afraid"
    SURPRISED = "surprised"
    AMAZED = "amazed"
    BORED = "bored"


EMOTION_VALUES = frozenset(e.value for e in EmotionLabel)


class CardCategory(str, Enum):
    TOPIC = "topic"
    ACTION = "action"
    EMOTION = "emotion"
    CORE = "core"


class Speaker(str, Enum):
    PARENT = "parent"
    CHILD = "child"


class SessionState(str, Enum):
    PARENT_TURN = "parent_turn"
    CHILD_TURN = "child_turn"
    ENDED = "ended"


class PassSource(str, Enum):
    HARDWARE_BUTTON = "hardware_button"
    UI_BUTTON = "ui_button"


# -- image references ---------------------------------------------------------

@dataclass(frozen=True)
class SymbolRef:
    symbol_id: str

    def to_record(self) -> dict:
        return {"kind": "symbol", "symbol_id": self.symbol_id}


@dataclass(frozen=True)
class CustomRef:
    asset_id: str

    def to_record(self) -> dict:
        return {"kind": "custom", "asset_id": self.asset_id}


@dataclass(frozen=True)
class Placeholder:
    def to_record(self) -> dict:
        return {"kind": "placeholder"}


ImageRef = Union[SymbolRef, CustomRef, Placeholder]


def image_ref_from_record(record: dict) -> ImageRef:
    kind = record.get("kind")
    if kind == "symbol":
        return SymbolRef(record["symbol_id"])
    if kind == "custom":
        return CustomRef(record["asset_id"])
    return Placeholder()


# -- profile -------------------------------------------------------------------

@dataclass
class DyadProfile:
    """One parent+child pair sharing a device."""

    dyad_id: str
    parent_role: ParentRole
    child_name: str
    child_age: int
    child_characteristics: str = ""
    interests: list[str] = field(default_factory=list)
    custom_images: dict[str, str] = field(default_factory=dict)
    locale_source: str = "en"
    locale_target: str = "en"

    def to_record(self) -> dict:
        return {
            "dyad_id": self.dyad_id,
            "parent_role": self.parent_role.value,
            "child_name": self.child_name,
            "child_age": self.child_age,
            "child_characteristics": self.child_characteristics,
            "interests": list(self.interests),
            "custom_images": dict(self.custom_images),
            "locale_source": self.locale_source,
            "locale_target": self.locale_target,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DyadProfile":
        return cls(
            dyad_id=record["dyad_id"],
            parent_role=ParentRole(record["parent_role"]),
            child_name=record["child_name"],
            child_age=int(record["child_age"]),
            child_characteristics=record.get("child_characteristics", ""),
            interests=list(record.get("interests", [])),
            custom_images=dict(record.get("custom_images", {})),
            locale_source=record.get("locale_source", "en"),
            locale_target=record.get("locale_target", "en"),
        )


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_profile(
    profile: DyadProfile, existing_ids: Optional[Sequence[str]] = None
) -> ValidationResult:
    """Check every profile invariant and report each violation; never raises."""
    v: list[Violation] = []
    if not profile.dyad_id or not profile.dyad_id.strip():
        v.append(Violation("dyad_id", "must be a non-empty identifier"))
    elif existing_ids is not None and profile.dyad_id in existing_ids:
        v.append(Violation("dyad_id", f"identifier {profile.dyad_id!r} already in use"))
    if not isinstance(profile.child_age, int) or profile.child_age < 2:
        v.append(Violation("child_age", "must be an integer of at least 2 years"))
    seen: set[str] = set()
    for label in profile.interests:
        if not isinstance(label, str) or not label.strip():
            v.append(Violation("interests", "interest labels must be non-empty strings"))
        elif label in seen:
            v.append(Violation("interests", f"duplicate interest {label!r}"))
        else:
            seen.add(label)
    for label in profile.custom_images:
        if not isinstance(label, str) or not label.strip():
            v.append(Violation("custom_images", "keys must be non-empty canonical labels"))
    if not profile.locale_source:
        v.append(Violation("locale_source", "must be a locale identifier"))
    if not profile.locale_target:
        v.append(Violation("locale_target", "must be a locale identifier"))
    return ValidationResult(v)


# -- conversation topic --------------------------------------------------------

@dataclass(frozen=True)
class ConversationTopic:
    kind: TopicKind
    interest_label: Optional[str] = None

    def __post_init__(self):
        if self.kind is TopicKind.INTEREST and not self.interest_label:
            raise ValueError("interest topics require an interest_label")
        if self.kind is not TopicKind.INTEREST and self.interest_label is not None:
            raise ValueError("interest_label is only valid for interest topics")

    def to_record(self) -> dict:
        return {"kind": self.kind.value, "interest_label": self.interest_label}

    @classmethod
    def from_record(cls, record: dict) -> "ConversationTopic":
        return cls(TopicKind(record["kind"]), record.get("interest_label"))


# -- cards ----------------------------------------------------------------------

CORE_LABELS_COMMON = ("Yes", "No", "I don't know")


def core_fourth_label(parent_role: ParentRole) -> str:
    word = "mom" if parent_role is ParentRole.MOTHER else "dad"
    return f"How about you, {word}?"


@dataclass
class CardIdentity:
    card_id: str
    category: CardCategory
    label_canonical: str
    label_localized: str
    image_ref: ImageRef = field(default_factory=Placeholder)
    voice_ref: Optional[str] = None
    untranslated: bool = False

    def __post_init__(self):
        if not self.label_canonical:
            raise ValueError("label_canonical must be non-empty")
        if self.category is CardCategory.EMOTION and self.label_canonical not in EMOTION_VALUES:
            raise ValueError(f"emotion label {self.label_canonical!r} outside the fixed pool")

    def to_record(self) -> dict:
        return {
            "card_id": self.card_id,
            "category": self.category.value,
            "label_canonical": self.label_canonical,
            "label_localized": self.label_localized,
            "image_ref": self.image_ref.to_record(),
            "voice_ref": self.voice_ref,
            "untranslated": self.untranslated,
        }

    @classmethod
    def from_record(cls, record: dict) -> "CardIdentity":
        return cls(
            card_id=record["card_id"],
            category=CardCategory(record["category"]),
            label_canonical=record["label_canonical"],
            label_localized=record["label_localized"],
            image_ref=image_ref_from_record(record.get("image_ref", {})),
            voice_ref=record.get("voice_ref"),
            untranslated=record.get("untranslated", False),
        )


def core_card_set(parent_role: ParentRole) -> list[CardIdentity]:
    """The fixed four-card Core set; the fourth card's wording follows the
    parent's role. Pure function: identical output for a fixed role."""
    labels = list(CORE_LABELS_COMMON) + [core_fourth_label(parent_role)]
    return [
        CardIdentity(
            card_id=f"core-{i}",
            category=CardCategory.CORE,
            label_canonical=label,
            label_localized=label,
        )
        for i, label in enumerate(labels)
    ]


def core_label_set(parent_role: ParentRole) -> tuple[str, ...]:
    return tuple(CORE_LABELS_COMMON) + (core_fourth_label(parent_role),)


# -- dialogue messages -----------------------------------------------------------

@dataclass
class DialogueMessage:
    """One committed turn message. Parent turns carry transcript text,
    child turns carry the ordered list of selected card labels."""

    speaker: Speaker
    turn_index: int
    started_at: float
    ended_at: float
    parent_text: Optional[str] = None
    child_cards: Optional[list[str]] = None

    def __post_init__(self):
        if self.speaker is Speaker.PARENT:
            if self.parent_text is None or self.child_cards is not None:
                raise ValueError("parent messages carry parent_text only")
        else:
            if self.child_cards is None or self.parent_text is not None:
                raise ValueError("child messages carry child_cards only")
        if self.turn_index < 0:
            raise ValueError("turn_index must be >= 0")

    def to_record(self) -> dict:
        return {
            "speaker": self.speaker.value,
            "turn_index": self.turn_index,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "parent_text": self.parent_text,
            "child_cards": list(self.child_cards) if self.child_cards is not None else None,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DialogueMessage":
        cards = record.get("child_cards")
        return cls(
            speaker=Speaker(record["speaker"]),
            turn_index=int(record["turn_index"]),
            started_at=float(record["started_at"]),
            ended_at=float(record["ended_at"]),
            parent_text=record.get("parent_text"),
            child_cards=list(cards) if cards is not None else None,
        )


def check_alternation(history: Sequence[DialogueMessage]) -> bool:
    """True iff speakers strictly alternate starting with the parent and
    turn indices increase one by one from zero."""
    for i, message in enumerate(history):
        expected = Speaker.PARENT if i % 2 == 0 else Speaker.CHILD
        if message.speaker is not expected or message.turn_index != i:
            return False
    return True


def exchange_count(history: Sequence[DialogueMessage]) -> int:
    """Number of completed (parent message, child message) consecutive
    pairs; a trailing unanswered parent message contributes nothing."""
    count = 0
    i = 0
    while i + 1 < len(history):
        if history[i].speaker is Speaker.PARENT and history[i + 1].speaker is Speaker.CHILD:
            count += 1
            i += 2
        else:
            i += 1
    return count
