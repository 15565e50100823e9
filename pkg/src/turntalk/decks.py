"""Adaptive communication-card decks for the child's side of a turn.

A deck is a fixed 4x4 grid: four Topic cards, four Action cards, four
Emotion cards, and the invariant Core row (Yes / No / I don't know / How
about you, mom-or-dad?). Topic and Action vocabulary comes from the
completion provider conditioned on the dialogue so far; Emotion cards are
curated from a fixed 12-label pool.

Refreshing deals a new deck within the same child turn. Labels already
shown this turn are excluded so refreshes widen the choice space; the
emotion pool is finite, so when fewer than four unseen emotions remain the
exclusions reset and the pool starts over.

Each card is dressed with an image (the dyad's custom photo when one
matches the label, else the closest library symbol above a similarity
floor, else a placeholder) and a synthesized voice-over of its localized
label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .domain import (
    CardCategory,
    CardIdentity,
    CustomRef,
    DialogueMessage,
    DyadProfile,
    ImageRef,
    Placeholder,
    SymbolRef,
    core_fourth_label,
    CORE_LABELS_COMMON,
    EMOTION_VALUES,
)
from .errors import MalformedOutput, ProviderUnavailable, UnknownCard
from .guides import dialogue_for_prompt, dyad_summary
from .providers.base import (
    CompletionGateway,
    CompletionRequest,
    Embedder,
    PromptContext,
    Synthesizer,
    TaskTag,
)
from .providers.mock import ACTION_FILLERS, EMOTION_PRIORITY, TOPIC_FILLERS
from .similarity import SYMBOL_CAPTIONS, SimilarityStore
from .translation import TranslationMemory

SYMBOL_MATCH_THRESHOLD = 0.1
DECK_ROW = 4

_CATEGORY_ORDER = (CardCategory.TOPIC, CardCategory.ACTION, CardCategory.EMOTION, CardCategory.CORE)


@dataclass
class ExclusionState:
    """Labels already dealt during the current child turn."""

    topic_action: set[str] = field(default_factory=set)
    emotions: set[str] = field(default_factory=set)

    def to_record(self) -> dict:
        return {
            "topic_action": sorted(self.topic_action),
            "emotions": sorted(self.emotions),
        }

    @classmethod
    def from_record(cls, record: dict) -> "ExclusionState":
        return cls(
            topic_action=set(record.get("topic_action", ())),
            emotions=set(record.get("emotions", ())),
        )


@dataclass
class CardDeck:
    deck_id: str
    session_id: str
    turn_index: int
    ordinal: int
    cards: list[CardIdentity] = field(default_factory=list)

    def find(self, card_id: str) -> CardIdentity:
        for card in self.cards:
            if card.card_id == card_id:
                return card
        raise UnknownCard(f"no card {card_id!r} in deck {self.deck_id}")

    def row(self, category: CardCategory) -> list[CardIdentity]:
        return [c for c in self.cards if c.category is category]

    def to_record(self) -> dict:
        return {
            "deck_id": self.deck_id,
            "session_id": self.session_id,
            "turn_index": self.turn_index,
            "ordinal": self.ordinal,
            "cards": [c.to_record() for c in self.cards],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CardDeck":
        return cls(
            deck_id=record["deck_id"],
            session_id=record["session_id"],
            turn_index=record["turn_index"],
            ordinal=record["ordinal"],
            cards=[CardIdentity.from_record(c) for c in record["cards"]],
        )


class DeckPipeline:
    def __init__(
        self,
        gateway: CompletionGateway,
        memory: TranslationMemory,
        synthesizer: Optional[Synthesizer],
        symbol_store: Optional[SimilarityStore],
        embedder: Embedder,
        symbol_threshold: float = SYMBOL_MATCH_THRESHOLD,
    ):
        self._gateway = gateway
        self._memory = memory
        self._synthesizer = synthesizer
        self._symbol_store = symbol_store
        self._embedder = embedder
        self.symbol_threshold = symbol_threshold

    def build_deck(
        self,
        dyad: DyadProfile,
        session_id: str,
        turn_index: int,
        ordinal: int,
        history: list[DialogueMessage],
        exclusions: ExclusionState,
    ) -> CardDeck:
        """Deal one deck and fold its labels into ``exclusions``."""
        topic, action = self._topic_action(dyad, history, exclusions)
        emotions = self._emotions(dyad, history, exclusions)
        deck_id = f"{session_id}-t{turn_index}-d{ordinal}"
        core = list(CORE_LABELS_COMMON) + [core_fourth_label(dyad.parent_role)]
        labels = {
            CardCategory.TOPIC: topic,
            CardCategory.ACTION: action,
            CardCategory.EMOTION: emotions,
            CardCategory.CORE: core,
        }
        cards: list[CardIdentity] = []
        for category in _CATEGORY_ORDER:
            for i, label in enumerate(labels[category]):
                cards.append(self._dress(dyad, deck_id, category, i, label))
        exclusions.topic_action.update(topic)
        exclusions.topic_action.update(action)
        exclusions.emotions.update(emotions)
        return CardDeck(
            deck_id=deck_id,
            session_id=session_id,
            turn_index=turn_index,
            ordinal=ordinal,
            cards=cards,
        )

    def _topic_action(
        self, dyad: DyadProfile, history: list[DialogueMessage], exclusions: ExclusionState
    ) -> tuple[list[str], list[str]]:
        excluded = exclusions.topic_action
        request = CompletionRequest(
            task=TaskTag.GENERATE_CARDS,
            context=PromptContext(
                dyad_summary=dyad_summary(dyad),
                dialogue=dialogue_for_prompt(history),
                constraints={"excluded": sorted(excluded)},
            ),
        )
        try:
            result = self._gateway.complete(request)
            raw_topic, raw_action = list(result["topic"]), list(result["action"])
        except (ProviderUnavailable, MalformedOutput):
            raw_topic, raw_action = [], []
        picked: set[str] = set()

        def fill(raw: list[str], backfills: list[str], prefix: str) -> list[str]:
            out: list[str] = []
            for label in raw + backfills:
                if label in excluded or label in picked:
                    continue
                picked.add(label)
                out.append(label)
                if len(out) == DECK_ROW:
                    return out
            i = 0
            while len(out) < DECK_ROW:
                label = f"{prefix} {i}"
                if label not in excluded and label not in picked:
                    picked.add(label)
                    out.append(label)
                i += 1
            return out

        topic = fill(raw_topic, list(dyad.interests) + list(TOPIC_FILLERS), "idea")
        action = fill(raw_action, list(ACTION_FILLERS), "move")
        return topic, action

    def _emotions(
        self, dyad: DyadProfile, history: list[DialogueMessage], exclusions: ExclusionState
    ) -> list[str]:
        if len(EMOTION_VALUES - exclusions.emotions) < DECK_ROW:
            # Pool exhausted for this turn: start over so a refresh always
            # has four emotions to deal.
            exclusions.emotions.clear()
        excluded = exclusions.emotions
        request = CompletionRequest(
            task=TaskTag.CURATE_EMOTIONS,
            context=PromptContext(
                dyad_summary=dyad_summary(dyad),
                dialogue=dialogue_for_prompt(history),
                constraints={
                    "allowed": sorted(EMOTION_VALUES),
                    "excluded": sorted(excluded),
                },
            ),
        )
        try:
            raw = list(self._gateway.complete(request)["emotions"])
        except (ProviderUnavailable, MalformedOutput):
            raw = []
        out: list[str] = []
        for label in raw + list(EMOTION_PRIORITY):
            if label not in EMOTION_VALUES or label in excluded or label in out:
                continue
            out.append(label)
            if len(out) == DECK_ROW:
                break
        return out

    def _dress(
        self, dyad: DyadProfile, deck_id: str, category: CardCategory, i: int, label: str
    ) -> CardIdentity:
        if category is CardCategory.CORE:
            localized, untranslated = label, False
        else:
            result = self._memory.localize_label(
                label, category.value, dyad.locale_source, dyad.locale_target
            )
            localized, untranslated = result.text, result.untranslated
        voice_ref = None
        if self._synthesizer is not None:
            try:
                voice_ref = self._synthesizer.synthesize(localized, dyad.locale_target)
            except (ProviderUnavailable, MalformedOutput):
                voice_ref = None
        return CardIdentity(
            card_id=f"{deck_id}:{category.value}{i}",
            category=category,
            label_canonical=label,
            label_localized=localized,
            image_ref=self._image_for(dyad, label),
            voice_ref=voice_ref,
            untranslated=untranslated,
        )

    def _image_for(self, dyad: DyadProfile, label: str) -> ImageRef:
        custom = self._custom_match(dyad, label)
        if custom is not None:
            return custom
        match = self.match_symbol(label)
        if match is not None:
            return SymbolRef(match[0])
        return Placeholder()

    @staticmethod
    def _custom_match(dyad: DyadProfile, label: str) -> Optional[CustomRef]:
        wanted = label.strip().lower()
        for key, asset_id in dyad.custom_images.items():
            if key.strip().lower() == wanted:
                return CustomRef(asset_id)
        return None

    def match_symbol(self, label: str) -> Optional[tuple[str, float]]:
        """Best library symbol for a label, or None below the floor."""
        if self._symbol_store is None:
            return None
        try:
            if self._symbol_store.size(SYMBOL_CAPTIONS) == 0:
                return None
            matches = self._symbol_store.top_k(
                SYMBOL_CAPTIONS, self._embedder.embed(label), 1
            )
        except Exception:
            return None
        if not matches or matches[0].score < self.symbol_threshold:
            return None
        return matches[0].entry_id, matches[0].score
