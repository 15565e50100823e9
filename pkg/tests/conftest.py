"""Shared fixtures and the conversation driver used across the suite.

Everything here builds on deterministic mock providers: a fixed seed, a
stepping fake clock, and no network or disk unless a test opts in.
"""

from __future__ import annotations

import json
import random

import pytest

from turntalk.decks import DeckPipeline
from turntalk.domain import (
    ConversationTopic,
    DyadProfile,
    ParentRole,
    PassSource,
    SessionState,
    TopicKind,
)
from turntalk.engine import SessionEngine, SessionServices
from turntalk.guides import GuidePipeline
from turntalk.providers.base import CompletionGateway
from turntalk.providers.mock import (
    MockCompletionBackend,
    MockEmbedder,
    MockSynthesizer,
    MockTranscriber,
    MockTranslator,
)
from turntalk.similarity import SimilarityStore
from turntalk.translation import TranslationMemory


def canonical_json(record) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class FakeClock:
    """Monotone stepping clock so timestamps are reproducible."""

    def __init__(self, start: float = 1000.0, step: float = 1.0):
        self.now = start
        self.step = step

    def __call__(self) -> float:
        value = self.now
        self.now += self.step
        return value


class Harness:
    """One fully wired in-memory stack around the session engine."""

    def __init__(
        self,
        seed: int = 0,
        with_symbols: bool = False,
        with_synth: bool = False,
        star_cap: int = 5,
        repair_retries: int = 2,
        symbol_threshold: float = 0.1,
        backend=None,
        translator=None,
        clock=None,
    ):
        self.backend = backend if backend is not None else MockCompletionBackend(seed=seed)
        self.gateway = CompletionGateway(self.backend, repair_retries=repair_retries)
        self.embedder = MockEmbedder()
        self.store = SimilarityStore()
        self.translator = translator if translator is not None else MockTranslator()
        self.memory = TranslationMemory(
            self.gateway, self.translator, self.store, self.embedder
        )
        self.guide_pipeline = GuidePipeline(self.gateway, self.memory)
        self.deck_pipeline = DeckPipeline(
            self.gateway,
            self.memory,
            MockSynthesizer() if with_synth else None,
            self.store if with_symbols else None,
            self.embedder,
            symbol_threshold=symbol_threshold,
        )
        self.clock = clock if clock is not None else FakeClock()
        self.services = SessionServices(
            guide_pipeline=self.guide_pipeline,
            deck_pipeline=self.deck_pipeline,
            star_cap=star_cap,
            clock=self.clock,
        )
        self.sink_events: dict[str, list[dict]] = {}
        self.engine = SessionEngine(self.services, sink=self._sink)

    def _sink(self, session_id: str, record: dict) -> None:
        self.sink_events.setdefault(session_id, []).append(record)


def make_dyad(
    dyad_id: str = "dyad-1",
    role: ParentRole = ParentRole.MOTHER,
    child_name: str = "Mina",
    interests=("balloons", "drones", "trains"),
    custom_images=None,
    locale_source: str = "en",
    locale_target: str = "en",
) -> DyadProfile:
    return DyadProfile(
        dyad_id=dyad_id,
        parent_role=role,
        child_name=child_name,
        child_age=7,
        child_characteristics="communicates with short phrases",
        interests=list(interests),
        custom_images=dict(custom_images or {}),
        locale_source=locale_source,
        locale_target=locale_target,
    )


# Parent utterances for randomized conversations. The flagged ones carry
# the markers the mock inspector classifies.
NEUTRAL_UTTERANCES = [
    "Did you have fun at school?",
    "What did you play at the park?",
    "Tell me about the drone we flew.",
    "The balloon went so high in the sky.",
    "I liked the song you picked.",
    "We can draw the firetruck after dinner.",
    "Your teacher said you built a tall tower.",
    "The train ride was long, wasn't it?",
]

BLAME_UTTERANCES = [
    "No... look carefully at the picture.",
    "That is wrong. Take a closer look at the card.",
]

CORRECTION_UTTERANCES = [
    "Try again. Pick the card about lunch.",
    "Not like that. Say it again, next time listen first.",
]

COMPLEX_UTTERANCES = [
    "Did you eat lunch? Was it yummy? Who sat next to you?",
    "What happened at the gym? Did you run? Were you tired?",
]

ALL_UTTERANCES = (
    NEUTRAL_UTTERANCES + BLAME_UTTERANCES + CORRECTION_UTTERANCES + COMPLEX_UTTERANCES
)


class Driver:
    """Scripted and randomized conversations against one engine."""

    def __init__(self, harness: Harness, dyad: DyadProfile = None):
        self.h = harness
        self.dyad = dyad or make_dyad()
        self.h.engine.add_dyad(self.dyad)
        self.session = None

    @property
    def sid(self) -> str:
        return self.session.session_id

    def start(self, kind: TopicKind = TopicKind.RECALL, interest: str = None):
        topic = ConversationTopic(kind, interest)
        self.session = self.h.engine.start_session(self.dyad.dyad_id, topic)
        return self.session

    def parent_say(self, text: str):
        return self.h.engine.submit_utterance(self.sid, text)

    def parent_pass(self):
        return self.h.engine.pass_turn(
            self.sid, SessionState.PARENT_TURN, PassSource.HARDWARE_BUTTON
        )

    def child_pass(self):
        return self.h.engine.pass_turn(
            self.sid, SessionState.CHILD_TURN, PassSource.HARDWARE_BUTTON
        )

    def select(self, card_id: str):
        return self.h.engine.select_card(self.sid, card_id)

    def select_some(self, rng: random.Random, count: int):
        deck = self.session.current_deck
        for _ in range(count):
            self.select(rng.choice(deck.cards).card_id)

    def refresh(self):
        return self.h.engine.refresh_deck(self.sid)

    def reveal(self, guide_id: str):
        return self.h.engine.reveal_example(self.sid, guide_id)

    def end(self):
        return self.h.engine.end_session(self.sid)

    def run_random(self, rng: random.Random, exchanges: int = None):
        """One full randomized conversation; returns the ended session."""
        self.start()
        rounds = exchanges if exchanges is not None else rng.randint(1, 5)
        for _ in range(rounds):
            if rng.random() < 0.8:
                self.parent_say(rng.choice(ALL_UTTERANCES))
            turn = self.session.current_guide_turn
            if turn.guides and rng.random() < 0.4:
                self.reveal(rng.choice(turn.guides).guide_id)
            self.parent_pass()
            for _ in range(rng.randint(0, 2)):
                if rng.random() < 0.5:
                    self.refresh()
            self.select_some(rng, rng.randint(0, 4))
            if self.session.selections and rng.random() < 0.2:
                self.h.engine.deselect_card(
                    self.sid, rng.randrange(len(self.session.selections))
                )
            self.child_pass()
        self.end()
        return self.session


@pytest.fixture
def harness():
    return Harness()


@pytest.fixture
def driver(harness):
    return Driver(harness)
