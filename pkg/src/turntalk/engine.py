"""Turn-taking session engine.

A session is an append-only list of input events; everything else
(dialogue history, coaching turns, dealt decks, the selection strip,
stars) is derived state computed by applying those events in order. Live
operation and replay run the exact same ``apply`` code, so replaying a
stored event log against deterministic providers rebuilds the session
byte for byte. Events record inputs only: transcripts arrive already
transcribed, and timestamps ride on the events rather than being read
from the clock during apply.

State machine: parent_turn <-> child_turn, terminated by ended. Passing
the turn always commits a message for the leaving speaker, even an empty
one. Ending commits pending content only when there is some.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from .decks import CardDeck, DeckPipeline, ExclusionState
from .domain import (
    ConversationTopic,
    DialogueMessage,
    DyadProfile,
    PassSource,
    SessionState,
    Speaker,
    TopicKind,
    exchange_count,
)
from .errors import (
    BadPosition,
    DyadBusy,
    InvalidTopic,
    SessionEnded,
    UnknownCard,
    UnknownDyad,
    UnknownSession,
    WrongState,
)
from .guides import GuidePipeline, GuideTurn

DEFAULT_STAR_CAP = 5

EV_STARTED = "session_started"
EV_UTTERANCE = "utterance_submitted"
EV_REVEALED = "guide_revealed"
EV_PASSED = "turn_passed"
EV_SELECTED = "card_selected"
EV_DESELECTED = "card_deselected"
EV_REFRESHED = "deck_refreshed"
EV_ENDED = "session_ended"


@dataclass
class SessionServices:
    guide_pipeline: GuidePipeline
    deck_pipeline: DeckPipeline
    star_cap: int = DEFAULT_STAR_CAP
    clock: Callable[[], float] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.clock is None:
            import time

            self.clock = time.time

    def now(self) -> float:
        return float(self.clock())


class Session:
    """Aggregate for one conversation. Not thread-safe by itself; the
    engine serializes access per session."""

    def __init__(self, dyad: DyadProfile, services: SessionServices):
        self.dyad = dyad
        self.services = services
        self.session_id: str = ""
        self.topic: Optional[ConversationTopic] = None
        self.state: Optional[SessionState] = None
        self.turn_index = 0
        self.turn_started_at = 0.0
        self.started_at = 0.0
        self.ended_at: Optional[float] = None
        self.stars: Optional[int] = None
        self.pending_text: Optional[str] = None
        self.history: list[DialogueMessage] = []
        self.guide_turns: list[GuideTurn] = []
        self.decks: list[CardDeck] = []
        self.selections: list[dict] = []
        self.selection_log: list[dict] = []
        self.exclusions = ExclusionState()
        self.events: list[dict] = []

    # -- derived quantities -----------------------------------------------------

    @property
    def exchanges(self) -> int:
        return exchange_count(self.history)

    @property
    def current_guide_turn(self) -> Optional[GuideTurn]:
        return self.guide_turns[-1] if self.guide_turns else None

    @property
    def current_deck(self) -> Optional[CardDeck]:
        if not self.decks:
            return None
        deck = self.decks[-1]
        return deck if deck.turn_index == self.turn_index else None

    def _require(self, state: SessionState, action: str) -> None:
        if self.state is SessionState.ENDED:
            raise SessionEnded(f"session {self.session_id} has ended")
        if self.state is not state:
            raise WrongState(
                f"cannot {action} during {self.state.value if self.state else 'unstarted'}"
            )

    # -- event intake -------------------------------------------------------------

    def handle(self, record: dict) -> dict:
        """Validate against current state, then apply. Returns the record
        so callers can persist exactly what was applied."""
        kind = record["type"]
        if kind == EV_STARTED:
            if self.state is not None:
                raise WrongState("session already started")
            self._apply_started(record)
        elif kind == EV_UTTERANCE:
            self._require(SessionState.PARENT_TURN, "submit an utterance")
            self._apply_utterance(record)
        elif kind == EV_REVEALED:
            self._require(SessionState.PARENT_TURN, "reveal an example")
            self._apply_revealed(record)
        elif kind == EV_PASSED:
            self._check_pass(SessionState(record["from_state"]))
            self._apply_passed(record)
        elif kind == EV_SELECTED:
            self._require(SessionState.CHILD_TURN, "select a card")
            self._apply_selected(record)
        elif kind == EV_DESELECTED:
            self._require(SessionState.CHILD_TURN, "deselect a card")
            self._apply_deselected(record)
        elif kind == EV_REFRESHED:
            self._require(SessionState.CHILD_TURN, "refresh the deck")
            self._apply_refreshed(record)
        elif kind == EV_ENDED:
            if self.state is SessionState.ENDED:
                raise SessionEnded(f"session {self.session_id} has ended")
            self._apply_ended(record)
        else:
            raise ValueError(f"unknown event type {kind!r}")
        self.events.append(record)
        return record

    def _check_pass(self, from_state: SessionState) -> None:
        if self.state is SessionState.ENDED:
            raise SessionEnded(f"session {self.session_id} has ended")
        if self.state is not from_state:
            # Double-press protection: the second press claims to end a
            # turn that already ended.
            raise WrongState(
                f"pass claims {from_state.value} but the session is in {self.state.value}"
            )

    # -- apply methods ------------------------------------------------------------

    def _apply_started(self, record: dict) -> None:
        self.session_id = record["session_id"]
        self.topic = ConversationTopic.from_record(record["topic"])
        self.state = SessionState.PARENT_TURN
        self.started_at = record["at"]
        self.turn_started_at = record["at"]
        self.turn_index = 0
        self._plan_guides()

    def _apply_utterance(self, record: dict) -> None:
        # Re-recording replaces the pending transcript; pass commits the latest.
        self.pending_text = record["text"]

    def _apply_revealed(self, record: dict) -> None:
        turn = self.current_guide_turn
        self.services.guide_pipeline.reveal_example(
            turn, record["guide_id"], self.dyad, self.history
        )

    def _apply_passed(self, record: dict) -> None:
        from_state = SessionState(record["from_state"])
        at = record["at"]
        if from_state is SessionState.PARENT_TURN:
            self._commit_parent(at)
            self.state = SessionState.CHILD_TURN
            self.turn_started_at = at
            self.exclusions = ExclusionState()
            self.selections = []
            self._deal_deck(ordinal=0)
        else:
            self._commit_child(at)
            self.state = SessionState.PARENT_TURN
            self.turn_started_at = at
            self._plan_guides()

    def _apply_selected(self, record: dict) -> None:
        deck = self.current_deck
        if deck is None:
            raise UnknownCard("no deck has been dealt this turn")
        card = deck.find(record["card_id"])
        self.selections.append(
            {
                "card_id": card.card_id,
                "category": card.category.value,
                "label_canonical": card.label_canonical,
                "label_localized": card.label_localized,
                "at": record["at"],
            }
        )

    def _apply_deselected(self, record: dict) -> None:
        position = record["position"]
        if not isinstance(position, int) or not 0 <= position < len(self.selections):
            raise BadPosition(
                f"position {position!r} is outside the selection strip "
                f"(size {len(self.selections)})"
            )
        self.selections.pop(position)

    def _apply_refreshed(self, record: dict) -> None:
        last = self.decks[-1]
        self._deal_deck(ordinal=last.ordinal + 1)

    def _apply_ended(self, record: dict) -> None:
        at = record["at"]
        if self.state is SessionState.PARENT_TURN and self.pending_text:
            self._commit_parent(at)
        elif self.state is SessionState.CHILD_TURN and self.selections:
            self._commit_child(at)
        self.state = SessionState.ENDED
        self.ended_at = at
        self.stars = min(self.exchanges, self.services.star_cap)

    # -- commit helpers -----------------------------------------------------------

    def _commit_parent(self, at: float) -> None:
        self.history.append(
            DialogueMessage(
                speaker=Speaker.PARENT,
                turn_index=self.turn_index,
                started_at=self.turn_started_at,
                ended_at=at,
                parent_text=self.pending_text or "",
            )
        )
        self.pending_text = None
        self.turn_index += 1

    def _commit_child(self, at: float) -> None:
        self.history.append(
            DialogueMessage(
                speaker=Speaker.CHILD,
                turn_index=self.turn_index,
                started_at=self.turn_started_at,
                ended_at=at,
                child_cards=[s["label_localized"] for s in self.selections],
            )
        )
        for selection in self.selections:
            self.selection_log.append({**selection, "turn_index": self.turn_index})
        self.selections = []
        self.turn_index += 1

    def _plan_guides(self) -> None:
        hint = ""
        if self.topic is not None:
            hint = self.topic.interest_label or self.topic.kind.value
        self.guide_turns.append(
            self.services.guide_pipeline.plan_turn(
                self.dyad,
                self.history,
                self.turn_index,
                self.exchanges,
                topic_hint=hint,
            )
        )

    def _deal_deck(self, ordinal: int) -> None:
        self.decks.append(
            self.services.deck_pipeline.build_deck(
                self.dyad,
                self.session_id,
                self.turn_index,
                ordinal,
                self.history,
                self.exclusions,
            )
        )

    # -- views ---------------------------------------------------------------------

    def snapshot(self) -> dict:
        """Full derived state as plain data; replay equality is asserted
        over the canonical serialization of this."""
        return {
            "session_id": self.session_id,
            "dyad_id": self.dyad.dyad_id,
            "locale_target": self.dyad.locale_target,
            "topic": self.topic.to_record() if self.topic else None,
            "state": self.state.value if self.state else None,
            "turn_index": self.turn_index,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "stars": self.stars,
            "exchanges": self.exchanges,
            "pending_text": self.pending_text,
            "history": [m.to_record() for m in self.history],
            "guide_turns": [t.to_record() for t in self.guide_turns],
            "decks": [d.to_record() for d in self.decks],
            "selections": list(self.selections),
            "selection_log": list(self.selection_log),
        }

    def view(self) -> dict:
        """What the client needs to render right now."""
        deck = self.current_deck
        turn = self.current_guide_turn if self.state is SessionState.PARENT_TURN else None
        return {
            "session_id": self.session_id,
            "dyad_id": self.dyad.dyad_id,
            "topic": self.topic.to_record() if self.topic else None,
            "state": self.state.value if self.state else None,
            "turn_index": self.turn_index,
            "exchanges": self.exchanges,
            "stars": self.stars,
            "pending_text": self.pending_text,
            "history": [m.to_record() for m in self.history],
            "guide_turn": turn.to_record() if turn else None,
            "deck": deck.to_record() if deck and self.state is SessionState.CHILD_TURN else None,
            "selections": list(self.selections),
        }


def view_from_snapshot(record: dict) -> dict:
    """Client view derived from a stored snapshot. Lets the service keep
    answering for sessions that are no longer live in the engine, such as
    ended sessions after a restart. Mirrors Session.view()."""
    state = record.get("state")
    turns = record.get("guide_turns") or []
    decks = record.get("decks") or []
    deck = decks[-1] if decks else None
    if deck is not None and deck.get("turn_index") != record.get("turn_index"):
        deck = None
    return {
        "session_id": record["session_id"],
        "dyad_id": record["dyad_id"],
        "topic": record.get("topic"),
        "state": state,
        "turn_index": record.get("turn_index", 0),
        "exchanges": record.get("exchanges", 0),
        "stars": record.get("stars"),
        "pending_text": record.get("pending_text"),
        "history": record.get("history") or [],
        "guide_turn": turns[-1] if turns and state == SessionState.PARENT_TURN.value else None,
        "deck": deck if state == SessionState.CHILD_TURN.value else None,
        "selections": record.get("selections") or [],
    }


class SessionEngine:
    """Owns dyad profiles and sessions; serializes operations per session
    and hands every applied event to the sink for durability."""

    def __init__(
        self,
        services: SessionServices,
        sink: Optional[Callable[[str, dict], None]] = None,
    ):
        self.services = services
        self._sink = sink
        self._dyads: dict[str, DyadProfile] = {}
        self._sessions: dict[str, Session] = {}
        self._ordinals: dict[str, int] = {}
        self._registry_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}

    # -- dyads ----------------------------------------------------------------------

    def add_dyad(self, profile: DyadProfile) -> None:
        with self._registry_lock:
            self._dyads[profile.dyad_id] = profile

    def get_dyad(self, dyad_id: str) -> DyadProfile:
        try:
            return self._dyads[dyad_id]
        except KeyError:
            raise UnknownDyad(f"no dyad {dyad_id!r}") from None

    def dyads(self) -> list[DyadProfile]:
        return sorted(self._dyads.values(), key=lambda p: p.dyad_id)

    def set_session_ordinal(self, dyad_id: str, next_ordinal: int) -> None:
        """Continue numbering after a restart so ids never collide."""
        with self._registry_lock:
            self._ordinals[dyad_id] = max(self._ordinals.get(dyad_id, 1), next_ordinal)

    # -- session lifecycle ------------------------------------------------------------

    def active_session_for(self, dyad_id: str) -> Optional[Session]:
        for session in self._sessions.values():
            if session.dyad.dyad_id == dyad_id and session.state is not SessionState.ENDED:
                return session
        return None

    def start_session(self, dyad_id: str, topic: ConversationTopic) -> Session:
        dyad = self.get_dyad(dyad_id)
        if topic.kind is TopicKind.INTEREST and topic.interest_label not in dyad.interests:
            raise InvalidTopic(
                f"{topic.interest_label!r} is not one of {dyad.child_name}'s registered interests"
            )
        with self._registry_lock:
            if self.active_session_for(dyad_id) is not None:
                raise DyadBusy(f"dyad {dyad_id!r} already has an active session")
            ordinal = self._ordinals.get(dyad_id, 1)
            self._ordinals[dyad_id] = ordinal + 1
            session_id = f"{dyad_id}-s{ordinal}"
            session = Session(dyad, self.services)
            self._sessions[session_id] = session
            self._session_locks[session_id] = threading.Lock()
        record = {
            "type": EV_STARTED,
            "session_id": session_id,
            "dyad_id": dyad_id,
            "topic": topic.to_record(),
            "at": self.services.now(),
        }
        with self._session_locks[session_id]:
            session.handle(record)
            self._persist(session_id, record)
        return session

    def get_session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def _locked(self, session_id: str) -> threading.Lock:
        try:
            return self._session_locks[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def _persist(self, session_id: str, record: dict) -> None:
        if self._sink is not None:
            self._sink(session_id, record)

    def _dispatch(self, session_id: str, record: dict) -> Session:
        session = self.get_session(session_id)
        with self._locked(session_id):
            session.handle(record)
            self._persist(session_id, record)
        return session

    # -- operations ---------------------------------------------------------------------

    def submit_utterance(self, session_id: str, text: str) -> Session:
        return self._dispatch(
            session_id, {"type": EV_UTTERANCE, "text": text, "at": self.services.now()}
        )

    def reveal_example(self, session_id: str, guide_id: str) -> Session:
        return self._dispatch(
            session_id, {"type": EV_REVEALED, "guide_id": guide_id, "at": self.services.now()}
        )

    def pass_turn(
        self,
        session_id: str,
        from_state: SessionState,
        source: PassSource = PassSource.UI_BUTTON,
    ) -> Session:
        return self._dispatch(
            session_id,
            {
                "type": EV_PASSED,
                "from_state": from_state.value,
                "source": source.value,
                "at": self.services.now(),
            },
        )

    def select_card(self, session_id: str, card_id: str) -> Session:
        return self._dispatch(
            session_id, {"type": EV_SELECTED, "card_id": card_id, "at": self.services.now()}
        )

    def deselect_card(self, session_id: str, position: int) -> Session:
        return self._dispatch(
            session_id, {"type": EV_DESELECTED, "position": position, "at": self.services.now()}
        )

    def refresh_deck(self, session_id: str) -> Session:
        return self._dispatch(session_id, {"type": EV_REFRESHED, "at": self.services.now()})

    def end_session(self, session_id: str) -> Session:
        session = self.get_session(session_id)
        with self._locked(session_id):
            if session.state is SessionState.ENDED:
                # Idempotent: a second end just returns the ended session.
                return session
            record = {"type": EV_ENDED, "at": self.services.now()}
            session.handle(record)
            self._persist(session_id, record)
        return session

    # -- replay -----------------------------------------------------------------------

    def replay(self, dyad: DyadProfile, records: list[dict]) -> Session:
        """Rebuild a session from its stored event log. Runs the same
        apply code as live operation; appends nothing to the sink."""
        session = Session(dyad, self.services)
        for record in records:
            session.handle(record)
        return session

    def adopt(self, session: Session) -> None:
        """Register a replayed session (restart recovery)."""
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._session_locks[session.session_id] = threading.Lock()
