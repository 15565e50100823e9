"""Composition root: builds providers, stores, pipelines, and the engine
from one ServiceConfig, recovers state from disk at boot, and exposes the
operations the HTTP layer and CLI call.

Every mutating session operation funnels through ``_after``, which writes
the refreshed snapshot; the event log itself is appended by the engine's
sink, so the log is always at least as new as the snapshot.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from ..analytics import build_report, export_transcript
from ..decks import DeckPipeline
from ..domain import (
    ConversationTopic,
    DyadProfile,
    PassSource,
    SessionState,
    TopicKind,
    validate_profile,
)
from ..engine import EV_ENDED, Session, SessionEngine, SessionServices, view_from_snapshot
from ..errors import (
    BadRequest,
    InvalidProfile,
    InvalidTopic,
    PayloadTooLarge,
    SessionEnded,
    UnknownSession,
)
from ..guides import GuidePipeline
from ..providers.base import CompletionGateway, ProviderSet
from ..providers.live import (
    DeepLTranslator,
    OpenAICompletionBackend,
    OpenAIEmbedder,
    OpenAISynthesizer,
    OpenAITranscriber,
)
from ..providers.mock import (
    MockCompletionBackend,
    MockEmbedder,
    MockSynthesizer,
    MockTranscriber,
    MockTranslator,
)
from ..similarity import (
    EXAMPLE_TRANSLATIONS,
    LABEL_TRANSLATIONS,
    SYMBOL_CAPTIONS,
    SimilarityStore,
)
from ..translation import TranslationMemory
from .assets import AssetStore
from .config import ServiceConfig
from .storage import FileStorage


def build_providers(config: ServiceConfig, asset_store: AssetStore) -> ProviderSet:
    if config.providers == "mock":
        return ProviderSet(
            completion=MockCompletionBackend(seed=config.mock_seed),
            embedder=MockEmbedder(),
            transcriber=MockTranscriber(),
            synthesizer=MockSynthesizer(asset_store=asset_store),
            translator=MockTranslator(),
        )
    return ProviderSet(
        completion=OpenAICompletionBackend(
            api_key=config.openai_api_key,
            model=config.openai_model,
            base_url=config.openai_base_url,
        ),
        embedder=OpenAIEmbedder(api_key=config.openai_api_key, base_url=config.openai_base_url),
        transcriber=OpenAITranscriber(
            api_key=config.openai_api_key, base_url=config.openai_base_url
        ),
        synthesizer=OpenAISynthesizer(
            api_key=config.openai_api_key,
            asset_store=asset_store,
            base_url=config.openai_base_url,
        ),
        translator=DeepLTranslator(
            api_key=config.deepl_api_key, base_url=config.deepl_base_url
        ),
    )


def _seed_rows(filename: str) -> list[dict]:
    path = resources.files("turntalk").joinpath("data", filename)
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


class Runtime:
    def __init__(self, config: ServiceConfig, clock=None):
        self.config = config
        self.storage = FileStorage(config.storage_path())
        self.assets = AssetStore(self.storage.assets_dir, max_bytes=config.max_upload_bytes)
        self.providers = build_providers(config, self.assets)
        self.gateway = CompletionGateway(
            self.providers.completion, repair_retries=config.repair_retries
        )
        self.store = SimilarityStore()
        self.memory = TranslationMemory(
            self.gateway,
            self.providers.translator,
            self.store,
            self.providers.embedder,
            on_label_cached=self.storage.append_label_translation,
        )
        guide_pipeline = GuidePipeline(self.gateway, self.memory)
        deck_pipeline = DeckPipeline(
            self.gateway,
            self.memory,
            self.providers.synthesizer,
            self.store,
            self.providers.embedder,
            symbol_threshold=config.symbol_threshold,
        )
        services = SessionServices(
            guide_pipeline=guide_pipeline,
            deck_pipeline=deck_pipeline,
            star_cap=config.star_cap,
        )
        if clock is not None:
            services.clock = clock
        self.engine = SessionEngine(services, sink=self.storage.append_event)
        self._boot()

    # -- boot ------------------------------------------------------------------------

    def _boot(self) -> None:
        for profile in self.storage.load_profiles():
            self.engine.add_dyad(profile)
        self.memory.seed_labels(self.storage.load_label_translations())
        self._load_collections()
        for dyad_id in {p.dyad_id for p in self.engine.dyads()}:
            self.engine.set_session_ordinal(dyad_id, self.storage.next_session_ordinal(dyad_id))
        self._recover_sessions()

    def _load_collections(self) -> None:
        """Import persisted collections; fall back to embedding the
        packaged seed corpus on first boot."""
        imported = 0
        for name in (EXAMPLE_TRANSLATIONS, LABEL_TRANSLATIONS, SYMBOL_CAPTIONS):
            path = self.storage.collection_path(name)
            if path.exists():
                imported += self.store.import_jsonl(name, path)
        if imported == 0:
            self.seed_collections()

    def seed_collections(self, export: bool = True) -> dict[str, int]:
        """Embed the packaged seed corpus into the three collections."""
        embed = self.providers.embedder.embed
        counts = {}
        for row in _seed_rows("example_translations.jsonl"):
            self.store.add(
                EXAMPLE_TRANSLATIONS,
                row["id"],
                row["source"],
                embed(row["source"]),
                {
                    "source": row["source"],
                    "target": row["target"],
                    "source_locale": row.get("source_locale", "en"),
                    "target_locale": row.get("target_locale", "ko"),
                },
            )
        counts[EXAMPLE_TRANSLATIONS] = self.store.size(EXAMPLE_TRANSLATIONS)
        for row in _seed_rows("label_translations.jsonl"):
            self.store.add(
                LABEL_TRANSLATIONS,
                row["id"],
                row["source"],
                embed(row["source"]),
                {
                    "source": row["source"],
                    "target": row["target"],
                    "category": row.get("category", "topic"),
                    "source_locale": row.get("source_locale", "en"),
                    "target_locale": row.get("target_locale", "ko"),
                },
            )
        counts[LABEL_TRANSLATIONS] = self.store.size(LABEL_TRANSLATIONS)
        for row in _seed_rows("symbol_captions.jsonl"):
            self.store.add(
                SYMBOL_CAPTIONS,
                row["symbol_id"],
                row["caption"],
                embed(row["caption"]),
                {"label": row.get("label", ""), "caption": row["caption"]},
            )
        counts[SYMBOL_CAPTIONS] = self.store.size(SYMBOL_CAPTIONS)
        if export:
            self.export_collections()
        return counts

    def export_collections(self) -> None:
        for name in self.store.collection_names():
            self.store.export_jsonl(name, self.storage.collection_path(name))

    def reembed_collections(self) -> dict[str, int]:
        """Re-embed every stored entry's text with the active embedder.
        Needed after switching provider modes, since vector spaces differ."""
        counts = {}
        fresh = SimilarityStore()
        for name in self.store.collection_names():
            for entry in self.store.entries(name):
                fresh.add(
                    name,
                    entry.entry_id,
                    entry.text,
                    self.providers.embedder.embed(entry.text),
                    entry.payload,
                )
            counts[name] = fresh.size(name)
        self.store = fresh
        self.memory._store = fresh
        self.engine.services.deck_pipeline._symbol_store = fresh
        self.engine.services.deck_pipeline._embedder = self.providers.embedder
        self.export_collections()
        return counts

    def _recover_sessions(self) -> None:
        """Replay unfinished event logs so in-flight sessions survive a
        restart. Ended sessions stay on disk; analytics reads snapshots."""
        for session_id in self.storage.session_ids():
            events = self.storage.load_events(session_id)
            if not events or any(e["type"] == EV_ENDED for e in events):
                continue
            dyad = self.engine.get_dyad(events[0]["dyad_id"])
            session = self.engine.replay(dyad, events)
            self.engine.adopt(session)
            self.storage.save_snapshot(session.snapshot())

    # -- profiles ---------------------------------------------------------------------

    def create_profile(self, record: dict) -> DyadProfile:
        # Service-level locales are defaults; profiles may override per dyad.
        record = {
            "locale_source": self.config.locale_source,
            "locale_target": self.config.locale_target,
            **record,
        }
        try:
            profile = DyadProfile.from_record(record)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadRequest(f"malformed profile: {exc}") from None
        existing = {p.dyad_id for p in self.engine.dyads()}
        result = validate_profile(profile, existing_ids=existing)
        if not result.valid:
            raise InvalidProfile(result.violations)
        self.engine.add_dyad(profile)
        self.storage.save_profiles(self.engine.dyads())
        return profile

    def update_profile(self, dyad_id: str, record: dict) -> DyadProfile:
        current = self.engine.get_dyad(dyad_id)
        merged = {**current.to_record(), **record, "dyad_id": dyad_id}
        try:
            profile = DyadProfile.from_record(merged)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadRequest(f"malformed profile: {exc}") from None
        result = validate_profile(profile)
        if not result.valid:
            raise InvalidProfile(result.violations)
        self.engine.add_dyad(profile)
        self.storage.save_profiles(self.engine.dyads())
        return profile

    def add_custom_image(self, dyad_id: str, label: str, payload: bytes, mime: str) -> str:
        profile = self.engine.get_dyad(dyad_id)
        asset_id = self.assets.put(payload, mime)
        profile.custom_images[label] = asset_id
        self.engine.add_dyad(profile)
        self.storage.save_profiles(self.engine.dyads())
        return asset_id

    # -- sessions ----------------------------------------------------------------------

    def _after(self, session: Session) -> Session:
        self.storage.save_snapshot(session.snapshot())
        return session

    def _mutating(self, session_id: str, op: Callable[[], Session]) -> Session:
        """Run one engine mutation. A session the engine no longer holds
        (ended before a restart) still has a snapshot on disk; reject with
        SessionEnded rather than pretending it never existed."""
        try:
            return self._after(op())
        except UnknownSession:
            stored = self.storage.load_snapshot(session_id)
            if stored is not None and stored.get("state") == SessionState.ENDED.value:
                raise SessionEnded(f"session {session_id} has ended") from None
            raise

    def start_session(self, dyad_id: str, topic_record: dict) -> Session:
        try:
            kind = TopicKind(topic_record.get("kind"))
        except ValueError:
            raise InvalidTopic(f"unknown topic kind {topic_record.get('kind')!r}") from None
        try:
            topic = ConversationTopic(kind, topic_record.get("interest_label"))
        except ValueError as exc:
            raise InvalidTopic(str(exc)) from None
        return self._after(self.engine.start_session(dyad_id, topic))

    def submit_utterance_text(self, session_id: str, text: str) -> Session:
        return self._mutating(session_id, lambda: self.engine.submit_utterance(session_id, text))

    def submit_utterance_audio(self, session_id: str, audio: bytes) -> Session:
        # Same cap as stored assets; reject before transcription runs.
        if len(audio) > self.assets.max_bytes:
            raise PayloadTooLarge(
                f"audio is {len(audio)} bytes; the limit is {self.assets.max_bytes}"
            )

        def op() -> Session:
            session = self.engine.get_session(session_id)
            text = self.providers.transcriber.transcribe(audio, session.dyad.locale_source)
            return self.engine.submit_utterance(session_id, text)

        return self._mutating(session_id, op)

    def reveal_example(self, session_id: str, guide_id: str) -> Session:
        return self._mutating(session_id, lambda: self.engine.reveal_example(session_id, guide_id))

    def pass_turn(self, session_id: str, from_state: str, source: str) -> Session:
        try:
            state = SessionState(from_state)
            origin = PassSource(source)
        except ValueError as exc:
            raise BadRequest(str(exc)) from None
        return self._mutating(session_id, lambda: self.engine.pass_turn(session_id, state, origin))

    def select_card(self, session_id: str, card_id: str) -> Session:
        return self._mutating(session_id, lambda: self.engine.select_card(session_id, card_id))

    def deselect_card(self, session_id: str, position: int) -> Session:
        return self._mutating(session_id, lambda: self.engine.deselect_card(session_id, position))

    def refresh_deck(self, session_id: str) -> Session:
        return self._mutating(session_id, lambda: self.engine.refresh_deck(session_id))

    def end_session(self, session_id: str) -> dict:
        """End and return the client view. Ending an already ended session
        is a no-op, including one that only exists on disk after a restart."""
        try:
            return self._after(self.engine.end_session(session_id)).view()
        except UnknownSession:
            stored = self.storage.load_snapshot(session_id)
            if stored is None or stored.get("state") != SessionState.ENDED.value:
                raise
            return view_from_snapshot(stored)

    # -- read paths -----------------------------------------------------------------------

    def session_view(self, session_id: str) -> dict:
        try:
            return self.engine.get_session(session_id).view()
        except UnknownSession:
            stored = self.storage.load_snapshot(session_id)
            if stored is None:
                raise
            return view_from_snapshot(stored)

    def snapshot_for(self, session_id: str) -> dict:
        try:
            return self.engine.get_session(session_id).snapshot()
        except UnknownSession:
            stored = self.storage.load_snapshot(session_id)
            if stored is None:
                raise
            return stored

    def transcript(self, session_id: str, include_guides: bool = False) -> str:
        return export_transcript(self.snapshot_for(session_id), include_guides=include_guides)

    def usage_report(self, k: int = 20, basis: str = "recommended") -> dict:
        return build_report(self.storage.load_snapshots(), k=k, basis=basis).to_record()
