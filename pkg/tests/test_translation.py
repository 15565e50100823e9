import pytest

from turntalk.errors import ProviderUnavailable, MalformedOutput
from turntalk.providers.base import CompletionGateway, TaskTag
from turntalk.providers.mock import MockCompletionBackend, MockEmbedder, MockTranslator
from turntalk.similarity import (
    EXAMPLE_TRANSLATIONS,
    LABEL_TRANSLATIONS,
    SimilarityStore,
)
from turntalk.translation import TranslationMemory, cache_key


def make_memory(on_label_cached=None, translator=None, backend=None):
    gateway = CompletionGateway(backend or MockCompletionBackend())
    memory = TranslationMemory(
        gateway=gateway,
        translator=translator or MockTranslator(),
        store=SimilarityStore(),
        embedder=MockEmbedder(),
        on_label_cached=on_label_cached,
    )
    return memory, gateway


SEED_LABELS = [
    {"category": "topic", "label": "balloon", "target_locale": "ko", "localized": "풍선"},
    {"category": "topic", "label": "train", "target_locale": "ko", "localized": "기차"},
    {"category": "action", "label": "jump", "target_locale": "ko", "localized": "점프"},
    {"category": "emotion", "label": "happy", "target_locale": "ko", "localized": "행복해"},
    {"category": "topic", "label": "balloon", "target_locale": "fr", "localized": "ballon"},
]


class TestLabelCache:
    def test_seeded_hit_makes_no_provider_call(self):
        memory, gateway = make_memory()
        memory.seed_labels(SEED_LABELS)
        out = memory.localize_label("balloon", "topic", "en", "ko")
        assert out.text == "풍선"
        assert out.cached is True
        assert out.untranslated is False
        assert gateway.call_count(TaskTag.TRANSLATE_LABEL) == 0

    def test_cache_is_locale_scoped(self):
        memory, _ = make_memory()
        memory.seed_labels(SEED_LABELS)
        ko = memory.localize_label("balloon", "topic", "en", "ko")
        fr = memory.localize_label("balloon", "topic", "en", "fr")
        assert (ko.text, fr.text) == ("풍선", "ballon")

    def test_cache_is_category_scoped(self):
        memory, gateway = make_memory()
        memory.seed_labels(SEED_LABELS)
        # "balloon" is seeded as topic; as action it must miss.
        out = memory.localize_label("balloon", "action", "en", "ko")
        assert out.cached is False
        assert gateway.call_count(TaskTag.TRANSLATE_LABEL) == 1

    def test_miss_then_hit(self):
        memory, gateway = make_memory()
        first = memory.localize_label("rocket", "topic", "en", "ko")
        assert first.cached is False
        assert first.text == "[ko] rocket"
        second = memory.localize_label("rocket", "topic", "en", "ko")
        assert second.cached is True
        assert second.text == "[ko] rocket"
        assert gateway.call_count(TaskTag.TRANSLATE_LABEL) == 1

    def test_write_through_callback(self):
        rows = []
        memory, _ = make_memory(on_label_cached=rows.append)
        memory.localize_label("rocket", "topic", "en", "ko")
        assert len(rows) == 1
        assert rows[0]["label"] == "rocket"
        assert rows[0]["target_locale"] == "ko"
        assert rows[0]["localized"] == "[ko] rocket"
        # Hits do not re-fire the callback.
        memory.localize_label("rocket", "topic", "en", "ko")
        assert len(rows) == 1

    def test_identity_locale_short_circuits(self):
        memory, gateway = make_memory()
        out = memory.localize_label("balloon", "topic", "en", "en")
        assert out.text == "balloon"
        assert gateway.call_count() == 0

    def test_cache_key_separator_resists_collisions(self):
        assert cache_key("topic", "a|b", "ko") != cache_key("topic|a", "b", "ko")


class _DownBackend:
    def generate(self, request, repair_hint):
        raise ProviderUnavailable("backend offline")


class _GarbageBackend:
    def generate(self, request, repair_hint):
        return {"nope": True}


class TestFailOpen:
    def test_label_fail_open_keeps_canonical(self):
        memory, _ = make_memory(backend=_DownBackend())
        out = memory.localize_label("rocket", "topic", "en", "ko")
        assert out.text == "rocket"
        assert out.untranslated is True
        assert out.cached is False

    def test_label_failure_not_cached(self):
        rows = []
        memory, _ = make_memory(backend=_DownBackend(), on_label_cached=rows.append)
        memory.localize_label("rocket", "topic", "en", "ko")
        assert rows == []
        assert memory.localize_label("rocket", "topic", "en", "ko").untranslated is True

    def test_label_malformed_fail_open(self):
        memory, _ = make_memory(backend=_GarbageBackend())
        out = memory.localize_label("rocket", "topic", "en", "ko")
        assert out.untranslated is True

    def test_example_fail_open(self):
        memory, _ = make_memory(backend=_DownBackend())
        out = memory.localize_example("Mina, want a balloon?", "en", "ko")
        assert out.text == "Mina, want a balloon?"
        assert out.untranslated is True

    class _DownTranslator:
        def translate(self, text, source, target):
            raise ProviderUnavailable("mt offline")

    def test_guide_fail_open(self):
        memory, _ = make_memory(translator=self._DownTranslator())
        out = memory.localize_guide("Praise the tall tower", "en", "ko")
        assert out.text == "Praise the tall tower"
        assert out.untranslated is True


class TestRegisters:
    def test_guide_uses_formal_translator(self):
        memory, gateway = make_memory()
        out = memory.localize_guide("Praise the tall tower", "en", "ko")
        assert out.text == "[ko] Praise the tall tower"
        # Formal register goes through the dedicated translator, not the gateway.
        assert gateway.call_count() == 0

    def test_guide_identity(self):
        memory, _ = make_memory()
        out = memory.localize_guide("Praise the tower", "en", "en")
        assert out.text == "Praise the tower"
        assert out.untranslated is False

    def test_example_uses_informal_completion(self):
        memory, gateway = make_memory()
        out = memory.localize_example("Mina, what did you build?", "en", "ko")
        assert out.text == "Mina, what did you build? [informal-ko]"
        assert gateway.call_count(TaskTag.TRANSLATE_EXAMPLE) == 1


class _RecordingBackend(MockCompletionBackend):
    def __init__(self):
        super().__init__()
        self.requests = []

    def generate(self, request, repair_hint):
        self.requests.append(request)
        return super().generate(request, repair_hint)


def make_exemplar_stack(backend=None):
    """Memory plus a hand-seeded similarity store, the way the service wires it."""
    backend = backend or _RecordingBackend()
    store = SimilarityStore()
    embedder = MockEmbedder()
    memory = TranslationMemory(
        gateway=CompletionGateway(backend),
        translator=MockTranslator(),
        store=store,
        embedder=embedder,
    )
    return memory, backend, store, embedder


def seed_label_pool(store, embedder, n, locale="ko", start=0):
    for i in range(start, start + n):
        text = f"label-{i}"
        store.add(
            LABEL_TRANSLATIONS,
            f"seed-{locale}-{i}",
            text,
            embedder.embed(text),
            {"source": text, "target": f"loc-{locale}-{i}", "target_locale": locale},
        )


class TestExemplarRetrieval:
    def test_label_miss_carries_up_to_five_exemplars(self):
        memory, backend, store, embedder = make_exemplar_stack()
        seed_label_pool(store, embedder, 8)
        memory.localize_label("label-99", "topic", "en", "ko")
        (request,) = backend.requests
        assert request.task is TaskTag.TRANSLATE_LABEL
        assert len(request.context.exemplars) == 5

    def test_small_pool_sends_what_exists(self):
        memory, backend, store, embedder = make_exemplar_stack()
        seed_label_pool(store, embedder, 2)
        memory.localize_label("label-99", "topic", "en", "ko")
        (request,) = backend.requests
        assert len(request.context.exemplars) == 2

    def test_empty_pool_sends_none(self):
        memory, backend, _, _ = make_exemplar_stack()
        memory.localize_label("label-99", "topic", "en", "ko")
        (request,) = backend.requests
        assert request.context.exemplars == []

    def test_exemplars_filtered_by_target_locale(self):
        memory, backend, store, embedder = make_exemplar_stack()
        seed_label_pool(store, embedder, 3, locale="ko")
        seed_label_pool(store, embedder, 3, locale="fr")
        memory.localize_label("new-label", "topic", "en", "ko")
        (request,) = backend.requests
        assert len(request.context.exemplars) == 3
        assert all(e["target"].startswith("loc-ko-") for e in request.context.exemplars)

    def test_exemplars_match_store_ranking(self):
        memory, backend, store, embedder = make_exemplar_stack()
        seed_label_pool(store, embedder, 10)
        query = "label-3 sibling"
        memory.localize_label(query, "topic", "en", "ko")
        (request,) = backend.requests
        want = [
            m.payload["target"]
            for m in store.top_k(LABEL_TRANSLATIONS, embedder.embed(query), k=5)
            if m.payload.get("target_locale") == "ko"
        ]
        got = [e["target"] for e in request.context.exemplars]
        assert got == want

    def test_example_budget_is_three(self):
        memory, backend, store, embedder = make_exemplar_stack()
        for i in range(6):
            text = f"sample sentence {i}"
            store.add(
                EXAMPLE_TRANSLATIONS,
                f"x{i}",
                text,
                embedder.embed(text),
                {"source": text, "target": f"t{i}", "target_locale": "ko"},
            )
        memory.localize_example("sample sentence zero", "en", "ko")
        (request,) = backend.requests
        assert request.task is TaskTag.TRANSLATE_EXAMPLE
        assert len(request.context.exemplars) == 3
