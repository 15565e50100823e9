"""Localization paths for parent-facing and child-facing text.

Three registers, three routes:

* coaching guides and feedback go through the formal machine-translation
  provider verbatim;
* spoken examples go through the completion provider with a handful of
  informal-register exemplar pairs retrieved by similarity;
* card labels go through the completion provider with more exemplars, and
  land in an exact-match memory so each (category, label, locale) triple is
  translated at most once.

Every route fails open: when a provider is down the original text comes
back flagged ``untranslated`` instead of an exception, because a usable
untranslated card beats a dead session.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .errors import MalformedOutput, ProviderUnavailable
from .providers.base import (
    EXEMPLAR_BUDGET,
    CompletionGateway,
    CompletionRequest,
    Embedder,
    PromptContext,
    TaskTag,
    Translator,
)
from .similarity import EXAMPLE_TRANSLATIONS, LABEL_TRANSLATIONS, SimilarityStore


@dataclass(frozen=True)
class Localized:
    text: str
    untranslated: bool = False
    cached: bool = False


def cache_key(category: str, label: str, target: str) -> str:
    return f"{category}\x1f{label}\x1f{target}"


class TranslationMemory:
    def __init__(
        self,
        gateway: CompletionGateway,
        translator: Translator,
        store: SimilarityStore,
        embedder: Embedder,
        on_label_cached: Optional[Callable[[dict], None]] = None,
    ):
        self._gateway = gateway
        self._translator = translator
        self._store = store
        self._embedder = embedder
        self._on_label_cached = on_label_cached
        self._labels: dict[str, str] = {}

    def seed_labels(self, rows: list[dict]) -> int:
        """Preload exact-match label translations from persisted records."""
        count = 0
        for row in rows:
            key = cache_key(row["category"], row["label"], row["target_locale"])
            self._labels[key] = row["localized"]
            count += 1
        return count

    def cached_label(self, category: str, label: str, target: str) -> Optional[str]:
        return self._labels.get(cache_key(category, label, target))

    def _exemplars(self, collection: str, text: str, target: str, budget: int) -> list[dict]:
        try:
            size = self._store.size(collection)
        except Exception:
            return []
        if size == 0:
            return []
        matches = self._store.top_k(collection, self._embedder.embed(text), size)
        picked = []
        for match in matches:
            payload = match.payload
            if payload.get("target_locale") not in (None, target):
                continue
            picked.append({"source": payload.get("source", match.text), "target": payload["target"]})
            if len(picked) == budget:
                break
        return picked

    def localize_guide(self, text: str, source: str, target: str) -> Localized:
        """Formal register, used for coaching guides and feedback."""
        if source == target or not text:
            return Localized(text)
        try:
            return Localized(self._translator.translate(text, source, target))
        except (ProviderUnavailable, MalformedOutput):
            return Localized(text, untranslated=True)

    def localize_example(self, text: str, source: str, target: str) -> Localized:
        if source == target or not text:
            return Localized(text)
        exemplars = self._exemplars(
            EXAMPLE_TRANSLATIONS, text, target, EXEMPLAR_BUDGET[TaskTag.TRANSLATE_EXAMPLE]
        )
        request = CompletionRequest(
            task=TaskTag.TRANSLATE_EXAMPLE,
            context=PromptContext(
                constraints={"text": text, "source_locale": source, "target_locale": target},
                exemplars=exemplars,
            ),
        )
        try:
            result = self._gateway.complete(request)
        except (ProviderUnavailable, MalformedOutput):
            return Localized(text, untranslated=True)
        return Localized(result["translation"])

    def localize_label(self, label: str, category: str, source: str, target: str) -> Localized:
        if source == target or not label:
            return Localized(label)
        cached = self.cached_label(category, label, target)
        if cached is not None:
            return Localized(cached, cached=True)
        exemplars = self._exemplars(
            LABEL_TRANSLATIONS, label, target, EXEMPLAR_BUDGET[TaskTag.TRANSLATE_LABEL]
        )
        request = CompletionRequest(
            task=TaskTag.TRANSLATE_LABEL,
            context=PromptContext(
                constraints={
                    "text": label,
                    "category": category,
                    "source_locale": source,
                    "target_locale": target,
                },
                exemplars=exemplars,
            ),
        )
        try:
            result = self._gateway.complete(request)
        except (ProviderUnavailable, MalformedOutput):
            return Localized(label, untranslated=True)
        localized = result["translation"]
        self._labels[cache_key(category, label, target)] = localized
        if self._on_label_cached is not None:
            self._on_label_cached(
                {
                    "category": category,
                    "label": label,
                    "target_locale": target,
                    "localized": localized,
                }
            )
        return Localized(localized)
