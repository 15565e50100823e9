"""Network-backed providers.

These talk to OpenAI-compatible and DeepL-compatible HTTP endpoints. They
are deliberately thin: prompt assembly happens here, but schema gating and
retries live in the gateway, and every transport failure is normalized to
ProviderUnavailable so callers never see raw httpx errors.

All classes accept an injected ``httpx.Client`` so tests can substitute a
MockTransport; none of the test suite performs real network I/O.
"""

from __future__ import annotations

import json
from typing import Any, Optional

import httpx

from ..errors import EmptyInput, MalformedOutput, ProviderUnavailable, UnrecognizedAudio
from .base import CompletionRequest, TaskTag, require_text

DEFAULT_TIMEOUT = 30.0

_TASK_INSTRUCTIONS = {
    TaskTag.INSPECT: (
        "You review the parent's latest message in a parent-child conversation. "
        "Classify it as one of: blame (criticizing or scolding the child), "
        "correction (pressuring the child to redo or fix their answer), "
        "complex (several questions or intentions packed into one message), "
        "or none. When the category is not none, write one short supportive "
        "feedback sentence for the parent. "
        'Respond with JSON: {"category": "...", "feedback": "..." or null}.'
    ),
    TaskTag.GUIDES: (
        "You coach a parent talking with their minimally verbal autistic child. "
        "Given the dialogue so far, propose conversational moves. Each move has a "
        "direction (one of the allowed directions) and a one-sentence guide "
        "written as advice to the parent, not as a script. "
        'Respond with a JSON array: [{"direction": "...", "guide": "..."}].'
    ),
    TaskTag.EXAMPLE: (
        "Turn the coaching guide into one concrete utterance the parent could "
        "say to their child, using the child's name and simple words. "
        'Respond with JSON: {"example": "..."}.'
    ),
    TaskTag.TRANSLATE_EXAMPLE: (
        "Translate the utterance into the target locale using an informal, "
        "affectionate register appropriate for a parent speaking to a young "
        "child. Follow the register of the sample translations. "
        'Respond with JSON: {"translation": "..."}.'
    ),
    TaskTag.TRANSLATE_LABEL: (
        "Translate the communication-card label into the target locale as a "
        "short everyday word a child would use. Follow the sample translations. "
        'Respond with JSON: {"translation": "..."}.'
    ),
    TaskTag.GENERATE_CARDS: (
        "Suggest vocabulary for a child's communication board based on the "
        "conversation so far: exactly four topic words (things to talk about) "
        "and four action words (things to do). Avoid the excluded words. "
        'Respond with JSON: {"topic": [...], "action": [...]}.'
    ),
    TaskTag.CURATE_EMOTIONS: (
        "Pick the four emotion words from the allowed list that best fit the "
        "conversation, avoiding the excluded ones. "
        'Respond with JSON: {"emotions": [...]}.'
    ),
    TaskTag.CAPTION: (
        "Write one short literal caption describing what a pictographic "
        "communication symbol for the given label would depict. "
        'Respond with JSON: {"caption": "..."}.'
    ),
}


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = text.split("\n", 1)[1] if "\n" in text else ""
        if text.rstrip().endswith("```"):
            text = text.rstrip()[:-3]
    return text.strip()


class OpenAICompletionBackend:
    """Chat-completions backend for every structured task."""

    def __init__(
        self,
        api_key: str,
        model: str = "gpt-4o",
        base_url: str = "https://api.openai.com/v1",
        client: Optional[httpx.Client] = None,
        temperature: float = 0.7,
    ):
        self.api_key = api_key
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.temperature = temperature
        self._client = client or httpx.Client(timeout=DEFAULT_TIMEOUT)

    def generate(self, request: CompletionRequest, repair_hint: Optional[str]) -> Any:
        messages = self._messages(request, repair_hint)
        try:
            response = self._client.post(
                f"{self.base_url}/chat/completions",
                headers={"Authorization": f"Bearer {self.api_key}"},
                json={
                    "model": self.model,
                    "messages": messages,
                    "temperature": self.temperature,
                },
            )
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"completion endpoint failed: {exc}") from exc
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable("completion endpoint returned an unexpected envelope") from exc
        try:
            return json.loads(_strip_fences(content))
        except json.JSONDecodeError as exc:
            # Not valid JSON at all: let the gateway decide whether to retry.
            raise MalformedOutput(f"model output was not JSON: {exc}") from exc

    def _messages(self, request: CompletionRequest, repair_hint: Optional[str]) -> list[dict]:
        context = request.context
        system = _TASK_INSTRUCTIONS[request.task]
        payload: dict = {"constraints": context.constraints}
        if context.dyad_summary:
            payload["child"] = context.dyad_summary
        if context.dialogue:
            payload["dialogue"] = context.dialogue
        messages = [{"role": "system", "content": system}]
        for exemplar in context.exemplars:
            messages.append({"role": "user", "content": exemplar["source"]})
            messages.append({"role": "assistant", "content": exemplar["target"]})
        messages.append({"role": "user", "content": json.dumps(payload, ensure_ascii=False)})
        if repair_hint:
            messages.append(
                {
                    "role": "user",
                    "content": f"The previous reply was rejected: {repair_hint}. "
                    "Reply again with only the requested JSON.",
                }
            )
        return messages


class OpenAIEmbedder:
    def __init__(
        self,
        api_key: str,
        model: str = "text-embedding-3-small",
        dimension: int = 1536,
        base_url: str = "https://api.openai.com/v1",
        client: Optional[httpx.Client] = None,
    ):
        self.api_key = api_key
        self.model = model
        self.dimension = dimension
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=DEFAULT_TIMEOUT)

    def embed(self, text: str) -> list[float]:
        require_text(text)
        try:
            response = self._client.post(
                f"{self.base_url}/embeddings",
                headers={"Authorization": f"Bearer {self.api_key}"},
                json={"model": self.model, "input": text, "dimensions": self.dimension},
            )
            response.raise_for_status()
            body = response.json()
            return list(body["data"][0]["embedding"])
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"embedding endpoint failed: {exc}") from exc
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable("embedding endpoint returned an unexpected envelope") from exc


class OpenAITranscriber:
    def __init__(
        self,
        api_key: str,
        model: str = "whisper-1",
        base_url: str = "https://api.openai.com/v1",
        client: Optional[httpx.Client] = None,
    ):
        self.api_key = api_key
        self.model = model
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=DEFAULT_TIMEOUT)

    def transcribe(self, audio: bytes, locale: str) -> str:
        if not audio:
            raise EmptyInput("audio blob is empty")
        try:
            response = self._client.post(
                f"{self.base_url}/audio/transcriptions",
                headers={"Authorization": f"Bearer {self.api_key}"},
                data={"model": self.model, "language": locale.split("-")[0]},
                files={"file": ("utterance.wav", audio, "audio/wav")},
            )
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"transcription endpoint failed: {exc}") from exc
        text = body.get("text", "") if isinstance(body, dict) else ""
        if not text.strip():
            raise UnrecognizedAudio("could not recognize speech; please retry")
        return text.strip()


class OpenAISynthesizer:
    def __init__(
        self,
        api_key: str,
        asset_store,
        model: str = "tts-1",
        voice: str = "nova",
        base_url: str = "https://api.openai.com/v1",
        client: Optional[httpx.Client] = None,
    ):
        self.api_key = api_key
        self.asset_store = asset_store
        self.model = model
        self.voice = voice
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=DEFAULT_TIMEOUT)

    def synthesize(self, text: str, locale: str) -> str:
        require_text(text)
        try:
            response = self._client.post(
                f"{self.base_url}/audio/speech",
                headers={"Authorization": f"Bearer {self.api_key}"},
                json={"model": self.model, "voice": self.voice, "input": text},
            )
            response.raise_for_status()
            payload = response.content
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"speech endpoint failed: {exc}") from exc
        import hashlib

        digest = hashlib.sha256(f"{locale}\x1f{text}".encode("utf-8")).hexdigest()
        asset_id = f"tts-{digest[:24]}"
        self.asset_store.register(asset_id, payload, "audio/mpeg")
        return asset_id


class DeepLTranslator:
    """Formal-register machine translation used for coaching guides."""

    def __init__(
        self,
        api_key: str,
        base_url: str = "https://api-free.deepl.com/v2",
        client: Optional[httpx.Client] = None,
    ):
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=DEFAULT_TIMEOUT)

    def translate(self, text: str, source: str, target: str) -> str:
        require_text(text)
        try:
            response = self._client.post(
                f"{self.base_url}/translate",
                headers={"Authorization": f"DeepL-Auth-Key {self.api_key}"},
                json={
                    "text": [text],
                    "source_lang": source.split("-")[0].upper(),
                    "target_lang": target.split("-")[0].upper(),
                },
            )
            response.raise_for_status()
            body = response.json()
            return body["translations"][0]["text"]
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"translation endpoint failed: {exc}") from exc
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable("translation endpoint returned an unexpected envelope") from exc
