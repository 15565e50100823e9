"""Provider contracts: text completion with schema-gated structured output,
text embedding, speech transcription, speech synthesis, and formal text
translation.

Callers build a :class:`CompletionRequest` for one of the known task tags and
go through :class:`CompletionGateway`, which validates the backend output
against the task's expected shape and retries with a repair hint before
giving up with ``MalformedOutput``. Backends never leak past this module.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Protocol

from ..domain import EMOTION_VALUES, GuideDirection
from ..errors import EmptyInput, MalformedOutput

GUIDE_DIRECTION_VALUES = frozenset(d.value for d in GuideDirection)


class TaskTag(str, Enum):
    INSPECT = "inspect"
    GUIDES = "guides"
    EXAMPLE = "example"
    TRANSLATE_EXAMPLE = "translate_example"
    TRANSLATE_LABEL = "translate_label"
    GENERATE_CARDS = "generate_cards"
    CURATE_EMOTIONS = "curate_emotions"
    CAPTION = "caption"


# Few-shot exemplar budget per task; tasks not listed accept none.
EXEMPLAR_BUDGET = {TaskTag.TRANSLATE_EXAMPLE: 3, TaskTag.TRANSLATE_LABEL: 5}


@dataclass
class PromptContext:
    """Structured prompt parts; backends render these however they need."""

    dyad_summary: Optional[dict] = None
    dialogue: list[dict] = field(default_factory=list)
    constraints: dict = field(default_factory=dict)
    exemplars: list[dict] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "dyad_summary": self.dyad_summary,
            "dialogue": list(self.dialogue),
            "constraints": dict(self.constraints),
            "exemplars": list(self.exemplars),
        }


@dataclass
class CompletionRequest:
    task: TaskTag
    context: PromptContext = field(default_factory=PromptContext)

    def __post_init__(self):
        budget = EXEMPLAR_BUDGET.get(self.task, 0)
        if len(self.context.exemplars) > budget:
            raise ValueError(
                f"task {self.task.value} allows at most {budget} few-shot exemplars, "
                f"got {len(self.context.exemplars)}"
            )

    @property
    def expected_shape(self) -> str:
        return self.task.value


class ShapeError(ValueError):
    """Raw backend output does not parse against the task's schema."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ShapeError(message)


def _as_obj(raw: Any) -> Any:
    if isinstance(raw, str):
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ShapeError(f"output is not valid JSON: {exc}") from exc
    return raw


def _text_field(obj: Any, key: str) -> str:
    _require(isinstance(obj, dict), "expected a JSON object")
    value = obj.get(key)
    _require(isinstance(value, str) and value.strip() != "", f"{key!r} must be non-empty text")
    return value.strip()


def validate_shape(task: TaskTag, raw: Any) -> Any:
    """Parse and validate raw backend output for ``task``; raises ShapeError."""
    obj = _as_obj(raw)
    if task is TaskTag.INSPECT:
        _require(isinstance(obj, dict), "expected a JSON object")
        category = obj.get("category")
        _require(
            category in ("blame", "correction", "complex", "none"),
            "category must be one of blame/correction/complex/none",
        )
        if category == "none":
            return {"category": "none", "feedback": None}
        feedback = obj.get("feedback")
        _require(
            isinstance(feedback, str) and feedback.strip() != "",
            "flagged messages need non-empty feedback text",
        )
        return {"category": category, "feedback": feedback.strip()}
    if task is TaskTag.GUIDES:
        _require(isinstance(obj, list) and len(obj) > 0, "expected a non-empty array of guides")
        out = []
        for item in obj:
            _require(isinstance(item, dict), "each guide must be an object")
            direction = item.get("direction")
            _require(direction in GUIDE_DIRECTION_VALUES, f"unknown direction {direction!r}")
            out.append({"direction": direction, "guide": _text_field(item, "guide")})
        return out
    if task is TaskTag.EXAMPLE:
        return {"example": _text_field(obj, "example")}
    if task in (TaskTag.TRANSLATE_EXAMPLE, TaskTag.TRANSLATE_LABEL):
        return {"translation": _text_field(obj, "translation")}
    if task is TaskTag.GENERATE_CARDS:
        _require(isinstance(obj, dict), "expected a JSON object")
        out = {}
        for key in ("topic", "action"):
            labels = obj.get(key)
            _require(isinstance(labels, list), f"{key!r} must be an array")
            cleaned = [l.strip() for l in labels if isinstance(l, str) and l.strip()]
            _require(len(cleaned) == len(labels), f"{key!r} entries must be non-empty strings")
            out[key] = cleaned
        return out
    if task is TaskTag.CURATE_EMOTIONS:
        _require(isinstance(obj, dict), "expected a JSON object")
        emotions = obj.get("emotions")
        _require(isinstance(emotions, list), "'emotions' must be an array")
        _require(all(isinstance(e, str) for e in emotions), "emotions must be strings")
        return {"emotions": [e.strip().lower() for e in emotions]}
    if task is TaskTag.CAPTION:
        return {"caption": _text_field(obj, "caption")}
    raise ShapeError(f"no schema registered for task {task!r}")


class CompletionBackend(Protocol):
    """Produces raw output for a request; structured data or JSON text."""

    def generate(self, request: CompletionRequest, repair_hint: Optional[str]) -> Any:
        ...


@dataclass
class CallRecord:
    task: TaskTag
    request: CompletionRequest
    attempts: int


class CompletionGateway:
    """Schema gate in front of a completion backend.

    Retries with a repair hint when the raw output fails validation, up to
    ``repair_retries`` extra attempts, then raises ``MalformedOutput``.
    Keeps an in-memory call log for instrumentation-driven tests.
    """

    def __init__(self, backend: CompletionBackend, repair_retries: int = 2):
        self.backend = backend
        self.repair_retries = repair_retries
        self.calls: list[CallRecord] = []
        self._lock = threading.Lock()

    def call_count(self, task: Optional[TaskTag] = None) -> int:
        with self._lock:
            if task is None:
                return len(self.calls)
            return sum(1 for c in self.calls if c.task is task)

    def reset_calls(self) -> None:
        with self._lock:
            self.calls.clear()

    def complete(self, request: CompletionRequest) -> Any:
        repair_hint: Optional[str] = None
        last_error: Optional[ShapeError] = None
        attempts = 0
        for _ in range(self.repair_retries + 1):
            attempts += 1
            raw = self.backend.generate(request, repair_hint)
            try:
                result = validate_shape(request.task, raw)
            except ShapeError as exc:
                last_error = exc
                repair_hint = str(exc)
                continue
            with self._lock:
                self.calls.append(CallRecord(request.task, request, attempts))
            return result
        with self._lock:
            self.calls.append(CallRecord(request.task, request, attempts))
        raise MalformedOutput(
            f"task {request.task.value}: output failed schema after {attempts} attempts: {last_error}"
        )


class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> list[float]:
        ...


class Transcriber(Protocol):
    def transcribe(self, audio: bytes, locale: str) -> str:
        ...


class Synthesizer(Protocol):
    def synthesize(self, text: str, locale: str) -> str:
        ...


class Translator(Protocol):
    """Formal machine-translation slot (plain text in, plain text out)."""

    def translate(self, text: str, source: str, target: str) -> str:
        ...


def require_text(text: str) -> str:
    if text is None or not text.strip():
        raise EmptyInput("text must be non-empty after trimming")
    return text


@dataclass
class ProviderSet:
    """Everything the pipelines need, bundled; built from config in one place.
    ``completion`` is the raw backend; wrap it in a gateway to call it."""

    completion: CompletionBackend
    embedder: Embedder
    transcriber: Transcriber
    synthesizer: Synthesizer
    translator: Translator
