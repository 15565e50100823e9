"""Pluggable provider boundary: completion, embedding, speech, translation.

Orchestration code depends only on the protocols and the gateway in
``base``; concrete backends live in ``mock`` (deterministic, offline) and
``live`` (network).
"""

from .base import (
    EXEMPLAR_BUDGET,
    CallRecord,
    CompletionGateway,
    CompletionRequest,
    Embedder,
    PromptContext,
    ProviderSet,
    Synthesizer,
    TaskTag,
    Transcriber,
    Translator,
    validate_shape,
)
from .mock import (
    EMOTION_PRIORITY,
    MockCompletionBackend,
    MockEmbedder,
    MockSynthesizer,
    MockTranscriber,
    MockTranslator,
    stable_seed,
)

__all__ = [
    "EXEMPLAR_BUDGET",
    "EMOTION_PRIORITY",
    "CallRecord",
    "CompletionGateway",
    "CompletionRequest",
    "Embedder",
    "MockCompletionBackend",
    "MockEmbedder",
    "MockSynthesizer",
    "MockTranscriber",
    "MockTranslator",
    "PromptContext",
    "ProviderSet",
    "Synthesizer",
    "TaskTag",
    "Transcriber",
    "Translator",
    "stable_seed",
    "validate_shape",
]
