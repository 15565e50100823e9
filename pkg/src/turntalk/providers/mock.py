"""Deterministic offline providers.

Every mock is a pure function of its inputs plus a fixed seed: no hidden
state, no wall clock, no call-order dependence. Two identical runs of the
full system against these mocks produce byte-identical session logs, which
is what makes replay testing meaningful.

The text-generation rules are intentionally shallow (token extraction and
fixed fillers) so pipeline tests can assert counts, uniqueness, and
exclusions rather than semantics.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import zlib
from typing import Any, Optional

from ..domain import GuideDirection
from ..errors import EmptyInput, UnrecognizedAudio
from .base import CompletionRequest, PromptContext, TaskTag, require_text

# Backfill order for emotion curation; fronts the clinically basic emotions.
EMOTION_PRIORITY = (
    "happy", "sad", "scared", "excited", "angry", "joyful",
    "glad", "upset", "afraid", "surprised", "amazed", "bored",
)

TOPIC_FILLERS = (
    "park", "snack", "music", "puzzle", "drawing", "playground", "weather",
    "school", "friend", "book", "garden", "swimming", "blocks", "kitchen",
    "window", "morning", "bedtime", "breakfast", "bicycle", "umbrella",
    "shoes", "backpack", "rainbow", "picnic", "slide", "swing", "sandbox",
    "balloon", "sticker", "crayon", "juice", "cookie", "teddy", "kite",
)

ACTION_FILLERS = (
    "play", "eat", "go", "look", "listen", "draw", "sing", "jump", "run",
    "ride", "open", "close", "build", "wash", "sleep", "read", "throw",
    "catch", "push", "pull", "hug", "help", "wait", "stop", "share",
    "drink", "climb", "dance", "point", "give", "take", "find", "watch",
)

_STOPWORDS = frozenset(
    """a an and are at be but did do does for from had has have he her his i in is
    it its me my of on or our she so that the their them they this to was we what
    when where who will with you your today yes no into onto over under about
    there here very really while then than want wants going some more most also
    just like said says how why""".split()
)

_WORD_RE = re.compile(r"[a-zA-Z']+")

# Keyword heuristics approximating the three negative-pattern categories.
_BLAME_MARKERS = (
    "look carefully", "take a closer look", "no...", "no ...", "that is wrong",
    "that's wrong", "you're wrong", "bad job", "not listening", "stop that",
)
_CORRECTION_MARKERS = (
    "do that again", "say it again", "try again", "next time", "not like that",
    "that's not right", "that is not right", "pick the", "you should have",
)

_FEEDBACK_TEXTS = {
    "blame": (
        "Your last message may have felt like criticism to {child}. Feeling judged "
        "can make a child withdraw; an accepting response keeps them sharing."
    ),
    "correction": (
        "Your last message focused on correcting {child}'s answer. Repeated "
        "corrections can discourage a child from answering in their own way."
    ),
    "complex": (
        "Your last message packed several questions or goals together, which can "
        "be hard for {child} to follow. One clear idea at a time is easier to answer."
    ),
}

_GUIDE_TEMPLATES = {
    GuideDirection.ASK_FOR_ELABORATION: "Ask {child} a simple what-question about {token}",
    GuideDirection.SHOW_ENCOURAGEMENT: "Praise what {child} just shared about {token}",
    GuideDirection.SUGGEST_CHOICES: "Offer {child} two easy choices related to {token}",
    GuideDirection.ENCOURAGE_SELF_DISCLOSURE: "Ask {child} how they feel about {token}",
    GuideDirection.ASK_FOR_INTENTIONS: "Check what {child} meant with their last answer",
    GuideDirection.EXTEND_TOPIC: "Invite {child} to connect {token} with something new",
    GuideDirection.OPEN_UP: "Share your own feeling about {token} in simple words",
    GuideDirection.SHOW_EMPATHY: "Acknowledge how {child} seems to feel about {token}",
    GuideDirection.PIQUE_INTEREST: "Mention one surprising fact about {token}",
    GuideDirection.PROVIDE_CLUES: "Remind {child} of something you did together with {token}",
    GuideDirection.SUGGEST_COPING_STRATEGIES: "Suggest one small step that makes {token} easier",
    GuideDirection.WRAP_UP: "Ask {child} whether they want to finish the conversation",
}


def stable_seed(*parts: str) -> int:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _context_key(context: PromptContext) -> str:
    return json.dumps(context.to_record(), sort_keys=True, ensure_ascii=False)


def extract_tokens(dialogue: list[dict]) -> list[str]:
    """Content words from the dialogue, most recent message first,
    de-duplicated while preserving order."""
    seen: set[str] = set()
    out: list[str] = []
    for message in reversed(dialogue):
        text = message.get("text", "")
        for word in _WORD_RE.findall(text.lower()):
            word = word.strip("'")
            if len(word) < 3 or word in _STOPWORDS or word in seen:
                continue
            seen.add(word)
            out.append(word)
    return out


class MockCompletionBackend:
    """Rule-driven stand-in for the generative model."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _rng(self, request: CompletionRequest) -> random.Random:
        return random.Random(stable_seed(str(self.seed), request.task.value, _context_key(request.context)))

    def generate(self, request: CompletionRequest, repair_hint: Optional[str]) -> Any:
        task = request.task
        context = request.context
        constraints = context.constraints
        if task is TaskTag.INSPECT:
            return self._inspect(constraints)
        if task is TaskTag.GUIDES:
            return self._guides(request)
        if task is TaskTag.EXAMPLE:
            child = (context.dyad_summary or {}).get("child_name", "the child")
            guide = constraints.get("guide", "")
            body = guide[:1].lower() + guide[1:] if guide else "what would you like to say"
            return {"example": f"{child}, {body.rstrip('.?! ')}?"}
        if task is TaskTag.TRANSLATE_EXAMPLE:
            target = constraints.get("target_locale", "xx")
            return {"translation": f"{constraints.get('text', '')} [informal-{target}]"}
        if task is TaskTag.TRANSLATE_LABEL:
            target = constraints.get("target_locale", "xx")
            return {"translation": f"[{target}] {constraints.get('text', '')}"}
        if task is TaskTag.GENERATE_CARDS:
            return self._cards(request)
        if task is TaskTag.CURATE_EMOTIONS:
            excluded = set(constraints.get("excluded", ()))
            picks = [e for e in EMOTION_PRIORITY if e not in excluded][:4]
            return {"emotions": picks}
        if task is TaskTag.CAPTION:
            return {"caption": f"a simple symbol picturing {constraints.get('label', 'something')}"}
        raise ValueError(f"unhandled task {task!r}")

    def _inspect(self, constraints: dict) -> dict:
        message = constraints.get("message", "") or ""
        lowered = message.lower()
        child = constraints.get("child_name", "your child")
        category = None
        if any(marker in lowered for marker in _BLAME_MARKERS):
            category = "blame"
        elif any(marker in lowered for marker in _CORRECTION_MARKERS):
            category = "correction"
        elif message.count("?") >= 2:
            category = "complex"
        if category is None:
            return {"category": "none", "feedback": None}
        return {"category": category, "feedback": _FEEDBACK_TEXTS[category].format(child=child)}

    def _guides(self, request: CompletionRequest) -> list[dict]:
        context = request.context
        constraints = context.constraints
        count = int(constraints.get("count", 3))
        allowed = [
            GuideDirection(d) for d in constraints.get("allowed_directions", [d.value for d in GuideDirection])
        ]
        rng = self._rng(request)
        directions = rng.sample(allowed, min(count, len(allowed)))
        tokens = extract_tokens(context.dialogue)
        token = tokens[0] if tokens else (constraints.get("topic_hint") or "the day")
        child = (context.dyad_summary or {}).get("child_name", "the child")
        return [
            {"direction": d.value, "guide": _GUIDE_TEMPLATES[d].format(child=child, token=token)}
            for d in directions
        ]

    def _cards(self, request: CompletionRequest) -> dict:
        context = request.context
        excluded = set(context.constraints.get("excluded", ()))
        tokens = extract_tokens(context.dialogue)
        topic: list[str] = []
        for candidate in list(tokens) + list(TOPIC_FILLERS):
            if candidate not in excluded and candidate not in topic:
                topic.append(candidate)
            if len(topic) == 4:
                break
        i = 0
        while len(topic) < 4:
            candidate = f"idea {i}"
            if candidate not in excluded and candidate not in topic:
                topic.append(candidate)
            i += 1
        rng = self._rng(request)
        start = rng.randrange(len(ACTION_FILLERS))
        rotated = [ACTION_FILLERS[(start + j) % len(ACTION_FILLERS)] for j in range(len(ACTION_FILLERS))]
        action: list[str] = []
        for candidate in rotated:
            if candidate not in excluded and candidate not in topic and candidate not in action:
                action.append(candidate)
            if len(action) == 4:
                break
        i = 0
        while len(action) < 4:
            candidate = f"move {i}"
            if candidate not in excluded and candidate not in topic and candidate not in action:
                action.append(candidate)
            i += 1
        return {"topic": topic, "action": action}


class MockEmbedder:
    """L2-normalized character-trigram hash histogram.

    Cheap, deterministic, and lexically faithful enough for top-k tests:
    shared substrings raise cosine similarity.
    """

    def __init__(self, dimension: int = 256):
        self.dimension = dimension

    def embed(self, text: str) -> list[float]:
        require_text(text)
        normalized = " ".join(text.lower().split())
        grams = (
            [normalized[i : i + 3] for i in range(len(normalized) - 2)]
            if len(normalized) >= 3
            else [normalized]
        )
        counts = [0.0] * self.dimension
        for gram in grams:
            counts[zlib.crc32(gram.encode("utf-8")) % self.dimension] += 1.0
        norm = sum(c * c for c in counts) ** 0.5
        return [c / norm for c in counts]


class MockTranscriber:
    """Reads the transcript from the fixture's sidecar payload: the audio
    bytes are UTF-8 text, optionally a JSON object with a ``transcript`` key."""

    def transcribe(self, audio: bytes, locale: str) -> str:
        if not audio:
            raise EmptyInput("audio blob is empty")
        try:
            text = audio.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnrecognizedAudio("could not recognize speech; please retry") from exc
        text = text.strip()
        if text.startswith("{"):
            try:
                sidecar = json.loads(text)
            except json.JSONDecodeError:
                sidecar = None
            if isinstance(sidecar, dict) and isinstance(sidecar.get("transcript"), str):
                return sidecar["transcript"]
        if not text:
            raise UnrecognizedAudio("could not recognize speech; please retry")
        return text


class MockSynthesizer:
    """Content-addressed voice-over stub: the asset id is a stable hash of
    (text, locale); the payload is empty audio."""

    def __init__(self, asset_store=None):
        self.asset_store = asset_store

    def synthesize(self, text: str, locale: str) -> str:
        require_text(text)
        digest = hashlib.sha256(f"{locale}\x1f{text}".encode("utf-8")).hexdigest()
        asset_id = f"tts-{digest[:24]}"
        if self.asset_store is not None:
            self.asset_store.register(asset_id, b"", "audio/wav")
        return asset_id


class MockTranslator:
    """Formal-register translation stub: wraps the text with a locale tag."""

    def translate(self, text: str, source: str, target: str) -> str:
        require_text(text)
        return f"[{target}] {text}"
