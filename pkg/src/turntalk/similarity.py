"""Brute-force cosine similarity store for few-shot exemplar retrieval.

Collections are small (hundreds to a few thousand entries), so exact
brute-force search is both fast enough and trivially deterministic. Ties
are broken by insertion order, which keeps top-k results stable across
runs and across export/import round-trips.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .errors import DimensionMismatch, UnknownCollection, ZeroVector

EXAMPLE_TRANSLATIONS = "example-translations"
LABEL_TRANSLATIONS = "label-translations"
SYMBOL_CAPTIONS = "symbol-captions"


def cosine(u: Iterable[float], v: Iterable[float]) -> float:
    a = np.asarray(list(u), dtype=np.float64)
    b = np.asarray(list(v), dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector lengths differ: {a.shape[0]} vs {b.shape[0]}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.dot(a, b) / (norm_a * norm_b))


@dataclass
class Entry:
    entry_id: str
    text: str
    vector: list[float]
    payload: dict[str, Any]
    seq: int

    def to_record(self) -> dict:
        return {
            "id": self.entry_id,
            "text": self.text,
            "vector": self.vector,
            "payload": self.payload,
        }


@dataclass
class Collection:
    name: str
    dimension: int
    entries: dict[str, Entry] = field(default_factory=dict)
    next_seq: int = 0


@dataclass(frozen=True)
class Match:
    entry_id: str
    score: float
    text: str
    payload: dict[str, Any]


class SimilarityStore:
    """Named collections of (id, text, vector, payload) rows with exact
    top-k retrieval."""

    def __init__(self):
        self._collections: dict[str, Collection] = {}

    def ensure_collection(self, name: str, dimension: int) -> None:
        existing = self._collections.get(name)
        if existing is None:
            self._collections[name] = Collection(name=name, dimension=dimension)
        elif existing.dimension != dimension:
            raise DimensionMismatch(
                f"collection {name!r} holds {existing.dimension}-dimensional vectors, not {dimension}"
            )

    def collection_names(self) -> list[str]:
        return sorted(self._collections)

    def size(self, name: str) -> int:
        return len(self._get(name).entries)

    def _get(self, name: str) -> Collection:
        try:
            return self._collections[name]
        except KeyError:
            raise UnknownCollection(f"no collection named {name!r}") from None

    def add(
        self,
        name: str,
        entry_id: str,
        text: str,
        vector: Iterable[float],
        payload: Optional[dict[str, Any]] = None,
    ) -> None:
        vec = [float(x) for x in vector]
        collection = self._collections.get(name)
        if collection is None:
            collection = Collection(name=name, dimension=len(vec))
            self._collections[name] = collection
        if len(vec) != collection.dimension:
            raise DimensionMismatch(
                f"collection {name!r} holds {collection.dimension}-dimensional vectors, "
                f"got {len(vec)}"
            )
        if not any(vec):
            raise ZeroVector("refusing to index a zero vector")
        previous = collection.entries.get(entry_id)
        # Overwrites keep their original slot so ordering stays stable.
        seq = previous.seq if previous is not None else collection.next_seq
        if previous is None:
            collection.next_seq += 1
        collection.entries[entry_id] = Entry(entry_id, text, vec, dict(payload or {}), seq)

    def get(self, name: str, entry_id: str) -> Optional[Entry]:
        return self._get(name).entries.get(entry_id)

    def top_k(self, name: str, query: Iterable[float], k: int) -> list[Match]:
        collection = self._get(name)
        if k < 1:
            return []
        q = [float(x) for x in query]
        if len(q) != collection.dimension:
            raise DimensionMismatch(
                f"query has {len(q)} dimensions, collection {name!r} holds {collection.dimension}"
            )
        scored = [
            (-cosine(q, entry.vector), entry.seq, entry)
            for entry in collection.entries.values()
        ]
        scored.sort(key=lambda item: (item[0], item[1]))
        return [
            Match(entry_id=e.entry_id, score=-neg, text=e.text, payload=e.payload)
            for neg, _, e in scored[:k]
        ]

    def entries(self, name: str) -> list[Entry]:
        collection = self._get(name)
        return sorted(collection.entries.values(), key=lambda e: e.seq)

    def export_jsonl(self, name: str, path: Path) -> int:
        rows = self.entries(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for entry in rows:
                handle.write(json.dumps(entry.to_record(), sort_keys=True, ensure_ascii=False))
                handle.write("\n")
        return len(rows)

    def import_jsonl(self, name: str, path: Path) -> int:
        count = 0
        with path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self.add(
                    name,
                    record["id"],
                    record.get("text", ""),
                    record["vector"],
                    record.get("payload") or {},
                )
                count += 1
        return count


def reference_top_k(
    rows: list[tuple[str, list[float]]], query: list[float], k: int
) -> list[tuple[str, float]]:
    """Independent oracle for top-k: pure-Python fsum arithmetic, no numpy.

    Kept in the library so tests and tooling can cross-check the store
    without duplicating the arithmetic.
    """
    qnorm = math.sqrt(math.fsum(x * x for x in query))
    scored = []
    for seq, (entry_id, vector) in enumerate(rows):
        dot = math.fsum(a * b for a, b in zip(query, vector))
        vnorm = math.sqrt(math.fsum(x * x for x in vector))
        scored.append((-(dot / (qnorm * vnorm)), seq, entry_id))
    scored.sort()
    return [(entry_id, -neg) for neg, _, entry_id in scored[:k]]
