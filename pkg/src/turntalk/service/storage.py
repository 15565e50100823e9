"""File-backed persistence.

Layout under the storage root:

    profiles.json                    dyad profiles
    sessions/<id>.events.jsonl       append-only event logs (source of truth)
    snapshots/<id>.json              derived-state snapshots for analytics
    label_cache.jsonl                write-through label translation memory
    collections/<name>.jsonl         similarity-store exports
    assets/                          content-addressed blobs

Event logs are canonical JSON, one event per line, flushed per append;
snapshots are rewritten after every applied event so the analytics view
survives a crash without needing providers to replay.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional

from ..domain import DyadProfile
from ..errors import CorruptLog

_SESSION_FILE = re.compile(r"^(?P<session_id>.+)\.events\.jsonl$")


def canonical_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class MemorySink:
    """Event sink for tests and ephemeral runs; same contract as
    FileStorage.append_event without any I/O."""

    def __init__(self):
        self.events: dict[str, list[dict]] = {}

    def append_event(self, session_id: str, record: dict) -> None:
        self.events.setdefault(session_id, []).append(record)

    def load_events(self, session_id: str) -> list[dict]:
        return list(self.events.get(session_id, ()))


class FileStorage:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.snapshots_dir = self.root / "snapshots"
        self.collections_dir = self.root / "collections"
        self.assets_dir = self.root / "assets"
        for directory in (
            self.root,
            self.sessions_dir,
            self.snapshots_dir,
            self.collections_dir,
            self.assets_dir,
        ):
            directory.mkdir(parents=True, exist_ok=True)

    # -- profiles ---------------------------------------------------------------

    @property
    def profiles_path(self) -> Path:
        return self.root / "profiles.json"

    def load_profiles(self) -> list[DyadProfile]:
        if not self.profiles_path.exists():
            return []
        records = json.loads(self.profiles_path.read_text(encoding="utf-8"))
        return [DyadProfile.from_record(r) for r in records]

    def save_profiles(self, profiles: list[DyadProfile]) -> None:
        records = [p.to_record() for p in sorted(profiles, key=lambda p: p.dyad_id)]
        self.profiles_path.write_text(
            json.dumps(records, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    # -- event logs ---------------------------------------------------------------

    def _events_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.events.jsonl"

    def append_event(self, session_id: str, record: dict) -> None:
        with self._events_path(session_id).open("a", encoding="utf-8") as handle:
            handle.write(canonical_json(record))
            handle.write("\n")
            handle.flush()

    def load_events(self, session_id: str) -> list[dict]:
        path = self._events_path(session_id)
        if not path.exists():
            return []
        records = []
        for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorruptLog(f"{path}, line {line_no}: {exc}") from exc
        return records

    def session_ids(self) -> list[str]:
        ids = []
        for path in self.sessions_dir.glob("*.events.jsonl"):
            match = _SESSION_FILE.match(path.name)
            if match:
                ids.append(match.group("session_id"))
        return sorted(ids)

    def next_session_ordinal(self, dyad_id: str) -> int:
        highest = 0
        pattern = re.compile(re.escape(dyad_id) + r"-s(\d+)$")
        for session_id in self.session_ids():
            match = pattern.match(session_id)
            if match:
                highest = max(highest, int(match.group(1)))
        return highest + 1

    # -- snapshots -------------------------------------------------------------------

    def save_snapshot(self, snapshot: dict) -> None:
        path = self.snapshots_dir / f"{snapshot['session_id']}.json"
        path.write_text(canonical_json(snapshot) + "\n", encoding="utf-8")

    def load_snapshot(self, session_id: str) -> Optional[dict]:
        path = self.snapshots_dir / f"{session_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def load_snapshots(self) -> list[dict]:
        snapshots = []
        for path in sorted(self.snapshots_dir.glob("*.json")):
            snapshots.append(json.loads(path.read_text(encoding="utf-8")))
        return snapshots

    # -- label translation cache ---------------------------------------------------------

    @property
    def label_cache_path(self) -> Path:
        return self.root / "label_cache.jsonl"

    def append_label_translation(self, record: dict) -> None:
        with self.label_cache_path.open("a", encoding="utf-8") as handle:
            handle.write(canonical_json(record))
            handle.write("\n")

    def load_label_translations(self) -> list[dict]:
        if not self.label_cache_path.exists():
            return []
        rows = []
        for line in self.label_cache_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                rows.append(json.loads(line))
        return rows

    # -- collections ------------------------------------------------------------------------

    def collection_path(self, name: str) -> Path:
        return self.collections_dir / f"{name}.jsonl"
