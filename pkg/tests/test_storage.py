"""File persistence round-trips and failure reporting."""

from __future__ import annotations

import json

import pytest

from turntalk.domain import DyadProfile
from turntalk.errors import CorruptLog
from turntalk.service.storage import FileStorage, MemorySink, canonical_json

from conftest import make_dyad


@pytest.fixture
def storage(tmp_path):
    return FileStorage(tmp_path / "store")


class TestLayout:
    def test_directories_created(self, tmp_path):
        root = tmp_path / "store"
        FileStorage(root)
        for sub in ("sessions", "snapshots", "collections", "assets"):
            assert (root / sub).is_dir()

    def test_reopening_existing_root_is_safe(self, tmp_path):
        FileStorage(tmp_path / "store")
        FileStorage(tmp_path / "store")


class TestEventLogs:
    def test_append_then_load_round_trips(self, storage):
        records = [
            {"type": "session_started", "at": 1000.0, "dyad_id": "d1"},
            {"type": "utterance_submitted", "at": 1001.0, "text": "풍선 봤어?"},
        ]
        for record in records:
            storage.append_event("d1-s1", record)
        assert storage.load_events("d1-s1") == records

    def test_one_canonical_line_per_event(self, storage):
        storage.append_event("d1-s1", {"type": "session_started", "b": 2, "a": 1})
        lines = (storage.sessions_dir / "d1-s1.events.jsonl").read_text().splitlines()
        assert lines == [canonical_json({"type": "session_started", "a": 1, "b": 2})]

    def test_missing_log_loads_empty(self, storage):
        assert storage.load_events("ghost") == []

    def test_corrupt_line_reports_position(self, storage):
        storage.append_event("d1-s1", {"type": "session_started"})
        path = storage.sessions_dir / "d1-s1.events.jsonl"
        path.write_text(path.read_text() + "{not json\n", encoding="utf-8")
        with pytest.raises(CorruptLog) as excinfo:
            storage.load_events("d1-s1")
        assert "line 2" in str(excinfo.value)

    def test_session_ids_sorted(self, storage):
        for sid in ("d1-s2", "d1-s10", "d2-s1"):
            storage.append_event(sid, {"type": "session_started"})
        assert storage.session_ids() == ["d1-s10", "d1-s2", "d2-s1"]

    def test_next_ordinal_scans_only_that_dyad(self, storage):
        for sid in ("d1-s1", "d1-s7", "d2-s3", "d11-s9"):
            storage.append_event(sid, {"type": "session_started"})
        assert storage.next_session_ordinal("d1") == 8
        assert storage.next_session_ordinal("d2") == 4
        assert storage.next_session_ordinal("brand-new") == 1


class TestSnapshots:
    def test_round_trip(self, storage):
        snapshot = {"session_id": "d1-s1", "state": "ended", "history": []}
        storage.save_snapshot(snapshot)
        assert storage.load_snapshot("d1-s1") == snapshot

    def test_rewrite_replaces(self, storage):
        storage.save_snapshot({"session_id": "d1-s1", "turn_index": 0})
        storage.save_snapshot({"session_id": "d1-s1", "turn_index": 4})
        assert storage.load_snapshot("d1-s1")["turn_index"] == 4

    def test_load_all_sorted_by_filename(self, storage):
        for sid in ("b-s1", "a-s1"):
            storage.save_snapshot({"session_id": sid})
        assert [s["session_id"] for s in storage.load_snapshots()] == ["a-s1", "b-s1"]

    def test_missing_snapshot_is_none(self, storage):
        assert storage.load_snapshot("ghost") is None


class TestProfiles:
    def test_round_trip_preserves_unicode(self, storage):
        profile = make_dyad(child_name="민아", custom_images={"풍선": "asset-1"})
        storage.save_profiles([profile])
        loaded = storage.load_profiles()
        assert len(loaded) == 1
        assert isinstance(loaded[0], DyadProfile)
        assert loaded[0].to_record() == profile.to_record()

    def test_saved_sorted_by_dyad_id(self, storage):
        storage.save_profiles([make_dyad(dyad_id="zeta"), make_dyad(dyad_id="alpha")])
        records = json.loads(storage.profiles_path.read_text(encoding="utf-8"))
        assert [r["dyad_id"] for r in records] == ["alpha", "zeta"]

    def test_no_file_means_no_profiles(self, storage):
        assert storage.load_profiles() == []


class TestLabelCache:
    def test_append_then_load(self, storage):
        rows = [
            {"category": "topic", "label": "balloon", "target_locale": "ko",
             "localized": "풍선"},
            {"category": "core", "label": "Yes", "target_locale": "ko",
             "localized": "응"},
        ]
        for row in rows:
            storage.append_label_translation(row)
        assert storage.load_label_translations() == rows

    def test_empty_cache(self, storage):
        assert storage.load_label_translations() == []


class TestMemorySink:
    def test_same_contract_as_file_storage(self):
        sink = MemorySink()
        sink.append_event("s1", {"type": "session_started"})
        sink.append_event("s1", {"type": "session_ended"})
        assert [e["type"] for e in sink.load_events("s1")] == [
            "session_started", "session_ended",
        ]
        assert sink.load_events("ghost") == []

    def test_load_returns_a_copy(self):
        sink = MemorySink()
        sink.append_event("s1", {"type": "session_started"})
        sink.load_events("s1").append({"type": "bogus"})
        assert len(sink.load_events("s1")) == 1
