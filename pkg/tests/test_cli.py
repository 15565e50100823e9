"""Command line behaviour through click's test runner.

Session data is staged by driving a Runtime against the same storage
directory the commands point at, so every command exercises the real boot
path: profile loading, collection import, and log recovery.
"""

from __future__ import annotations

import csv
import json

import pytest
from click.testing import CliRunner

from turntalk.cli import main
from turntalk.service.config import load_config
from turntalk.service.runtime import Runtime
from turntalk.similarity import (
    EXAMPLE_TRANSLATIONS,
    LABEL_TRANSLATIONS,
    SYMBOL_CAPTIONS,
)

COLLECTIONS = (EXAMPLE_TRANSLATIONS, LABEL_TRANSLATIONS, SYMBOL_CAPTIONS)

runner = CliRunner()


def make_runtime(storage) -> Runtime:
    return Runtime(load_config(storage_dir=str(storage)))


def profile_record(dyad_id: str, child_name: str) -> dict:
    return {
        "dyad_id": dyad_id,
        "parent_role": "mother",
        "child_name": child_name,
        "child_age": 7,
        "child_characteristics": "communicates with short phrases",
        "interests": ["balloons", "drones", "trains"],
    }


def run_session(runtime: Runtime, dyad_id: str, cards: int = 2) -> str:
    """One complete exchange, ended, so snapshots land on disk."""
    session = runtime.start_session(dyad_id, {"kind": "recall"})
    sid = session.session_id
    runtime.submit_utterance_text(sid, "We saw a big balloon at the park.")
    runtime.pass_turn(sid, "parent_turn", "ui_button")
    live = runtime.engine.get_session(sid)
    for card in live.current_deck.cards[:cards]:
        runtime.select_card(sid, card.card_id)
    runtime.pass_turn(sid, "child_turn", "ui_button")
    runtime.end_session(sid)
    return sid


@pytest.fixture
def storage(tmp_path):
    return tmp_path / "store"


@pytest.fixture
def populated(storage):
    """Two dyads, one ended session each; returns (storage, session_ids)."""
    runtime = make_runtime(storage)
    runtime.create_profile(profile_record("fam-1", "Mina"))
    runtime.create_profile(profile_record("fam-2", "Jun"))
    sids = [run_session(runtime, "fam-1"), run_session(runtime, "fam-2")]
    return storage, sids


class TestHelp:
    def test_lists_all_commands(self):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("serve", "seed", "reembed", "report",
                        "export-transcript", "caption-symbols"):
            assert command in result.output


class TestSeed:
    def test_reports_every_collection(self, storage):
        result = runner.invoke(main, ["seed", "--storage", str(storage)])
        assert result.exit_code == 0, result.output
        counts = {}
        for line in result.output.strip().splitlines():
            name, rest = line.split(": ")
            counts[name] = int(rest.split()[0])
        assert set(counts) == set(COLLECTIONS)
        assert all(count > 0 for count in counts.values())

    def test_writes_collection_files(self, storage):
        runner.invoke(main, ["seed", "--storage", str(storage)])
        for name in COLLECTIONS:
            path = storage / "collections" / f"{name}.jsonl"
            assert path.exists()
            assert path.stat().st_size > 0

    def test_reseeding_is_stable(self, storage):
        first = runner.invoke(main, ["seed", "--storage", str(storage)])
        second = runner.invoke(main, ["seed", "--storage", str(storage)])
        assert first.output == second.output


class TestReembed:
    def test_counts_match_seeded_sizes(self, storage):
        seeded = runner.invoke(main, ["seed", "--storage", str(storage)])
        result = runner.invoke(main, ["reembed", "--storage", str(storage)])
        assert result.exit_code == 0, result.output
        seeded_counts = {
            line.split(":")[0]: int(line.split(": ")[1].split()[0])
            for line in seeded.output.strip().splitlines()
        }
        for line in result.output.strip().splitlines():
            name, rest = line.split(": ")
            assert "re-embedded" in rest
            assert int(rest.split()[0]) == seeded_counts[name]


class TestReport:
    def test_empty_storage_fails_cleanly(self, storage):
        out = storage.parent / "report-out"
        result = runner.invoke(
            main, ["report", "--storage", str(storage), "--out", str(out)]
        )
        assert result.exit_code != 0
        assert "Error" in result.output

    def test_writes_csvs_and_figures(self, populated, tmp_path):
        storage, sids = populated
        out = tmp_path / "report"
        result = runner.invoke(
            main, ["report", "--storage", str(storage), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output

        with (out / "sessions.csv").open(newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert sorted(r["session_id"] for r in rows) == sorted(sids)
        assert all(int(r["exchanges"]) == 1 for r in rows)

        with (out / "card_usage.csv").open(newline="", encoding="utf-8") as handle:
            usage = list(csv.reader(handle))
        assert usage[0] == ["dyad_id", "topic", "action", "emotion", "core", "total"]
        assert usage[-1][0] == "TOTAL"
        body = usage[1:-1]
        assert sorted(r[0] for r in body) == ["fam-1", "fam-2"]
        for row in body + [usage[-1]]:
            assert sum(int(v) for v in row[1:5]) == int(row[5])

        for figure in ("card_usage.png", "session_metrics.png"):
            assert (out / figure).stat().st_size > 0

    def test_overlap_written_when_two_dyads_share_an_ordinal(self, populated, tmp_path):
        storage, _ = populated
        out = tmp_path / "report"
        result = runner.invoke(
            main, ["report", "--storage", str(storage), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        with (out / "overlap.csv").open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["ordinal", "dyads", "mean_overlap"]
        assert len(rows) >= 2
        assert rows[1][0] == "1" and rows[1][1] == "2"
        assert 0.0 <= float(rows[1][2]) <= 1.0
        assert (out / "overlap.png").stat().st_size > 0

    def test_overlap_figure_skipped_for_single_dyad(self, storage, tmp_path):
        runtime = make_runtime(storage)
        runtime.create_profile(profile_record("solo-1", "Mina"))
        run_session(runtime, "solo-1")
        out = tmp_path / "report"
        result = runner.invoke(
            main, ["report", "--storage", str(storage), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        with (out / "overlap.csv").open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows == [["ordinal", "dyads", "mean_overlap"]]
        assert not (out / "overlap.png").exists()
        assert (out / "card_usage.png").exists()

    def test_summary_lines(self, populated, tmp_path):
        storage, _ = populated
        out = tmp_path / "report"
        result = runner.invoke(
            main, ["report", "--storage", str(storage), "--out", str(out)]
        )
        assert "sessions: 2" in result.output
        assert "mean exchanges: 1.00" in result.output
        assert "cards selected: 4" in result.output
        assert result.output.count("wrote ") >= 5

    def test_selected_basis_accepted(self, populated, tmp_path):
        storage, _ = populated
        out = tmp_path / "report"
        result = runner.invoke(
            main,
            ["report", "--storage", str(storage), "--out", str(out),
             "--basis", "selected", "--top-k", "5"],
        )
        assert result.exit_code == 0, result.output

    def test_unknown_basis_rejected(self, populated, tmp_path):
        storage, _ = populated
        result = runner.invoke(
            main,
            ["report", "--storage", str(storage), "--out", str(tmp_path / "r"),
             "--basis", "imagined"],
        )
        assert result.exit_code == 2


class TestExportTranscript:
    def test_prints_to_stdout(self, populated):
        storage, sids = populated
        result = runner.invoke(
            main, ["export-transcript", "--storage", str(storage), sids[0]]
        )
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0] == f"Session {sids[0]} [fam-1]"
        assert lines[1] == "Topic: recall"
        assert any(line.startswith("P1: We saw a big balloon") for line in lines)
        assert any(line.startswith("C1: ") for line in lines)
        assert "Exchanges: 1" in lines
        assert "Stars: 1" in lines

    def test_guides_flag_adds_coaching_lines(self, populated):
        storage, sids = populated
        plain = runner.invoke(
            main, ["export-transcript", "--storage", str(storage), sids[0]]
        )
        guided = runner.invoke(
            main, ["export-transcript", "--storage", str(storage), sids[0], "--guides"]
        )
        assert not any(l.startswith("  [") for l in plain.output.splitlines())
        assert any(l.startswith("  [") for l in guided.output.splitlines())

    def test_out_writes_identical_file(self, populated, tmp_path):
        storage, sids = populated
        stdout = runner.invoke(
            main, ["export-transcript", "--storage", str(storage), sids[0]]
        )
        target = tmp_path / "transcript.txt"
        result = runner.invoke(
            main,
            ["export-transcript", "--storage", str(storage), sids[0],
             "--out", str(target)],
        )
        assert result.exit_code == 0
        assert f"wrote {target}" in result.output
        assert target.read_text(encoding="utf-8") == stdout.output

    def test_unknown_session_errors(self, storage):
        make_runtime(storage)
        result = runner.invoke(
            main, ["export-transcript", "--storage", str(storage), "ghost-s1"]
        )
        assert result.exit_code != 0
        assert "Error" in result.output


class TestCaptionSymbols:
    def test_captions_and_indexes(self, storage, tmp_path):
        labels = tmp_path / "labels.jsonl"
        labels.write_text(
            json.dumps({"symbol_id": "sym-balloon", "label": "balloon"}) + "\n"
            + "\n"
            + json.dumps({"symbol_id": "sym-train", "label": "train"}) + "\n",
            encoding="utf-8",
        )
        result = runner.invoke(
            main, ["caption-symbols", "--storage", str(storage), str(labels)]
        )
        assert result.exit_code == 0, result.output
        assert "captioned and indexed 2 symbols" in result.output

        exported = storage / "collections" / f"{SYMBOL_CAPTIONS}.jsonl"
        rows = [
            json.loads(line)
            for line in exported.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        by_id = {row["id"]: row for row in rows}
        assert by_id["sym-balloon"]["payload"]["label"] == "balloon"
        assert "balloon" in by_id["sym-balloon"]["payload"]["caption"]
        assert "sym-train" in by_id

    def test_reload_sees_captioned_symbols(self, storage, tmp_path):
        labels = tmp_path / "labels.jsonl"
        labels.write_text(
            json.dumps({"symbol_id": "sym-rocket", "label": "rocket"}) + "\n",
            encoding="utf-8",
        )
        runner.invoke(main, ["caption-symbols", "--storage", str(storage), str(labels)])
        runtime = make_runtime(storage)
        entry_ids = {e.entry_id for e in runtime.store.entries(SYMBOL_CAPTIONS)}
        assert "sym-rocket" in entry_ids

    def test_malformed_row_reports_line(self, storage, tmp_path):
        labels = tmp_path / "labels.jsonl"
        labels.write_text(json.dumps({"symbol_id": "sym-x"}) + "\n", encoding="utf-8")
        result = runner.invoke(
            main, ["caption-symbols", "--storage", str(storage), str(labels)]
        )
        assert result.exit_code != 0
        assert "line 1" in result.output

    def test_missing_file_rejected(self, storage, tmp_path):
        result = runner.invoke(
            main,
            ["caption-symbols", "--storage", str(storage), str(tmp_path / "nope.jsonl")],
        )
        assert result.exit_code == 2
