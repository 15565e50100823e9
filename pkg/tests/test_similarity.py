import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from turntalk.errors import DimensionMismatch, UnknownCollection, ZeroVector
from turntalk.similarity import SimilarityStore, cosine, reference_top_k


class TestCosine:
    def test_worked_value(self):
        # (1*4 + 2*5 + 3*6) / (sqrt(14) * sqrt(77)) = 32 / sqrt(1078)
        got = cosine([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        assert abs(got - 32.0 / math.sqrt(1078.0)) < 1e-12
        assert abs(got - 0.974631846) < 1e-9

    def test_identical_vectors(self):
        assert abs(cosine([0.3, 0.4], [0.3, 0.4]) - 1.0) < 1e-12

    def test_orthogonal(self):
        assert abs(cosine([1.0, 0.0], [0.0, 1.0])) < 1e-12

    def test_opposite(self):
        assert abs(cosine([1.0, 2.0], [-1.0, -2.0]) + 1.0) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ZeroVector):
            cosine([1.0, 1.0], [0.0, 0.0])

    def test_scale_invariance(self):
        a, b = [0.2, 0.9, 0.1], [0.5, 0.3, 0.8]
        scaled = [x * 37.5 for x in a]
        assert abs(cosine(a, b) - cosine(scaled, b)) < 1e-12


class TestStoreBasics:
    def test_add_and_query(self):
        store = SimilarityStore()
        store.add("c", "e1", "red train", [1.0, 0.0], {"k": 1})
        store.add("c", "e2", "blue boat", [0.0, 1.0], {"k": 2})
        matches = store.top_k("c", [1.0, 0.1], k=2)
        assert [m.entry_id for m in matches] == ["e1", "e2"]
        assert matches[0].payload == {"k": 1}
        assert matches[0].text == "red train"

    def test_unknown_collection(self):
        store = SimilarityStore()
        with pytest.raises(UnknownCollection):
            store.top_k("missing", [1.0, 0.0], k=1)

    def test_dimension_fixed_by_first_entry(self):
        store = SimilarityStore()
        store.add("c", "e1", "a", [1.0, 0.0, 0.0])
        with pytest.raises(DimensionMismatch):
            store.add("c", "e2", "b", [1.0, 0.0])
        with pytest.raises(DimensionMismatch):
            store.top_k("c", [1.0, 0.0], k=1)

    def test_zero_vector_rejected_on_add(self):
        store = SimilarityStore()
        with pytest.raises(ZeroVector):
            store.add("c", "e1", "a", [0.0, 0.0])

    def test_k_larger_than_collection(self):
        store = SimilarityStore()
        store.add("c", "e1", "a", [1.0, 0.0])
        assert len(store.top_k("c", [1.0, 0.0], k=10)) == 1

    def test_tie_break_by_insertion(self):
        store = SimilarityStore()
        # Same direction, so identical cosine; earlier insert wins.
        store.add("c", "late-alpha", "a", [2.0, 0.0])
        store.add("c", "early-omega", "b", [4.0, 0.0])
        matches = store.top_k("c", [1.0, 0.0], k=2)
        assert [m.entry_id for m in matches] == ["late-alpha", "early-omega"]

    def test_overwrite_keeps_original_position(self):
        store = SimilarityStore()
        store.add("c", "e1", "first", [1.0, 0.0])
        store.add("c", "e2", "second", [1.0, 0.0])
        store.add("c", "e1", "first-v2", [1.0, 0.0], {"v": 2})
        matches = store.top_k("c", [1.0, 0.0], k=2)
        assert [m.entry_id for m in matches] == ["e1", "e2"]
        assert matches[0].text == "first-v2"
        assert matches[0].payload == {"v": 2}
        assert store.size("c") == 2

    def test_entries_in_insertion_order(self):
        store = SimilarityStore()
        for i in range(5):
            store.add("c", f"e{i}", f"t{i}", [1.0, float(i)])
        assert [e.entry_id for e in store.entries("c")] == [f"e{i}" for i in range(5)]


class TestPersistence:
    def test_jsonl_round_trip(self, tmp_path):
        store = SimilarityStore()
        store.add("c", "e1", "우유", [0.6, 0.8], {"target_locale": "ko"})
        store.add("c", "e2", "milk", [0.8, 0.6], {"target_locale": "en"})
        path = tmp_path / "c.jsonl"
        store.export_jsonl("c", path)

        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["text"] == "우유"

        fresh = SimilarityStore()
        fresh.import_jsonl("c", path)
        a = store.top_k("c", [1.0, 1.0], k=2)
        b = fresh.top_k("c", [1.0, 1.0], k=2)
        assert [(m.entry_id, m.text, m.payload) for m in a] == [
            (m.entry_id, m.text, m.payload) for m in b
        ]
        for ma, mb in zip(a, b):
            assert abs(ma.score - mb.score) < 1e-12

    def test_import_preserves_order_for_ties(self, tmp_path):
        store = SimilarityStore()
        store.add("c", "x", "a", [1.0, 0.0])
        store.add("c", "y", "b", [1.0, 0.0])
        path = tmp_path / "c.jsonl"
        store.export_jsonl("c", path)
        fresh = SimilarityStore()
        fresh.import_jsonl("c", path)
        assert [m.entry_id for m in fresh.top_k("c", [1.0, 0.0], k=2)] == ["x", "y"]


def _store_rows(rows):
    store = SimilarityStore()
    for i, (entry_id, vec) in enumerate(rows):
        store.add("c", entry_id, f"text-{i}", vec)
    return store


class TestAgainstReference:
    def test_small_handmade(self):
        rows = [("a", [1.0, 0.0]), ("b", [0.7, 0.7]), ("c", [0.0, 1.0])]
        store = _store_rows(rows)
        got = [m.entry_id for m in store.top_k("c", [1.0, 0.2], k=3)]
        want = [r[0] for r in reference_top_k(rows, [1.0, 0.2], 3)]
        assert got == want

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.lists(
                st.floats(min_value=-5, max_value=5, allow_nan=False),
                min_size=4,
                max_size=4,
            ).filter(lambda v: any(abs(x) > 1e-6 for x in v)),
            min_size=1,
            max_size=40,
        ),
        st.integers(min_value=1, max_value=10),
        st.integers(min_value=0, max_value=2**31),
    )
    def test_matches_reference(self, vectors, k, qseed):
        rng = random.Random(qseed)
        query = [rng.uniform(-1, 1) for _ in range(4)]
        while not any(abs(x) > 1e-6 for x in query):
            query = [rng.uniform(-1, 1) for _ in range(4)]
        rows = [(f"e{i}", v) for i, v in enumerate(vectors)]
        store = _store_rows(rows)
        got = store.top_k("c", query, k=k)
        want = reference_top_k(rows, query, k)
        assert [m.entry_id for m in got] == [r[0] for r in want]
        for m, (_, score) in zip(got, want):
            assert abs(m.score - score) < 1e-9
