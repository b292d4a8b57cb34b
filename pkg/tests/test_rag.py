"""TF-IDF store: embedding, cosine retrieval, persistence."""
import math

import pytest
from hypothesis import given, strategies as st

from dynsched.rag import Store, cosine, embed, retrieve, tokenize


def test_tokenize_lowercases_and_splits():
    assert tokenize("Nurse K cannot work, day-D1!") == [
        "nurse",
        "k",
        "cannot",
        "work",
        "day",
        "d1",
    ]


def test_embed_hand_computed_tf_idf():
    # one stored document: "nurse shift"; n_docs = 1, df(nurse) = df(shift) = 1
    store = Store()
    store.add("planning", "nurse shift", "out")
    vec = embed("nurse nurse shift", store)
    idf = math.log((1 + 1) / (1 + 1)) + 1  # = 1.0
    assert vec == pytest.approx({"nurse": 2 * idf, "shift": 1 * idf})


def test_unknown_tokens_drop_out():
    store = Store()
    store.add("planning", "nurse shift", "out")
    vec = embed("nurse robot", store)
    assert set(vec) == {"nurse"}


def test_identical_texts_cosine_one():
    store = Store()
    store.add("planning", "worker block rest hours", "out")
    v1 = embed("worker block rest hours", store)
    v2 = embed("worker block rest hours", store)
    assert cosine(v1, v2) == pytest.approx(1.0)


def test_disjoint_token_sets_cosine_zero():
    store = Store()
    store.add_many(
        [("planning", "nurse day shift", "a"), ("planning", "worker hour block", "b")]
    )
    assert cosine(embed("nurse", store), embed("worker", store)) == 0.0


def test_retrieve_prefers_shared_tokens():
    store = Store()
    ex1, ex2 = store.add_many(
        [
            ("planning", "nurse unavailable day", "plan-1"),
            ("planning", "worker block rest", "plan-2"),
        ]
    )
    hits = retrieve(store, "nurse cannot work on day D1", k=1, stage="planning")
    assert hits == [ex1]


def test_retrieve_empty_store():
    assert retrieve(Store(), "anything", k=1) == []


def test_retrieve_k_larger_than_store():
    store = Store()
    store.add_many([("planning", "alpha beta", "a"), ("planning", "beta gamma", "b")])
    hits = retrieve(store, "beta", k=10, stage="planning")
    assert len(hits) == 2


def test_zero_norm_query_returns_insertion_order():
    store = Store()
    e1, e2, e3 = store.add_many(
        [
            ("planning", "alpha", "a"),
            ("planning", "beta", "b"),
            ("planning", "gamma", "c"),
        ]
    )
    hits = retrieve(store, "zzz notinvocab", k=2, stage="planning")
    assert hits == [e1, e2]


def test_stage_filter():
    store = Store()
    store.add_many(
        [("planning", "nurse day", "p"), ("coding", "nurse day", "c")]
    )
    hits = retrieve(store, "nurse", k=5, stage="coding")
    assert [h.stage for h in hits] == ["coding"]


def test_retrieval_determinism():
    store = Store()
    store.add_many(
        [("planning", f"doc number {i} nurse", f"out{i}") for i in range(10)]
    )
    q = "nurse number"
    first = [e.id for e in retrieve(store, q, k=5, stage="planning")]
    for _ in range(5):
        assert [e.id for e in retrieve(store, q, k=5, stage="planning")] == first


def test_save_load_roundtrip(tmp_path):
    store = Store()
    store.add_many(
        [
            ("planning", "nurse unavailable day", "plan out"),
            ("coding", "worker block rest", "patch out"),
            ("dsl_doc", "hamming builtin reference", "doc text"),
        ]
    )
    path = tmp_path / "store.json"
    store.save(path)
    loaded = Store.load(path)
    assert [e.id for e in loaded.examples] == [e.id for e in store.examples]
    for q in ("nurse day", "block", "hamming", ""):
        before = [(e.id, round(store.similarity(q, e), 12)) for e in store.examples]
        after = [(e.id, round(loaded.similarity(q, e), 12)) for e in loaded.examples]
        assert before == after
        assert [e.id for e in store.retrieve(q, k=3)] == [
            e.id for e in loaded.retrieve(q, k=3)
        ]


@given(
    st.dictionaries(
        st.sampled_from(["a", "b", "c", "d"]),
        st.floats(min_value=0.01, max_value=10),
        min_size=1,
        max_size=4,
    )
)
def test_cosine_self_is_one(vec):
    assert cosine(vec, vec) == pytest.approx(1.0)


@given(
    st.dictionaries(st.sampled_from("abcd"), st.floats(0, 5), max_size=4),
    st.dictionaries(st.sampled_from("abcd"), st.floats(0, 5), max_size=4),
)
def test_cosine_symmetric_and_bounded(u, v):
    s1, s2 = cosine(u, v), cosine(v, u)
    assert s1 == pytest.approx(s2)
    assert -1e-9 <= s1 <= 1 + 1e-9


def test_store_routes_through_injected_embedder():
    class FakeEmbedder:
        def embed(self, text):
            return {"dim0": float(len(text))}

    store = Store(embedder=FakeEmbedder())
    ex = store.add("planning", "abc", "out")
    assert ex.vector == {"dim0": 3.0}
    assert embed("hello", store) == {"dim0": 5.0}
