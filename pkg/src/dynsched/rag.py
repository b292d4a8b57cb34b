"""TF-IDF embedding store with cosine retrieval for agent examples.

Replaces a neural sentence embedder so retrieval is deterministic and runs
offline; a remote embedder can be plugged in over HTTP where that is
acceptable. Vectors live over the store vocabulary: component(t) =
tf(t) * (ln((1 + n_docs) / (1 + df(t))) + 1).
"""
from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

STAGES = ("planning", "coding", "dsl_doc")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class RemoteEmbedder:
    """Optional drop-in replacement for the TF-IDF embedding: POSTs the text
    to an HTTP endpoint and expects {"vector": {token_or_dim: weight}} back.

    Construct a Store with embedder=RemoteEmbedder(...) to use it; nothing
    in the offline pipeline or the tests requires one.
    """

    def __init__(self, endpoint: str, api_key: str = ""):
        self.endpoint = endpoint
        self.api_key = api_key

    def embed(self, text: str) -> dict[str, float]:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        resp = httpx.post(self.endpoint, json={"text": text}, headers=headers, timeout=60)
        resp.raise_for_status()
        return {str(k): float(v) for k, v in resp.json()["vector"].items()}


@dataclass
class RetrievalExample:
    id: str
    stage: str
    input_text: str
    output_text: str
    vector: dict[str, float] = field(default_factory=dict)


def cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b.get(t, 0.0) for t, w in a.items())
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


class Store:
    """Ordered collection of (input, output) examples with TF-IDF vectors.

    Reads are lock-free; insertions rebuild the vocabulary and every stored
    vector (store sizes are tens of documents) under an exclusive lock.
    """

    VERSION = 1

    def __init__(self, embedder=None):
        self.examples: list[RetrievalExample] = []
        self.doc_freq: dict[str, int] = {}
        self.embedder = embedder  # optional remote embedder
        self._counter = 0
        self._lock = threading.Lock()

    def add(self, stage: str, input_text: str, output_text: str, id: Optional[str] = None) -> RetrievalExample:
        return self.add_many([(stage, input_text, output_text, id)])[0]

    def add_many(self, items) -> list[RetrievalExample]:
        with self._lock:
            added = []
            for item in items:
                stage, input_text, output_text = item[0], item[1], item[2]
                ex_id = item[3] if len(item) > 3 and item[3] else None
                if stage not in STAGES:
                    raise ValueError(f"unknown stage {stage!r}")
                self._counter += 1
                if ex_id is None:
                    ex_id = f"ex{self._counter:04d}"
                added.append(RetrievalExample(ex_id, stage, input_text, output_text))
            self.examples.extend(added)
            self._rebuild()
            return added

    def _rebuild(self):
        self.doc_freq = {}
        for ex in self.examples:
            for tok in set(tokenize(ex.input_text)):
                self.doc_freq[tok] = self.doc_freq.get(tok, 0) + 1
        for ex in self.examples:
            ex.vector = self.embed(ex.input_text)

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token, 0)
        return math.log((1 + len(self.examples)) / (1 + df)) + 1.0

    def embed(self, text: str) -> dict[str, float]:
        """TF-IDF vector over the store vocabulary; unknown tokens drop out.

        With a remote embedder configured the vector comes from it instead.
        """
        if self.embedder is not None:
            return self.embedder.embed(text)
        counts: dict[str, int] = {}
        for tok in tokenize(text):
            counts[tok] = counts.get(tok, 0) + 1
        return {
            tok: tf * self.idf(tok)
            for tok, tf in counts.items()
            if tok in self.doc_freq
        }

    def retrieve(self, query: str, k: int = 1, stage: Optional[str] = None) -> list[RetrievalExample]:
        """Up to k examples by descending cosine; ties keep insertion order."""
        if k <= 0:
            raise ValueError("k must be positive")
        qvec = self.embed(query)
        pool = [ex for ex in self.examples if stage is None or ex.stage == stage]
        scored = [(cosine(qvec, ex.vector), i, ex) for i, ex in enumerate(pool)]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [ex for _, _, ex in scored[:k]]

    def similarity(self, query: str, example: RetrievalExample) -> float:
        return cosine(self.embed(query), example.vector)

    # --- persistence ---

    def save(self, path) -> None:
        payload = {
            "version": self.VERSION,
            "vocabulary": self.doc_freq,
            "examples": [
                {
                    "id": ex.id,
                    "stage": ex.stage,
                    "input_text": ex.input_text,
                    "output_text": ex.output_text,
                }
                for ex in self.examples
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "Store":
        payload = json.loads(Path(path).read_text())
        if payload.get("version") != cls.VERSION:
            raise ValueError(f"unsupported store version {payload.get('version')!r}")
        store = cls()
        store.add_many(
            (ex["stage"], ex["input_text"], ex["output_text"], ex["id"])
            for ex in payload["examples"]
        )
        return store


def embed(text: str, store: Store) -> dict[str, float]:
    """Module-level alias matching the operation signature."""
    return store.embed(text)


def retrieve(store: Store, query: str, k: int = 1, stage: Optional[str] = None):
    return store.retrieve(query, k=k, stage=stage)
