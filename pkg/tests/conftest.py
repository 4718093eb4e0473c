"""Shared fixtures: small deterministic corpora and provider setups."""

from __future__ import annotations

import numpy as np
import pytest

from namelink.blocking import assemble_block, build_name_index, split_block
from namelink.embeddings import (
    EmbeddingStore,
    HashingNameEmbedder,
    Providers,
    StoreProvider,
)
from namelink.records import make_record
from namelink.synth import SynthSpec, build_text_store, generate_corpus


@pytest.fixture
def tiny_records():
    return [
        make_record(
            "r/BingLi1",
            "Graph partitioning at scale.",
            ["Bing Li 0001", "Wei Chen", "Lei Wang"],
            source="J. Graph Alg.",
            year=2011,
        ),
        make_record(
            "r/BingLi2",
            "Streaming graph cuts.",
            ["Bing Li 0002", "Wei Chen"],
            source="Proc. Graph Conf.",
            year=2012,
        ),
        make_record(
            "r/BingLi3",
            "Sparse matrix ordering.",
            ["Bing Li 0001", "A. Kumar"],
            source="J. Numer. Softw.",
            year=2013,
        ),
        make_record(
            "r/Solo",
            "A note on name ambiguity.",
            ["B Li"],
            source="Letters",
            year=2014,
        ),
    ]


@pytest.fixture
def synth_block_setup():
    """A trained-size synthetic block with providers, small and separable."""
    spec = SynthSpec(authors=4, records_per_author=12, overlap=0.0, seed=11)
    records, truth = generate_corpus(spec)
    index = build_name_index(records)
    block = assemble_block("T Shared", records, index)
    split = split_block(block, seed=2)
    store = build_text_store(records, dim=32, seed=4)
    providers = Providers(names=HashingNameEmbedder(), texts=StoreProvider(store))
    return {
        "spec": spec,
        "records": records,
        "truth": truth,
        "index": index,
        "block": block,
        "split": split,
        "providers": providers,
    }


class RandomProvider:
    """Random-but-fixed vectors for arbitrary strings."""

    def __init__(self, dim: int, salt: str):
        self.dim = dim
        self.salt = salt
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, text: str) -> np.ndarray:
        if text not in self._cache:
            import hashlib

            digest = hashlib.blake2b(
                f"{self.salt}:{text}".encode(), digest_size=4
            ).digest()
            seed = int.from_bytes(digest, "little")
            vec = np.random.default_rng(seed).standard_normal(self.dim)
            self._cache[text] = vec
        return self._cache[text]


@pytest.fixture
def random_providers():
    return Providers(names=RandomProvider(8, "n"), texts=RandomProvider(12, "t"))


@pytest.fixture
def query_providers():
    """Real name embedder (full 400-wide x1) with 12-dim random text vectors."""
    return Providers(names=HashingNameEmbedder(), texts=RandomProvider(12, "t"))
