"""Embedding stores, the builtin character name embedder, and classifier
input assembly.

Two embedding roles exist: name vectors (length 200, produced by a
character-level model or the builtin hashing embedder) and contextual text
vectors for titles and venue strings (store-defined width, typically from a
sentence encoder run offline).  Both can be served from the same binary
store format, keyed by the exact string.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol

import numpy as np

from .util import atomic_write_bytes

#: Width of name vectors; inputs pair two of these per sample.
CHAR_DIM = 200

_STORE_MAGIC = b"WEMB"
_STORE_VERSION = 1

_PROVENANCES = ("charlevel", "contextual")


class MissingEmbedding(LookupError):
    """A required key is absent from an embedding store."""

    def __init__(self, key: str):
        super().__init__(f"no embedding stored for key {key!r}")
        self.key = key


class StoreFormatError(Exception):
    """An embedding store file failed validation."""


def normalize_key(text: str) -> str:
    """Canonical store key: whitespace collapsed, otherwise verbatim."""
    return " ".join(text.split())


class VectorProvider(Protocol):
    """Anything that maps a string to a fixed-width vector."""

    dim: int

    def embed(self, text: str) -> np.ndarray: ...


@dataclass
class EmbeddingStore:
    """In-memory key -> float32 vector table with a declared width."""

    dim: int
    provenance: str = "contextual"
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"store dimension must be positive, got {self.dim}")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def put(self, key: str, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise ValueError(
                f"vector for {key!r} has shape {vec.shape}, expected ({self.dim},)"
            )
        vec = vec.copy()
        vec.setflags(write=False)
        self.entries[normalize_key(key)] = vec

    def get(self, key: str) -> np.ndarray | None:
        return self.entries.get(key)


def save_store(path: str | Path, store: EmbeddingStore) -> None:
    """Write a store to disk; keys are sorted so output is canonical."""
    parts = [
        _STORE_MAGIC,
        struct.pack("<HIQ", _STORE_VERSION, store.dim, len(store.entries)),
    ]
    for key in sorted(store.entries):
        encoded = key.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(store.entries[key].astype("<f4", copy=False).tobytes())
    atomic_write_bytes(path, b"".join(parts))


def load_store(path: str | Path, provenance: str = "contextual") -> EmbeddingStore:
    data = Path(path).read_bytes()
    if len(data) < 18 or data[:4] != _STORE_MAGIC:
        raise StoreFormatError(f"{path}: not an embedding store file")
    version, dim, count = struct.unpack_from("<HIQ", data, 4)
    if version != _STORE_VERSION:
        raise StoreFormatError(f"{path}: unsupported store version {version}")
    if dim < 1:
        raise StoreFormatError(f"{path}: invalid dimension {dim}")
    store = EmbeddingStore(dim=dim, provenance=provenance)
    offset = 18
    vec_bytes = 4 * dim
    for i in range(count):
        if offset + 4 > len(data):
            raise StoreFormatError(f"{path}: truncated at entry {i}")
        (key_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if key_len > 1 << 20:
            raise StoreFormatError(f"{path}: unreasonable key length {key_len}")
        if offset + key_len + vec_bytes > len(data):
            raise StoreFormatError(f"{path}: truncated at entry {i}")
        key = data[offset : offset + key_len].decode("utf-8")
        offset += key_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        vec.setflags(write=False)
        offset += vec_bytes
        store.entries[key] = vec
    if offset != len(data):
        raise StoreFormatError(f"{path}: trailing bytes after {count} entries")
    return store


# ---------------------------------------------------------------------------
# Builtin name embedder
# ---------------------------------------------------------------------------

class HashingNameEmbedder:
    """Deterministic character n-gram embedding for author names.

    Lowercased names are padded with boundary markers and their 2- and
    3-gram multiset is hashed into ``CHAR_DIM`` signed buckets, then
    L2-normalized.  The padding guarantees even one-character names yield
    at least three grams, so every non-empty name maps to a unit vector.
    A pure function of its input: no corpus, no fitting, no state beyond a
    result cache.
    """

    dim = CHAR_DIM

    def __init__(self) -> None:
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, name: str) -> np.ndarray:
        key = " ".join(name.split()).lower()
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        vec = np.zeros(CHAR_DIM, dtype=np.float64)
        if key:
            padded = f"\x02{key}\x03"
            for size in (2, 3):
                for start in range(len(padded) - size + 1):
                    gram = padded[start : start + size]
                    digest = hashlib.blake2b(
                        gram.encode("utf-8"), digest_size=8
                    ).digest()
                    value = int.from_bytes(digest, "little")
                    sign = 1.0 if value & (1 << 63) else -1.0
                    vec[value % CHAR_DIM] += sign
            norm = float(np.linalg.norm(vec))
            if norm > 0.0:
                vec /= norm
            else:
                # signed counts cancelled in every bucket (pathological);
                # fall back to a single indicator bucket
                digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
                vec[int.from_bytes(digest, "little") % CHAR_DIM] = 1.0
        vec.setflags(write=False)
        self._cache[key] = vec
        return vec


_DEFAULT_NAME_EMBEDDER = HashingNameEmbedder()


def builtin_char_embedder(name: str) -> np.ndarray:
    """Module-level handle on a shared :class:`HashingNameEmbedder`."""
    return _DEFAULT_NAME_EMBEDDER.embed(name)


# ---------------------------------------------------------------------------
# Store-backed providers and input assembly
# ---------------------------------------------------------------------------

@dataclass
class StoreProvider:
    """Serves vectors from a store; missing keys are an error, the empty
    string is the all-zero vector (used for placeholder co-authors)."""

    store: EmbeddingStore

    @property
    def dim(self) -> int:
        return self.store.dim

    def embed(self, text: str) -> np.ndarray:
        key = normalize_key(text)
        if not key:
            return np.zeros(self.store.dim, dtype=np.float32)
        vec = self.store.get(key)
        if vec is None:
            raise MissingEmbedding(key)
        return vec


def embed_name(provider: VectorProvider, name: str) -> np.ndarray:
    """Name vector for one author name string."""
    if not normalize_key(name):
        return np.zeros(provider.dim, dtype=np.float64)
    return provider.embed(name)


def embed_text(provider: VectorProvider, text: str) -> np.ndarray:
    """Contextual vector for a title or venue string."""
    if not normalize_key(text):
        return np.zeros(provider.dim, dtype=np.float32)
    return provider.embed(text)


@dataclass(frozen=True)
class Providers:
    """The two embedding roles used to build classifier inputs."""

    names: VectorProvider
    texts: VectorProvider


@dataclass(frozen=True)
class InputPair:
    """Assembled classifier input: name branch and context branch."""

    x1: np.ndarray
    x2: np.ndarray


def assemble_input(
    target_first: str,
    coauthor_p: str,
    coauthor_j: str,
    title: str,
    source: str,
    providers: Providers,
) -> InputPair:
    """Build one classifier input.

    The name branch concatenates the target's first-name vector with the
    mean of the two co-author name vectors; the context branch is the mean
    of the title and venue vectors.  Co-author slots may repeat or be empty;
    empty strings contribute zero vectors.
    """
    target = np.asarray(embed_name(providers.names, target_first), dtype=np.float64)
    p_vec = np.asarray(embed_name(providers.names, coauthor_p), dtype=np.float64)
    j_vec = np.asarray(embed_name(providers.names, coauthor_j), dtype=np.float64)
    x1 = np.concatenate([target, 0.5 * (p_vec + j_vec)])
    title_vec = np.asarray(embed_text(providers.texts, title), dtype=np.float64)
    source_vec = np.asarray(embed_text(providers.texts, source), dtype=np.float64)
    x2 = 0.5 * (title_vec + source_vec)
    x1.setflags(write=False)
    x2.setflags(write=False)
    return InputPair(x1=x1, x2=x2)
