"""Shared helpers: deterministic random streams and atomic file writes."""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

import numpy as np


def derived_rng(seed: int, *tokens: str | int) -> np.random.Generator:
    """Return a random generator keyed by ``seed`` plus arbitrary tokens.

    String tokens are hashed with blake2b so the resulting stream is stable
    across platforms and interpreter runs (unlike ``hash()``).  Use this
    whenever a component needs its own reproducible stream, e.g. one per
    record or per author, so that iteration order elsewhere cannot change
    the draws.
    """
    entropy: list[int] = [seed & 0xFFFFFFFFFFFFFFFF]
    for token in tokens:
        if isinstance(token, int):
            entropy.append(token & 0xFFFFFFFFFFFFFFFF)
        else:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            entropy.append(int.from_bytes(digest, "little"))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temp file in the same directory.

    The final ``os.replace`` is atomic on POSIX, so readers never observe a
    partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
