"""
Name hashing and persistent embedding stores
============================================
"""

import tempfile
from pathlib import Path

import numpy as np

from namelink.embeddings import (
    EmbeddingStore,
    HashingNameEmbedder,
    Providers,
    StoreProvider,
    assemble_input,
    builtin_char_embedder,
    load_store,
    save_store,
)

# The built-in name embedder hashes character 2- and 3-grams into 200
# signed buckets.  No training, no vocabulary file; similar spellings
# share mass, and the output is always unit length.
embedder = HashingNameEmbedder()
for name in ("Lei Wang", "L Wang", "Wei Chen"):
    vec = embedder.embed(name)
    print(f"{name!r:12} dim={vec.shape[0]} norm={np.linalg.norm(vec):.6f}")

a, b, c = (builtin_char_embedder(n) for n in ("Lei Wang", "L Wang", "Wei Chen"))
print(f"cos(Lei Wang, L Wang)  = {float(a @ b):+.3f}   <- same surname")
print(f"cos(Lei Wang, Wei Chen) = {float(a @ c):+.3f}   <- different")

# Contextual vectors come from outside the package and travel through a
# store file: a flat key -> float32 vector map with a canonical byte
# layout, so writes are reproducible.
store = EmbeddingStore(dim=4, provenance="contextual")
rng = np.random.default_rng(0)
for key in ("Graph partitioning at scale.", "J. Graph Alg."):
    store.put(key, rng.standard_normal(4).astype(np.float32))

path = Path(tempfile.mkdtemp(prefix="namelink-demo-")) / "texts.wemb"
save_store(path, store)
again = load_store(path)
print(f"\nstore round trip: {len(again)} keys, dim {again.dim},",
      f"bytes on disk {path.stat().st_size}")

# assemble_input builds the two classifier inputs for one sample: the
# target plus the averaged co-author pair on the name side, the averaged
# title and venue on the text side.
providers = Providers(names=embedder, texts=StoreProvider(again))
pair = assemble_input(
    "Lei", "Wei Chen", "Bing Li",
    "Graph partitioning at scale.", "J. Graph Alg.", providers,
)
print(f"x1 width {pair.x1.shape[0]} (target + averaged co-authors)")
print(f"x2 width {pair.x2.shape[0]} (averaged title and venue)")
