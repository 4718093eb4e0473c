"""
Measuring how ambiguous a corpus actually is
============================================

Corpus-wide counts, per-block ambiguity statistics, and the frequency
histograms that show how many names are shared between identities.
"""

from namelink.records import make_record
from namelink.stats import (
    compute_block_stats,
    corpus_counts,
    histogram_as_text,
    name_frequency_histogram,
)
from namelink.synth import SynthSpec, generate_corpus

# A mid-sized synthetic corpus with some blending between authors.
spec = SynthSpec(authors=12, records_per_author=10, overlap=0.3, seed=3)
records, _ = generate_corpus(spec)

counts = corpus_counts(records)
print("corpus:", counts.records, "records,", counts.authors, "authors,",
      counts.names, "names,", counts.variates, "variates")

# Per-block numbers for the shared variate: unique target authors,
# records, co-authors, written forms, and how many forms are claimed by
# two (or three) distinct identities.
stats = compute_block_stats(
    [r for r in records if any(a.last == "Shared" for a in r.authors)],
    "T Shared",
)
print(f"\nblock 'T Shared': uta={stats.uta} rcd={stats.rcd} uca={stats.uca}",
      f"uan={stats.uan} r2a={stats.r2a} r3a={stats.r3a}")

tables = name_frequency_histogram(records)
print()
print(histogram_as_text(tables.authors_per_name, "authors_per_name"))
print()
print(histogram_as_text(tables.records_per_name, "records_per_name"))

# Hand-built corner case: the same written form used by three people.
clash = [
    make_record(f"c/{i}", f"Paper {i}.", [f"Yi Wang 000{i}", f"Co{i} Author"])
    for i in range(1, 4)
]
print()
print("three suffixed identities behind one display name:")
print(histogram_as_text(name_frequency_histogram(clash).authors_per_name,
                        "authors_per_name"))
