"""Corpus accounting: per-subset counts and sentence-length histograms.

Token counts are reported both with and without whitespace tokens, since
different tools count differently; the histogram buckets sentence
lengths (in non-whitespace tokens) and excludes extreme outliers from
the bins while reporting how many were dropped.
"""

from legal_sbd.corpus import (
    corpus_stats,
    histograms_to_csv,
    length_histogram,
    stats_to_csv,
)
from legal_sbd.synthetic import make_corpus

docs = (
    make_corpus(30, seed=5, language="fr")
    + make_corpus(20, seed=6, language="de", doc_type="law", id_prefix="de")
)

print("per-(language, type) statistics:\n")
print(stats_to_csv(corpus_stats(docs)))

hists = length_histogram(docs, bin_size=5, cutoff=101)
for hist in hists:
    print(
        f"{hist.doc_type}: {hist.included} sentences binned, "
        f"{hist.excluded} longer than {hist.cutoff} tokens excluded"
    )

print("\nhistogram CSV (plot with any external tool):\n")
print(histograms_to_csv(hists))
