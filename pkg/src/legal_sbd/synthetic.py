"""Deterministic synthetic corpora for tests, demos, and benchmarks.

Documents are built from a small pseudo-French vocabulary.  Every
sentence starts with a capitalized word and ends with a terminator
followed by whitespace and the next sentence's uppercase first letter,
which makes the boundary pattern perfectly learnable.

With ``abbreviation_rate > 0`` sentences additionally carry interior
abbreviation traps ("art. 12", "Sr(a). Ministro") whose periods look like
sentence ends to naive punctuation rules but are distinguishable from
real boundaries by their context (a lowercase abbreviation word or a
closing bracket on the left, a digit on the right).
"""

from __future__ import annotations

import random

from .corpus import Document, SentenceSpan

_WORDS = [
    "le", "la", "les", "cour", "tribunal", "recours", "conformément",
    "décision", "droit", "canton", "était", "selon", "être", "établi",
    "juillet", "école", "fédéral", "assurance", "travail", "indépendant",
    "considérant", "motifs", "demande", "partie", "instance", "jugement",
    "article", "lettre", "terme", "délai", "mesure", "contrôle", "peine",
    "juge", "application", "convocation", "examen", "médical", "exécution",
    "recherche", "affection", "suivantes", "condamné", "satisfaire",
    "l'école", "d'abord", "qu'il", "s'est", "n'est",
]

_TERMINATORS = (".", ".", ".", ".", "!", "?")


def _make_sentence(rng: random.Random, n_words: int, with_trap: bool) -> str:
    words = [rng.choice(_WORDS) for _ in range(n_words)]
    for i in range(1, n_words - 1):
        if rng.random() < 0.08:
            words[i] = str(rng.randint(2, 1999))
    if with_trap and n_words >= 2:
        at = rng.randint(1, len(words) - 1)
        if rng.random() < 0.5:
            words[at:at] = ["art.", str(rng.randint(2, 99))]
        else:
            words[at] = words[at].capitalize()
            words[at:at] = ["Sr(a)."]
    words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice(_TERMINATORS)


def make_corpus(
    n_docs: int,
    seed: int,
    *,
    language: str = "fr",
    doc_type: str = "judgment",
    sentences_per_doc: tuple[int, int] = (4, 10),
    words_per_sentence: tuple[int, int] = (3, 9),
    abbreviation_rate: float = 0.0,
    newline_rate: float = 0.0,
    id_prefix: str = "doc",
) -> list[Document]:
    """Generate *n_docs* annotated documents, reproducibly from *seed*."""
    rng = random.Random(seed)
    docs = []
    for d in range(n_docs):
        n_sentences = rng.randint(*sentences_per_doc)
        parts: list[str] = []
        spans: list[SentenceSpan] = []
        pos = 0
        for s in range(n_sentences):
            if s:
                sep = "\n" if rng.random() < newline_rate else " "
                parts.append(sep)
                pos += len(sep)
            sent = _make_sentence(
                rng,
                rng.randint(*words_per_sentence),
                with_trap=rng.random() < abbreviation_rate,
            )
            spans.append(SentenceSpan(pos, pos + len(sent)))
            parts.append(sent)
            pos += len(sent)
        docs.append(
            Document(
                id=f"{id_prefix}-{language}-{d:04d}",
                language=language,
                doc_type=doc_type,
                text="".join(parts),
                spans=tuple(spans),
            )
        )
    return docs
