"""Corpus ingestion, validation, splitting, and summary statistics.

The on-disk corpus format is UTF-8 JSONL, one document per line::

    {"id": str, "language": str, "type": "judgment"|"law", "text": str,
     "spans": [{"start": int, "end": int, "label": "Sentence"}, ...]}

Span offsets count Unicode code points of ``text``, start inclusive, end
exclusive.  Spans must be sorted, non-overlapping, in bounds, and contain
at least one non-whitespace character.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DataError
from .tokenizer import NEWLINE, WHITESPACE, tokenize

DOC_TYPES = ("judgment", "law")


@dataclass(frozen=True)
class SentenceSpan:
    start: int
    end: int
    label: str = "Sentence"


@dataclass(frozen=True)
class Document:
    id: str
    language: str
    doc_type: str
    text: str
    spans: tuple[SentenceSpan, ...] = ()


@dataclass(frozen=True)
class CorpusSplit:
    """Document-id partition into train/validation/test."""

    seed: int
    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]


def validate_document(doc: Document) -> None:
    """Raise :class:`DataError` if *doc* violates a corpus invariant."""
    where = f"document {doc.id!r}"
    if not doc.id:
        raise DataError("document with empty id")
    if not doc.text:
        raise DataError(f"{where}: empty text")
    if doc.doc_type not in DOC_TYPES:
        raise DataError(
            f"{where}: unknown type {doc.doc_type!r} (expected one of {DOC_TYPES})"
        )
    if not (len(doc.language) == 2 and doc.language.isalpha() and doc.language.islower()):
        raise DataError(
            f"{where}: language {doc.language!r} is not a two-letter lowercase code"
        )
    n = len(doc.text)
    prev_end = 0
    for span in doc.spans:
        if not (0 <= span.start < span.end <= n):
            raise DataError(
                f"{where}: span out of range ({span.start}, {span.end}) for text of length {n}"
            )
        if span.start < prev_end:
            raise DataError(
                f"{where}: overlapping or unsorted span at ({span.start}, {span.end})"
            )
        if doc.text[span.start : span.end].isspace():
            raise DataError(
                f"{where}: span ({span.start}, {span.end}) contains only whitespace"
            )
        prev_end = span.end


def _normalize_newlines(text: str, spans: list[tuple[int, int, str]]):
    """Replace CRLF with LF and shift span offsets accordingly."""
    if "\r\n" not in text:
        return text, spans
    removed = []  # indices of '\r' characters that get dropped
    pos = text.find("\r\n")
    while pos != -1:
        removed.append(pos)
        pos = text.find("\r\n", pos + 2)

    def shift(offset: int) -> int:
        lo, hi = 0, len(removed)
        while lo < hi:  # count removed positions below offset
            mid = (lo + hi) // 2
            if removed[mid] < offset:
                lo = mid + 1
            else:
                hi = mid
        return offset - lo

    new_text = text.replace("\r\n", "\n")
    new_spans = [(shift(s), shift(e), label) for s, e, label in spans]
    return new_text, new_spans


def _parse_document(obj: dict, lineno: int) -> Document:
    for key in ("id", "language", "type", "text"):
        if key not in obj:
            raise DataError(f"line {lineno}: missing field {key!r}")
    raw_spans = obj.get("spans", [])
    if not isinstance(raw_spans, list):
        raise DataError(f"line {lineno}: 'spans' must be a list")
    spans: list[tuple[int, int, str]] = []
    for s in raw_spans:
        try:
            spans.append((int(s["start"]), int(s["end"]), s.get("label", "Sentence")))
        except (TypeError, KeyError, ValueError) as exc:
            raise DataError(
                f"line {lineno}: malformed span in document {obj.get('id')!r}: {exc}"
            ) from exc
    text, spans = _normalize_newlines(str(obj["text"]), spans)
    return Document(
        id=str(obj["id"]),
        language=str(obj["language"]),
        doc_type=str(obj["type"]),
        text=text,
        spans=tuple(SentenceSpan(*s) for s in spans),
    )


def load_corpus(path: str | Path) -> list[Document]:
    """Load and validate a JSONL corpus.

    Aborts with a diagnostic naming the line number (for JSON problems) or
    the offending document id (for span problems).
    """
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}: line {lineno} is not a JSON object")
            doc = _parse_document(obj, lineno)
            validate_document(doc)
            if doc.id in seen:
                raise DataError(f"{path}: duplicate document id {doc.id!r} on line {lineno}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


def document_to_json(doc: Document) -> str:
    obj = {
        "id": doc.id,
        "language": doc.language,
        "type": doc.doc_type,
        "text": doc.text,
        "spans": [
            {"start": s.start, "end": s.end, "label": s.label} for s in doc.spans
        ],
    }
    return json.dumps(obj, ensure_ascii=False)


def save_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(document_to_json(doc))
            fh.write("\n")


def corpus_fingerprint(docs: Iterable[Document]) -> str:
    """Cheap content hash identifying a corpus in model metadata."""
    h = hashlib.sha256()
    for doc in sorted(docs, key=lambda d: d.id):
        h.update(f"{doc.id}\t{len(doc.text)}\t{len(doc.spans)}\n".encode())
    return h.hexdigest()[:16]


def _fifth(n: int) -> int:
    # round-half-up of 0.2 * n in exact integer arithmetic
    return (2 * n + 5) // 10


def split_corpus(docs: list[Document], seed: int) -> CorpusSplit:
    """Randomly partition document ids into 60/20/20 train/validation/test.

    Sampling is stratified per language so every language contributes 20%
    of its documents (round half up) to validation and to test.  The
    partition is a pure function of the document ids, their languages, and
    the seed.
    """
    if len(docs) < 5:
        raise DataError(f"corpus too small to split: {len(docs)} documents (need >= 5)")
    by_language: dict[str, list[str]] = {}
    for doc in docs:
        by_language.setdefault(doc.language, []).append(doc.id)
    rng = random.Random(seed)
    train: list[str] = []
    validation: list[str] = []
    test: list[str] = []
    for language in sorted(by_language):
        ids = sorted(by_language[language])
        rng.shuffle(ids)
        n_test = _fifth(len(ids))
        n_val = _fifth(len(ids))
        test.extend(ids[:n_test])
        validation.extend(ids[n_test : n_test + n_val])
        train.extend(ids[n_test + n_val :])
    if not validation or not test:
        raise DataError("corpus too small to yield non-empty validation/test splits")
    return CorpusSplit(
        seed=seed,
        train=tuple(sorted(train)),
        validation=tuple(sorted(validation)),
        test=tuple(sorted(test)),
    )


def save_split(split: CorpusSplit, path: str | Path) -> None:
    obj = {
        "seed": split.seed,
        "train": list(split.train),
        "validation": list(split.validation),
        "test": list(split.test),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_split(path: str | Path) -> CorpusSplit:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed split file: {exc}") from exc
    try:
        return CorpusSplit(
            seed=int(obj.get("seed", 0)),
            train=tuple(obj["train"]),
            validation=tuple(obj["validation"]),
            test=tuple(obj["test"]),
        )
    except KeyError as exc:
        raise DataError(f"{path}: split file missing field {exc}") from exc


@dataclass
class StatsRow:
    language: str
    doc_type: str
    documents: int = 0
    sentences: int = 0
    tokens: int = 0  # non-whitespace tokens inside sentence spans
    tokens_with_whitespace: int = 0  # all tokens inside sentence spans


def corpus_stats(docs: Iterable[Document]) -> list[StatsRow]:
    """Per-(language, type) document/sentence/token counts.

    Token columns count tokens whose character range intersects a sentence
    span; ``tokens`` excludes whitespace and newline tokens while
    ``tokens_with_whitespace`` keeps them, so either counting convention
    can be reconciled from the output.
    """
    rows: dict[tuple[str, str], StatsRow] = {}
    for doc in docs:
        row = rows.setdefault(
            (doc.language, doc.doc_type), StatsRow(doc.language, doc.doc_type)
        )
        row.documents += 1
        row.sentences += len(doc.spans)
        seq = tokenize(doc.text, doc.id)
        for nonws, total in _sentence_token_counts(seq, doc.spans):
            row.tokens += nonws
            row.tokens_with_whitespace += total
    return [rows[key] for key in sorted(rows)]


def _sentence_token_counts(seq, spans) -> list[tuple[int, int]]:
    """(non-whitespace, total) token counts per sentence span."""
    counts = []
    t = 0
    tokens = seq.tokens
    for span in spans:
        while t < len(tokens) and tokens[t].end <= span.start:
            t += 1
        nonws = total = 0
        u = t
        while u < len(tokens) and tokens[u].start < span.end:
            total += 1
            if tokens[u].kind not in (WHITESPACE, NEWLINE):
                nonws += 1
            u += 1
        counts.append((nonws, total))
    return counts


def stats_to_csv(rows: list[StatsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["language", "type", "documents", "sentences", "tokens", "tokens_with_whitespace"]
    )
    for row in rows:
        writer.writerow(
            [row.language, row.doc_type, row.documents, row.sentences,
             row.tokens, row.tokens_with_whitespace]
        )
    if rows:
        writer.writerow(
            ["total", "all",
             sum(r.documents for r in rows),
             sum(r.sentences for r in rows),
             sum(r.tokens for r in rows),
             sum(r.tokens_with_whitespace for r in rows)]
        )
    return buf.getvalue()


@dataclass
class LengthHistogram:
    doc_type: str
    bin_size: int
    cutoff: int
    bins: list[tuple[int, int, int, float]] = field(default_factory=list)
    # each bin is (low, high, count, relative frequency)
    included: int = 0
    excluded: int = 0  # sentences with more than `cutoff` tokens


def length_histogram(
    docs: Iterable[Document], bin_size: int = 5, cutoff: int = 101
) -> list[LengthHistogram]:
    """Sentence-length distribution in non-whitespace tokens per doc type.

    Lengths are bucketed into [1..bin_size], [bin_size+1..2*bin_size], ...
    and normalized within each document type.  Sentences longer than
    *cutoff* are excluded from the bins; their count is reported in
    ``excluded``.
    """
    if bin_size < 1:
        raise DataError(f"bin_size must be >= 1, got {bin_size}")
    counts: dict[str, dict[int, int]] = {}
    excluded: dict[str, int] = {}
    for doc in docs:
        seq = tokenize(doc.text, doc.id)
        per_type = counts.setdefault(doc.doc_type, {})
        for nonws, _ in _sentence_token_counts(seq, doc.spans):
            if nonws > cutoff:
                excluded[doc.doc_type] = excluded.get(doc.doc_type, 0) + 1
                continue
            idx = (nonws - 1) // bin_size if nonws > 0 else 0
            per_type[idx] = per_type.get(idx, 0) + 1
    result = []
    for doc_type in sorted(counts):
        per_type = counts[doc_type]
        hist = LengthHistogram(doc_type, bin_size, cutoff)
        hist.included = sum(per_type.values())
        hist.excluded = excluded.get(doc_type, 0)
        top = max(per_type) if per_type else -1
        for idx in range(top + 1):
            c = per_type.get(idx, 0)
            freq = c / hist.included if hist.included else 0.0
            hist.bins.append((idx * bin_size + 1, (idx + 1) * bin_size, c, freq))
        result.append(hist)
    return result


def histograms_to_csv(hists: list[LengthHistogram]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["type", "bin_start", "bin_end", "count", "frequency"])
    for hist in hists:
        for lo, hi, count, freq in hist.bins:
            writer.writerow([hist.doc_type, lo, hi, count, f"{freq:.6f}"])
    return buf.getvalue()
