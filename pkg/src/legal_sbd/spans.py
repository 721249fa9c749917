"""Conversion between character-offset sentence spans and BILOU labels.

One label per token: B(egin), I(nside), L(ast), O(utside), U(nit, a
single-token sentence).  Only one span class exists, so labels carry no
type suffix.

Encoding: a token belongs to a span iff its character range intersects
it, so interior whitespace tokens are labeled I while whitespace between
sentences stays O.

Decoding is lenient so that ill-formed model output still yields spans:
every maximal run of non-O labels becomes one span, trimmed to start and
end on non-whitespace tokens.  Because runs are maximal, two sentences
that touch with no O-labeled token between them decode as one span; gold
corpora separate sentences with whitespace, so well-formed encoder output
round-trips exactly.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right

from .corpus import SentenceSpan
from .errors import DataError
from .tokenizer import NEWLINE, WHITESPACE, TokenSequence

LABELS = ("B", "I", "L", "O", "U")

_SKIP_KINDS = (WHITESPACE, NEWLINE)


def encode_bilou(seq: TokenSequence, spans) -> list[str]:
    """Label every token of *seq* against character-offset *spans*.

    Spans must be sorted and non-overlapping (document invariants); a span
    that covers no token raises :class:`DataError`.
    """
    labels = ["O"] * len(seq)
    if not spans:
        return labels
    starts = [tok.start for tok in seq.tokens]
    ends = [tok.end for tok in seq.tokens]
    next_free = 0  # first token index not claimed by an earlier span
    for span in spans:
        first = bisect_right(ends, span.start)  # first token with end > start
        last = bisect_left(starts, span.end) - 1  # last token with start < end
        first = max(first, next_free)
        if first > last or last >= len(seq):
            raise DataError(
                f"span ({span.start}, {span.end}) intersects no unclaimed token"
            )
        if first == last:
            labels[first] = "U"
        else:
            labels[first] = "B"
            for i in range(first + 1, last):
                labels[i] = "I"
            labels[last] = "L"
        next_free = last + 1
    return labels


def decode_bilou(seq: TokenSequence, labels: list[str]) -> list[SentenceSpan]:
    """Turn a label sequence back into sorted, disjoint sentence spans.

    Accepts ill-formed input: any maximal run of non-O labels is one span.
    Runs are trimmed so spans start and end on non-whitespace tokens; a
    run consisting only of whitespace tokens yields nothing.
    """
    if len(labels) != len(seq):
        raise DataError(
            f"label/token length mismatch: {len(labels)} labels, {len(seq)} tokens"
        )
    spans: list[SentenceSpan] = []
    n = len(seq)
    i = 0
    while i < n:
        if labels[i] == "O":
            i += 1
            continue
        j = i
        while j + 1 < n and labels[j + 1] != "O":
            j += 1
        a, b = i, j
        while a <= b and seq[a].kind in _SKIP_KINDS:
            a += 1
        while b >= a and seq[b].kind in _SKIP_KINDS:
            b -= 1
        if a <= b:
            spans.append(SentenceSpan(seq[a].start, seq[b].end))
        i = j + 1
    return spans
