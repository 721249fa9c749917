"""Windowed sparse feature extraction for CRF sequence labeling.

Every token position yields a flat map from feature-key strings to
values.  Keys are prefixed with the signed window offset they describe
("-3:", "+1:", "0:" for the center token) and each feature has its own
window radius:

===========  ======  =======================================================
feature      window  value
===========  ======  =======================================================
special      10      category: End / Open / Close / Newline / Abbr / No / S
BOS, EOS     10      first / last position of the sequence (bool)
lowercase    7       token text lowercased
length       7       token length in characters
sign         5       per-character shape code (c / C / N / S)
lower        3       first character is lowercase (bool)
upper        3       first character is uppercase (bool)
number       3       token is a number (bool)
space        3       token is whitespace (bool); neighbors only
===========  ======  =======================================================

The center position additionally carries ``bias`` (1.0) and uses the key
``0:numeric`` for the number flag; neighbors use ``<d>:number``.  Offsets
that fall outside the sequence emit nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tokenizer import NEWLINE, NUMBER, Token, TokenSequence, WORD

CATEGORY_END = "End"
CATEGORY_OPEN = "Open"
CATEGORY_CLOSE = "Close"
CATEGORY_NEWLINE = "Newline"
CATEGORY_ABBR = "Abbr"
CATEGORY_NONE = "No"
CATEGORY_SPECIAL = "S"

WINDOW_SPECIAL = 10  # also BOS/EOS
WINDOW_LOWERCASE = 7  # also length
WINDOW_SIGN = 5
WINDOW_FLAGS = 3  # lower/upper/number/space


@dataclass(frozen=True)
class FeatureConfig:
    """Character sets behind the ``special`` category, overridable per
    deployment (e.g. to count the ellipsis as sentence-terminating)."""

    end_chars: frozenset[str] = frozenset({".", "!", "?"})
    open_chars: frozenset[str] = frozenset({"(", "[", "{"})
    close_chars: frozenset[str] = frozenset({")", "]", "}"})
    abbr_chars: frozenset[str] = frozenset({"'", "’"})


DEFAULT_CONFIG = FeatureConfig()


def special_category(token: Token, config: FeatureConfig = DEFAULT_CONFIG) -> str:
    """Classify a token into its ``special`` feature category.

    Sentence terminators map to End, brackets to Open/Close, line breaks
    to Newline, apostrophes to Abbr; words and numbers map to No, and any
    remaining special character (whitespace included) to the shape code S.
    """
    if token.kind == NEWLINE:
        return CATEGORY_NEWLINE
    text = token.text
    if text in config.end_chars:
        return CATEGORY_END
    if text in config.open_chars:
        return CATEGORY_OPEN
    if text in config.close_chars:
        return CATEGORY_CLOSE
    if text in config.abbr_chars:
        return CATEGORY_ABBR
    if token.kind in (WORD, NUMBER):
        return CATEGORY_NONE
    return CATEGORY_SPECIAL


def signature(text: str) -> str:
    """Per-character shape code: c/C for lower/upper case letters, N for
    digits, S for everything else ("école" -> "ccccc", "Abc12!" -> "CccNNS")."""
    out = []
    for ch in text:
        if ch.isdecimal():
            out.append("N")
        elif ch.isupper():
            out.append("C")
        elif ch.islower():
            out.append("c")
        else:
            out.append("S")
    return "".join(out)


def _token_attrs(token: Token, config: FeatureConfig):
    text = token.text
    return (
        special_category(token, config),
        text.lower(),
        len(text),
        signature(text),
        text[0].islower(),
        text[0].isupper(),
        token.kind == NUMBER,
        text.isspace(),
    )


def token_features(
    seq: TokenSequence, i: int, config: FeatureConfig = DEFAULT_CONFIG
) -> dict:
    """Feature map for position *i* of *seq*; see the module table."""
    tokens = seq.tokens
    if not 0 <= i < len(tokens):
        raise IndexError(f"position {i} out of range for sequence of {len(tokens)} tokens")
    last = len(tokens) - 1
    special, lowercase, length, sign, lower, upper, number, _ = _token_attrs(
        tokens[i], config
    )
    feats = {
        "bias": 1.0,
        "0:lowercase": lowercase,
        "0:lower": lower,
        "0:upper": upper,
        "0:numeric": number,
        "0:special": special,
        "0:sign": sign,
        "0:length": length,
        "0:BOS": i == 0,
        "0:EOS": i == last,
    }
    lo = max(-WINDOW_SPECIAL, -i)
    hi = min(WINDOW_SPECIAL, last - i)
    for d in range(lo, hi + 1):
        if d == 0:
            continue
        j = i + d
        special, lowercase, length, sign, lower, upper, number, space = _token_attrs(
            tokens[j], config
        )
        p = f"{d:+d}"
        if d < 0:
            feats[f"{p}:BOS"] = j == 0
        else:
            feats[f"{p}:EOS"] = j == last
        feats[f"{p}:special"] = special
        if -WINDOW_LOWERCASE <= d <= WINDOW_LOWERCASE:
            feats[f"{p}:lowercase"] = lowercase
            feats[f"{p}:length"] = length
        if -WINDOW_SIGN <= d <= WINDOW_SIGN:
            feats[f"{p}:sign"] = sign
        if -WINDOW_FLAGS <= d <= WINDOW_FLAGS:
            feats[f"{p}:lower"] = lower
            feats[f"{p}:upper"] = upper
            feats[f"{p}:number"] = number
            feats[f"{p}:space"] = space
    return feats


def sequence_features(
    seq: TokenSequence, config: FeatureConfig = DEFAULT_CONFIG
) -> list[dict]:
    """Feature maps for every position, sharing per-token attribute work."""
    tokens = seq.tokens
    n = len(tokens)
    if n == 0:
        return []
    attrs = [_token_attrs(tok, config) for tok in tokens]
    last = n - 1
    out = []
    for i in range(n):
        special, lowercase, length, sign, lower, upper, number, _ = attrs[i]
        feats = {
            "bias": 1.0,
            "0:lowercase": lowercase,
            "0:lower": lower,
            "0:upper": upper,
            "0:numeric": number,
            "0:special": special,
            "0:sign": sign,
            "0:length": length,
            "0:BOS": i == 0,
            "0:EOS": i == last,
        }
        lo = max(-WINDOW_SPECIAL, -i)
        hi = min(WINDOW_SPECIAL, last - i)
        for d in range(lo, hi + 1):
            if d == 0:
                continue
            j = i + d
            special, lowercase, length, sign, lower, upper, number, space = attrs[j]
            p = f"{d:+d}"
            if d < 0:
                feats[f"{p}:BOS"] = j == 0
            else:
                feats[f"{p}:EOS"] = j == last
            feats[f"{p}:special"] = special
            if -WINDOW_LOWERCASE <= d <= WINDOW_LOWERCASE:
                feats[f"{p}:lowercase"] = lowercase
                feats[f"{p}:length"] = length
            if -WINDOW_SIGN <= d <= WINDOW_SIGN:
                feats[f"{p}:sign"] = sign
            if -WINDOW_FLAGS <= d <= WINDOW_FLAGS:
                feats[f"{p}:lower"] = lower
                feats[f"{p}:upper"] = upper
                feats[f"{p}:number"] = number
                feats[f"{p}:space"] = space
        out.append(feats)
    return out


def format_features(feats: dict) -> str:
    """Key-sorted, one entry per line, with Python-literal values."""
    return "\n".join(f"{key!r}: {feats[key]!r}" for key in sorted(feats))
