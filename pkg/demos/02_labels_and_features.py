"""BILOU span labeling and the windowed feature maps fed to the CRF.

Sentence spans become one label per token: B(egin), I(nside), L(ast),
O(utside), U(nit).  Whitespace inside a sentence is I, whitespace
between sentences is O, and decoding tolerates ill-formed label runs.

Each token position then turns into a sparse feature map: token shape
codes, special-character categories, lengths, case flags, all repeated
for neighbors at window offsets up to +/-10.
"""

from legal_sbd import decode_bilou, encode_bilou, token_features, tokenize
from legal_sbd.corpus import SentenceSpan
from legal_sbd.features import format_features

TEXT = "Un recours. Selon l'art. 12 la cour statue."
SPANS = [SentenceSpan(0, 11), SentenceSpan(12, 44)]

seq = tokenize(TEXT)
labels = encode_bilou(seq, SPANS)

print("token -> label:")
for tok, label in zip(seq, labels):
    print(f"  {label}  {tok.text!r}")

decoded = decode_bilou(seq, labels)
print("\ndecoded spans match the input:", decoded == SPANS)

# an ill-formed sequence (no proper B...L bracketing) still decodes
print("lenient decode of [I, I]:", decode_bilou(tokenize("A."), ["I", "I"]))

position = next(i for i, t in enumerate(seq) if t.text == "art")
print(f"\nfeature map for token {seq[position].text!r} (position {position}):")
print(format_features(token_features(seq, position)))
