"""Where punctuation rules break and a trained model does not.

Legal text is full of abbreviation periods ("art. 12", "Sr(a).") that
look exactly like sentence ends to a character-level rule.  On a corpus
salted with such traps the rule-based splitter loses precision while the
CRF learns the distinguishing context.
"""

from legal_sbd import TrainingConfig, evaluate, rule_split
from legal_sbd.pipeline import predict_documents, train_on_documents
from legal_sbd.synthetic import make_corpus

train_docs = make_corpus(50, seed=1, abbreviation_rate=0.5)
eval_docs = make_corpus(20, seed=2, abbreviation_rate=0.5, id_prefix="eval")

sample = next(d for d in eval_docs if "art." in d.text)
print("sample text with traps:")
print(" ", sample.text[:120], "...")
print("\nrule-based split of the sample:")
for span in rule_split(sample.text)[:6]:
    print("  -", sample.text[span.start : span.end])

model = train_on_documents(train_docs, TrainingConfig())

crf_predictions = {d.id: list(d.spans) for d in predict_documents(model, eval_docs)}
rule_predictions = {d.id: rule_split(d.text) for d in eval_docs}

crf_f1 = next(iter(evaluate(eval_docs, crf_predictions).per_subset.values())).macro_f1
rule_f1 = next(iter(evaluate(eval_docs, rule_predictions).per_subset.values())).macro_f1

print(f"\nrule baseline macro F1: {rule_f1:.3f}")
print(f"trained CRF macro F1:   {crf_f1:.3f}")
print(f"gap: {100 * (crf_f1 - rule_f1):.1f} F1 points")
