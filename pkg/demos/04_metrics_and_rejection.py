"""Multi-label measures, and rejecting dialogues whose two best scores are too close.

Run with ``python demos/04_metrics_and_rejection.py``.
"""

# %% The measures on a hand-made example
from multitheme.metrics import evaluate, format_table, reject_close_scores, tune_rejection_margin

gold = {"d1": {"a", "b"}, "d2": {"c"}, "d3": {"a"}}
hyps = {"d1": {"a", "c"}, "d2": {"c"}, "d3": set()}  # d3 gets no hypothesis and is left out
report = evaluate(hyps, gold)
print(report.as_dict())
print(report.breakdown_csv())

# %% On a noisy corpus, rejecting the 10% closest calls on dev lifts F on the rest of test
from multitheme.corpus import sample_dev_subsets
from multitheme.cosine import classify_cosine, cosine_scores, tune_cosine
from multitheme.features import select_features
from multitheme.syncorp import GenSpec, generate

corpus = generate(GenSpec(noise=0.7, seed=1))
space = select_features(corpus)
dev, test = corpus.split("dev"), corpus.split("test")
params = tune_cosine(dev, space, sample_dev_subsets(corpus, seed=0))
margin = tune_rejection_margin([cosine_scores(d, space)[0] for d in dev], 0.10)

decisions = {d.id: classify_cosine(d, space, params) for d in test}
hyps = {i: dec.themes for i, dec in decisions.items()}
close = [i for i, dec in decisions.items() if reject_close_scores(dec.scores, margin)]
print(f"margin {margin:.3f} rejects {len(close)} of {len(test)} test dialogues")
print(format_table({"all": evaluate(hyps, test), "rejection": evaluate(hyps, test, rejected=close)}))
