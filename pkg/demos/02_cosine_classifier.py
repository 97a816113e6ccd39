"""Cosine classification of dialogues, and tuning its two thresholds.

Run with ``python demos/02_cosine_classifier.py``.
"""

# %% Generate a corpus and select features on its train split
import numpy as np

from multitheme.corpus import sample_dev_subsets
from multitheme.cosine import CosineParams, classify_cosine, cosine_scores, _tune
from multitheme.features import select_features
from multitheme.metrics import evaluate
from multitheme.syncorp import GenSpec, generate

corpus = generate(GenSpec(split_sizes={"train": 400, "dev": 120, "test": 200}, noise=0.3, seed=5))
space = select_features(corpus)
print(space)

# %% Scores of one two-theme dialogue
test = corpus.split("test")
d = next(d for d in test if len(d.labels) == 2)
scores, status = cosine_scores(d, space)
for theme, s in sorted(zip(space.themes, scores), key=lambda p: -p[1]):
    print(f"  {theme:22s} {s:.3f}{'  <- gold' if theme in d.labels else ''}")

# %% rho keeps themes close to the best one, v keeps themes with a share of the total
for rho, v in [(1.0, 1.0), (0.5, 0.1), (0.0, 0.0)]:
    decision = classify_cosine(d, space, CosineParams(rho, v))
    print(f"rho={rho} v={v}: {sorted(decision.themes)}")

# %% Grid search on dev subsets; the objective surface is returned alongside the optimum
subsets = sample_dev_subsets(corpus, k=10, size=60, seed=0)
(rho, v), objective = _tune(corpus.split("dev"), space, subsets, 0.05, False)
print(f"tuned rho={rho} v={v}, mean subset F={objective.max() / len(subsets):.3f}")
print("F along v at the tuned rho:", np.round(objective[int(rho / 0.05)] / len(subsets), 2)[::4])

params = CosineParams(rho, v)
report = evaluate({d.id: classify_cosine(d, space, params).themes for d in test}, test)
print(f"test: R={report.recall:.3f} P={report.precision:.3f} A={report.accuracy:.3f} F={report.fscore:.3f}")
