"""Features and purity on a small synthetic corpus.

Run with ``python demos/01_features_and_purity.py``.
"""

# %% A tiny corpus: themes own "signal" words, filler words are shared
from multitheme.syncorp import GenSpec, generate
from multitheme.features import attested_space, extract_features, gini

spec = GenSpec(split_sizes={"train": 140, "dev": 0, "test": 0}, noise=0.2, seed=3)
corpus = generate(spec)
first = corpus.split("train").dialogues[0]
print(first.id, sorted(first.labels), " ".join(first.tokens[:12]), "...")

# %% Each dialogue of n tokens yields n unigrams plus 2n - 3 distance bigrams
occurrences = extract_features(first)
n = len(first.tokens)
print(f"{n} tokens -> {len(occurrences)} feature occurrences (n + (n-1) + (n-2) = {3 * n - 3})")
for feature, anchors in occurrences[n:n + 3]:
    print(f"  {str(feature):24s} anchored at {anchors}")

# %% Purity ranges from 1/|C| (spread evenly) to 1 (one theme only)
print("even spread :", gini([5] * 7, 35))
print("one theme   :", gini([9, 0, 0, 0, 0, 0, 0], 9))
print("mostly one  :", round(gini([8, 1, 1, 0, 0, 0, 0], 10), 3))

# %% Selection keeps pure, well-covered features; filler words mostly fall away
space = attested_space(corpus)
for min_G in (1 / 7, 0.3, 0.6):
    kept = space.restrict(min_G, 2)
    print(f"min_G={min_G:.3f}: {len(kept):6d} of {len(space)} features kept")

selected = space.restrict(0.3, 2)
top = sorted(selected.features, key=lambda t: -selected.W[selected.index[t]].max())[:5]
for t in top:
    s = selected.stats(t)
    print(f"  {str(t):24s} df_T={s.df_T:3d} G={s.G:.2f} idf={s.idf:.2f} theme={selected.themes[s.w_c.argmax()]}")
