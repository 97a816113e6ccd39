"""Thematic density along a dialogue and the skeleton it induces.

Run with ``python demos/03_density_skeleton.py``; the skeleton CSVs land in
``demos/output``. A plot is drawn too when matplotlib is installed.
"""

# %% One disjoint-segments dialogue: the first part talks about one theme, the rest about another
from pathlib import Path

import numpy as np

from multitheme.density import (DensityParams, classify_density, compute_skeleton, export_skeleton,
                                thematic_density)
from multitheme.features import select_features
from multitheme.syncorp import GenSpec, generate

corpus = generate(GenSpec(split_sizes={"train": 400, "dev": 0, "test": 80}, noise=0.2, seed=8,
                          multi_label_rate=1.0))
space = select_features(corpus)
d = corpus.split("test").dialogues[0]
print(d.id, "gold:", sorted(d.labels), "length:", len(d.tokens))

# %% Smoothing a single spike: lambda=1 spreads it evenly, large lambda leaves it alone
spike = np.array([[1.0, 0.0, 0.0]])
for lam in (1.0, 2.0, 1e9):
    print(f"lambda={lam:g}:", np.round(thematic_density(spike, lam)[0], 4))

# %% Density per theme and position, then the dominant-mass decision
out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
for lam in (1.05, 2.8):
    sk = compute_skeleton(d, space, lam)
    dom = sk.density.argmax(axis=0)
    runs = [(space.themes[dom[0]], 0)]
    for i, k in enumerate(dom[1:], start=1):
        if space.themes[k] != runs[-1][0]:
            runs.append((space.themes[k], i))
    decision = classify_density(sk, DensityParams(lam, 0.2))
    print(f"lambda={lam}: {len(runs)} dominance runs, hypothesis {sorted(decision.themes)}")
    export_skeleton(sk, out / f"skeleton-{d.id}-lambda{lam:g}.csv")

# %% Optional picture of the skeleton
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    sk = compute_skeleton(d, space, 1.05)
    fig, ax = plt.subplots(figsize=(9, 3))
    for theme, row in zip(space.themes, sk.density):
        ax.plot(row, label=theme, lw=1)
    ax.set_xlabel("position")
    ax.set_ylabel("density")
    ax.legend(fontsize=6, ncol=4)
    fig.tight_layout()
    fig.savefig(out / "skeleton.png", dpi=120)
    print("wrote", out / "skeleton.png")
