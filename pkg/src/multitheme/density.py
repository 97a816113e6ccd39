"""Positional thematic densities ("skeletons") and the dominance-based theme decision."""

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .corpus import Corpus, Dialogue
from .cosine import NO_EVIDENCE, OK, Decision, _check_themes, best_grid_point, param_grid, subset_matrix, top_index
from .features import FeatureSpace, extract_features
from .metrics import subset_fscores

DEFAULT_LAMBDA_GRID = (1.0, 1.05, 1.1, 1.2, 1.5, 2.0, 2.8)
DEFAULT_GRID_STEP = 0.01
DECISION_RTOL = 1e-12


@dataclass(frozen=True)
class DensityParams:
    lam: float
    v: float

    def __post_init__(self):
        if self.lam < 1.0:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if not 0.0 <= self.v <= 1.0:
            raise ValueError(f"v must lie in [0, 1], got {self.v}")


@dataclass(frozen=True)
class Skeleton:
    """Densities of every theme at every position of one dialogue.

    ``density`` and ``contributions`` are (themes x positions) arrays; column i
    is dialogue position i + 1.
    """

    themes: tuple[str, ...]
    lam: float
    density: np.ndarray
    contributions: np.ndarray

    @property
    def n(self) -> int:
        return self.density.shape[1]


def position_contributions(dialogue: Dialogue, space: FeatureSpace) -> np.ndarray:
    """(themes x positions) matrix of w_c(p_i).

    Position i collects the weight of its unigram and of every selected bigram
    anchored on it, divided by the theme vector norm.
    """
    contrib = np.zeros((len(dialogue.tokens), len(space.themes)))
    for t, anchors in extract_features(dialogue):
        row = space.index.get(t)
        if row is None:
            continue
        for p in anchors:
            contrib[p - 1] += space.W[row]
    return (contrib / space.theme_norms).T


def position_contribution(dialogue: Dialogue, i: int, theme: str, space: FeatureSpace) -> float:
    if not 1 <= i <= len(dialogue.tokens):
        raise IndexError(f"position {i} outside 1..{len(dialogue.tokens)}")
    return float(position_contributions(dialogue, space)[space.themes.index(theme), i - 1])


def thematic_density(contribs: np.ndarray, lam: float) -> np.ndarray:
    """Smooth contributions along the last axis with weights lam^-|i - j|.

    Runs in O(n) per row through a forward and a backward first-order
    recursion; ``lam == 1`` yields the row mean everywhere.
    """
    w = np.asarray(contribs, dtype=float)
    if lam < 1:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    if w.shape[-1] == 0:
        raise ValueError("cannot smooth an empty sequence")
    lo, hi = w.min(axis=-1, keepdims=True), w.max(axis=-1, keepdims=True)
    if lam == 1:
        return np.clip(np.broadcast_to(w.mean(axis=-1, keepdims=True), w.shape), lo, hi)

    r = 1.0 / lam
    n = w.shape[-1]
    # forward[i] = sum_{j<=i} w_j r^(i-j); backward[i] = sum_{j>=i} w_j r^(j-i)
    forward = lfilter([1.0], [1.0, -r], w, axis=-1)
    backward = lfilter([1.0], [1.0, -r], w[..., ::-1], axis=-1)[..., ::-1]
    num = forward.copy()
    num[..., :-1] += r * backward[..., 1:]

    ones = lfilter([1.0], [1.0, -r], np.ones(n))
    den = ones + np.concatenate([r * ones[::-1][1:], [0.0]])
    d = num / den
    # the exact value is a convex combination of the row; clip rounding overshoot
    return np.clip(d, lo, hi)


def compute_skeleton(dialogue: Dialogue, space: FeatureSpace, lam: float) -> Skeleton:
    contrib = position_contributions(dialogue, space)
    return Skeleton(space.themes, float(lam), thematic_density(contrib, lam), contrib)


def dominant_masses(density: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-theme mass over its dominant positions.

    Returns (mass, dominates_somewhere, total) where total sums the maximal
    density of each position once. Positions where every density is zero
    have no dominant theme.
    """
    top = density.max(axis=0)
    dominant = (density >= top) & (top > 0)
    mass = np.where(dominant, density, 0.0).sum(axis=1)
    return mass, dominant.any(axis=1), float(top.sum())


def decide_density(mass: np.ndarray, dominates: np.ndarray, total: float, v: float) -> np.ndarray:
    """Membership mask: the heaviest theme plus every dominant theme holding a v share of the mass."""
    if total <= 0:
        return np.zeros(mass.shape, dtype=bool)
    mask = dominates & (mass > 0) & (mass >= v * total - DECISION_RTOL * total)
    mask[int(top_index(mass))] = True
    return mask


def classify_density(skeleton: Skeleton, params: DensityParams) -> Decision:
    mass, dominates, total = dominant_masses(skeleton.density)
    if total <= 0:
        return Decision(frozenset(), mass, NO_EVIDENCE)
    mask = decide_density(mass, dominates, total, params.v)
    return Decision(frozenset(c for c, m in zip(skeleton.themes, mask) if m), mass, OK)


def classify_dialogue_density(dialogue: Dialogue, space: FeatureSpace, params: DensityParams) -> Decision:
    return classify_density(compute_skeleton(dialogue, space, params.lam), params)


def _mass_table(dev: Corpus, space: FeatureSpace, lam: float):
    masses, dominates, totals = [], [], []
    for d in dev:
        m, dom, tot = dominant_masses(compute_skeleton(d, space, lam).density)
        masses.append(m)
        dominates.append(dom)
        totals.append(tot)
    C = len(space.themes)
    return (np.array(masses).reshape(-1, C), np.array(dominates, dtype=bool).reshape(-1, C),
            np.array(totals, dtype=float))


def _members(mass: np.ndarray, dominates: np.ndarray, total: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Membership tensor (len(vs), D, C), vectorised form of :func:`decide_density`."""
    tot = total[:, None]
    members = (dominates & (mass > 0))[None] & (mass[None] >= vs[:, None, None] * tot - DECISION_RTOL * tot)
    best = np.zeros(mass.shape, dtype=bool)
    best[np.arange(len(mass)), top_index(mass, axis=1)] = True
    best &= tot > 0
    return (members & (tot > 0)) | best


def tune_density(dev: Corpus, space: FeatureSpace, subsets: Sequence[frozenset[str]],
                 lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                 grid_step: float = DEFAULT_GRID_STEP) -> DensityParams:
    """Grid search for (lambda, v) maximising the summed subset F-score.

    Ties go to the largest lambda, then the largest v.
    """
    (lam, v), _ = _tune(dev, space, subsets, lambda_grid, grid_step)
    return DensityParams(lam, v)


def _tune(dev, space, subsets, lambda_grid, grid_step):
    _check_themes(dev, space)
    if not len(lambda_grid):
        raise ValueError("lambda grid is empty")
    lambdas = np.array(sorted(set(float(x) for x in lambda_grid)))
    vs = param_grid(grid_step)
    gold = dev.label_matrix()
    S = subset_matrix(dev, subsets)
    objective = np.empty((len(lambdas), len(vs)))
    for i, lam in enumerate(lambdas):
        members = _members(*_mass_table(dev, space, lam), vs)
        objective[i] = subset_fscores(members, gold, S).sum(axis=-1)
    i, j = best_grid_point(objective)
    return (float(lambdas[i]), float(vs[j])), objective


def density_objective(dev: Corpus, space: FeatureSpace, subsets: Sequence[frozenset[str]],
                      params: DensityParams) -> float:
    _check_themes(dev, space)
    members = _members(*_mass_table(dev, space, params.lam), np.array([params.v]))
    return float(subset_fscores(members, dev.label_matrix(), subset_matrix(dev, subsets)).sum(axis=-1)[0])


def export_skeleton(skeleton: Skeleton, path: str | Path) -> None:
    """Write densities as CSV: a header of theme names, then one row per position."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(skeleton.themes)
        for column in skeleton.density.T:
            writer.writerow([f"{x:.6g}" for x in column])


def read_skeleton_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Inverse of :func:`export_skeleton`: theme names and a (themes x positions) array."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    themes = tuple(rows[0])
    return themes, np.array(rows[1:], dtype=float).reshape(-1, len(themes)).T
