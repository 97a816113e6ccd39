"""Global cosine-similarity theme classifier with a two-threshold multi-label rule."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Dialogue
from .features import FeatureId, FeatureSpace, feature_counts
from .metrics import subset_fscores

OK = "ok"
NO_EVIDENCE = "rejected: no evidence"

DEFAULT_GRID_STEP = 0.01

# Relative slack on threshold comparisons; keeps decisions stable under rescaling.
DECISION_RTOL = 1e-12
# Objective sums closer than this are treated as ties.
OBJECTIVE_ATOL = 1e-9


@dataclass(frozen=True)
class CosineParams:
    rho: float
    v: float

    def __post_init__(self):
        if not (0.0 <= self.rho <= 1.0 and 0.0 <= self.v <= 1.0):
            raise ValueError(f"rho and v must lie in [0, 1], got rho={self.rho}, v={self.v}")


@dataclass(frozen=True)
class Decision:
    """Outcome of classifying one dialogue: hypothesised themes, per-theme scores and status."""

    themes: frozenset[str]
    scores: np.ndarray
    status: str = OK

    @property
    def rejected(self) -> bool:
        return self.status != OK


def dialogue_vector(dialogue: Dialogue, space: FeatureSpace) -> tuple[np.ndarray, np.ndarray]:
    """Sparse tf*idf vector of a dialogue over the selected features, as (rows, weights)."""
    pairs = sorted((space.index[t], count) for t, count in feature_counts(dialogue).items() if t in space.index)
    rows = np.array([i for i, _ in pairs], dtype=np.int64)
    tf = np.array([c for _, c in pairs], dtype=float)
    return rows, tf * space.idf[rows]


def dialogue_weight(t: FeatureId, dialogue: Dialogue, space: FeatureSpace) -> float:
    """w_d(t) = tf_d(t) * idf(t)."""
    i = space.index.get(t)
    if i is None:
        return 0.0
    return feature_counts(dialogue)[t] * float(space.idf[i])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two dense vectors; 0 when either is zero."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine_scores(dialogue: Dialogue, space: FeatureSpace, printed_norm: bool = False) -> tuple[np.ndarray, str]:
    """Score of the dialogue against every theme vector.

    With ``printed_norm`` the denominator is sqrt(sum_t w_d(t)^2 w_c(t)^2)
    instead of the product of the two vector norms.
    """
    rows, w_d = dialogue_vector(dialogue, space)
    if not np.any(w_d > 0):
        return np.zeros(len(space.themes)), NO_EVIDENCE
    return theme_scores(w_d, space.W[rows], space.theme_norms, printed_norm), OK


def theme_scores(w_d: np.ndarray, W: np.ndarray, theme_norms: np.ndarray | None = None,
                 printed_norm: bool = False) -> np.ndarray:
    """Scores of a weight vector ``w_d`` against the columns of ``W`` (rows aligned with ``w_d``).

    ``theme_norms`` are the full theme-vector norms; they default to the
    column norms of ``W``, which is right when ``W`` holds every feature.
    """
    if theme_norms is None:
        theme_norms = np.linalg.norm(W, axis=0)
    dots = w_d @ W
    if printed_norm:
        denom = np.sqrt((w_d[:, None] ** 2 * W**2).sum(axis=0))
    else:
        denom = np.linalg.norm(w_d) * theme_norms
    scores = np.zeros(W.shape[1])
    np.divide(dots, denom, out=scores, where=denom > 0)
    return scores


def top_index(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Index of the best value, taking the first among values within the relative slack of the max.

    Plain argmax would let rounding noise pick between tied themes, so a
    rescaled score vector could change its best theme.
    """
    values = np.asarray(values, dtype=float)
    top = values.max(axis=axis, keepdims=True)
    return np.argmax(values >= top - DECISION_RTOL * np.abs(top), axis=axis)


def decide(scores: np.ndarray, params: CosineParams) -> np.ndarray:
    """Boolean membership mask over themes for one score vector.

    The best theme (first by name on ties) is always kept when its score is
    positive; any other theme needs a positive score within ``rho`` of the best
    and at least a ``v`` share of the total score mass.
    """
    scores = np.asarray(scores, dtype=float)
    top = scores.max()
    if top <= 0:
        return np.zeros(scores.shape, dtype=bool)
    total = scores.sum()
    mask = ((scores > 0)
            & (scores >= params.rho * top - DECISION_RTOL * top)
            & (scores >= params.v * total - DECISION_RTOL * total))
    mask[int(top_index(scores))] = True
    return mask


def classify_cosine(dialogue: Dialogue, space: FeatureSpace, params: CosineParams,
                    printed_norm: bool = False) -> Decision:
    scores, status = cosine_scores(dialogue, space, printed_norm)
    if status != OK:
        return Decision(frozenset(), scores, status)
    mask = decide(scores, params)
    return Decision(frozenset(c for c, m in zip(space.themes, mask) if m), scores)


def param_grid(step: float) -> np.ndarray:
    """The points {0, step, 2 step, ...} <= 1, rounded to kill accumulation error."""
    if not 0 < step <= 0.5:
        raise ValueError("grid step must lie in (0, 0.5]")
    n = int(np.floor(1.0 / step + 1e-9))
    return np.round(np.arange(n + 1) * step, 10)


def best_grid_point(objective: np.ndarray) -> tuple[int, int]:
    """Index (i, j) maximising a 2-D objective, preferring the largest i then j among ties."""
    best = objective.max()
    ties = np.argwhere(objective >= best - OBJECTIVE_ATOL)
    i, j = max(map(tuple, ties))
    return int(i), int(j)


def subset_matrix(corpus: Corpus, subsets: Sequence[frozenset[str]]) -> np.ndarray:
    if not subsets:
        raise ValueError("no dev subsets given")
    pos = {d.id: k for k, d in enumerate(corpus)}
    S = np.zeros((len(subsets), len(corpus)), dtype=np.int8)
    for i, ids in enumerate(subsets):
        for did in ids:
            S[i, pos[did]] = 1
    return S


def _score_matrix(dev: Corpus, space: FeatureSpace, printed_norm: bool) -> np.ndarray:
    return np.array([cosine_scores(d, space, printed_norm)[0] for d in dev]).reshape(len(dev), len(space.themes))


def _members(scores: np.ndarray, rhos: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Membership tensor (len(rhos), len(vs), D, C), vectorised form of :func:`decide`."""
    top = scores.max(axis=1, keepdims=True)
    total = scores.sum(axis=1, keepdims=True)
    positive = scores > 0
    by_rho = positive & (scores >= rhos[:, None, None] * top - DECISION_RTOL * top)
    by_v = scores >= vs[:, None, None] * total - DECISION_RTOL * total
    members = by_rho[:, None] & by_v[None, :]
    best = np.zeros_like(positive)
    best[np.arange(len(scores)), top_index(scores, axis=1)] = True
    best &= top > 0
    return members | best


def _check_themes(dev: Corpus, space: FeatureSpace) -> None:
    if tuple(dev.themes) != tuple(space.themes):
        raise ValueError("corpus and feature space disagree on the theme inventory")


def tune_cosine(dev: Corpus, space: FeatureSpace, subsets: Sequence[frozenset[str]],
                grid_step: float = DEFAULT_GRID_STEP, printed_norm: bool = False) -> CosineParams:
    """Grid search for (rho, v) maximising the summed F-score over the dev subsets.

    Ties go to the largest rho, then the largest v.
    """
    return CosineParams(*_tune(dev, space, subsets, grid_step, printed_norm)[0])


def cosine_objective(dev: Corpus, space: FeatureSpace, subsets: Sequence[frozenset[str]],
                     params: CosineParams, printed_norm: bool = False) -> float:
    """Summed subset F-score at one parameter setting."""
    _check_themes(dev, space)
    scores = _score_matrix(dev, space, printed_norm)
    members = _members(scores, np.array([params.rho]), np.array([params.v]))
    return float(subset_fscores(members, dev.label_matrix(), subset_matrix(dev, subsets)).sum(axis=-1)[0, 0])


def _tune(dev, space, subsets, grid_step, printed_norm):
    _check_themes(dev, space)
    grid = param_grid(grid_step)
    scores = _score_matrix(dev, space, printed_norm)
    gold = dev.label_matrix()
    S = subset_matrix(dev, subsets)
    objective = np.empty((len(grid), len(grid)))
    # one rho row at a time bounds memory at len(grid) * D * C
    for i, rho in enumerate(grid):
        members = _members(scores, np.array([rho]), grid)[0]
        objective[i] = subset_fscores(members, gold, S).sum(axis=-1)
    i, j = best_grid_point(objective)
    return (float(grid[i]), float(grid[j])), objective
