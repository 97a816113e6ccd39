"""Unigram and distance-bigram features, Gini purity and per-theme weights."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .corpus import Corpus, Dialogue

FORMAT_NAME = "multitheme-features"
FORMAT_VERSION = 1

DEFAULT_MIN_G = 0.3
DEFAULT_MIN_DF = 2

# Tolerance on the purity threshold so that min_G = 1/|C| admits uniform features.
_G_EPS = 1e-12


class SelectionError(ValueError):
    pass


class FeatureId(NamedTuple):
    """A unigram (one word) or a bigram whose words are ``gap + 1`` positions apart."""

    words: tuple[str, ...]
    gap: int = 0

    @property
    def kind(self) -> str:
        return "unigram" if len(self.words) == 1 else "bigram"

    def __str__(self) -> str:
        if len(self.words) == 1:
            return self.words[0]
        return f"{self.words[0]}{' _ ' if self.gap else ' '}{self.words[1]}"


def unigram(word: str) -> FeatureId:
    return FeatureId((word,), 0)


def bigram(first: str, second: str, gap: int = 0) -> FeatureId:
    if gap not in (0, 1):
        raise ValueError(f"bigram gap must be 0 or 1, got {gap}")
    return FeatureId((first, second), gap)


def feature_sort_key(t: FeatureId):
    return (len(t.words), t.words, t.gap)


def extract_features(dialogue: Dialogue | Sequence[str]) -> list[tuple[FeatureId, tuple[int, ...]]]:
    """Every feature occurrence of a dialogue with its 1-based anchor positions.

    A dialogue of n tokens yields n unigrams, n - 1 adjacent bigrams and
    n - 2 one-gap bigrams. A bigram is anchored at both of its words only.
    """
    tokens = dialogue.tokens if isinstance(dialogue, Dialogue) else tuple(dialogue)
    n = len(tokens)
    out = [(FeatureId((tok,), 0), (i + 1,)) for i, tok in enumerate(tokens)]
    out += [(FeatureId((tokens[i], tokens[i + 1]), 0), (i + 1, i + 2)) for i in range(n - 1)]
    out += [(FeatureId((tokens[i], tokens[i + 2]), 1), (i + 1, i + 3)) for i in range(n - 2)]
    return out


def feature_counts(dialogue: Dialogue | Sequence[str]) -> Counter:
    """Occurrence count of every feature in one dialogue (term frequency)."""
    return Counter(t for t, _ in extract_features(dialogue))


def gini(df_c: Sequence[int] | np.ndarray, df_T: int) -> float:
    """Purity sum_c (df_c / df_T)^2 of a feature over the themes."""
    if df_T <= 0:
        raise ValueError("df_T must be >= 1 (feature unseen in train)")
    # integer numerator and denominator: one rounding, so uniform counts give 1/|C| exactly
    return sum(int(x) ** 2 for x in df_c) / int(df_T) ** 2


def idf(df_T: int, N: int) -> float:
    if df_T <= 0:
        raise ValueError("df_T must be >= 1 (feature unseen in train)")
    if df_T > N:
        raise ValueError(f"df_T={df_T} exceeds train size N={N}")
    return math.log(N / df_T)


@dataclass(frozen=True)
class FeatureStats:
    df_T: int
    df_c: np.ndarray
    idf: float
    G: float
    w_c: np.ndarray


def theme_weight(df_c: int | np.ndarray, idf_t: float, G: float):
    """w_c(t) = df_c(t) * idf(t)^2 * G(t)^2 (scalar or vector over themes)."""
    return df_c * idf_t**2 * G**2


class FeatureSpace:
    """Selected features with their train-set statistics.

    Row order of every array follows ``features``, which is sorted with
    unigrams first, then bigrams, each lexicographically.
    """

    def __init__(self, themes: Sequence[str], features: Sequence[FeatureId], df_c: np.ndarray,
                 N: int, min_G: float, min_df: int):
        order = sorted(range(len(features)), key=lambda i: feature_sort_key(features[i]))
        self.themes = tuple(themes)
        self.features = [features[i] for i in order]
        self.df_c = np.asarray(df_c, dtype=np.int64).reshape(len(features), len(themes))[order]
        self.N = int(N)
        self.min_G = float(min_G)
        self.min_df = int(min_df)
        self.index = {t: i for i, t in enumerate(self.features)}

        # Train is mono-label, so a dialogue is counted in exactly one theme column.
        self.df_T = self.df_c.sum(axis=1)
        if len(self.features) and self.df_T.min() < 1:
            raise ValueError("every feature needs df_T >= 1")
        if len(self.features) and self.df_T.max() > self.N:
            raise ValueError("df_T exceeds train size")
        self.G = (self.df_c**2).sum(axis=1) / self.df_T**2 if len(self.features) else np.zeros(0)
        self.idf = np.log(self.N / self.df_T) if len(self.features) else np.zeros(0)
        self.W = self.df_c * (self.idf**2 * self.G**2)[:, None]
        self.theme_norms = np.sqrt((self.W**2).sum(axis=0))

    def __len__(self) -> int:
        return len(self.features)

    def __contains__(self, t: FeatureId) -> bool:
        return t in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureSpace):
            return NotImplemented
        return (self.themes == other.themes and self.features == other.features
                and np.array_equal(self.df_c, other.df_c) and self.N == other.N
                and self.min_G == other.min_G and self.min_df == other.min_df)

    def __repr__(self) -> str:
        return (f"FeatureSpace({len(self)} features, {len(self.themes)} themes, N={self.N}, "
                f"min_G={self.min_G}, min_df={self.min_df})")

    def stats(self, t: FeatureId) -> FeatureStats:
        i = self.index[t]
        return FeatureStats(df_T=int(self.df_T[i]), df_c=self.df_c[i].copy(), idf=float(self.idf[i]),
                            G=float(self.G[i]), w_c=self.W[i].copy())

    def weight(self, t: FeatureId, theme: str) -> float:
        i = self.index.get(t)
        return 0.0 if i is None else float(self.W[i, self.themes.index(theme)])

    def restrict(self, min_G: float, min_df: int) -> FeatureSpace:
        """Keep only features with G >= min_G and df_T >= min_df."""
        keep = (self.G >= min_G - _G_EPS) & (self.df_T >= min_df)
        space = FeatureSpace(self.themes, [t for t, k in zip(self.features, keep) if k],
                             self.df_c[keep], self.N, min_G, min_df)
        empty = [c for c, norm in zip(space.themes, space.theme_norms) if norm == 0]
        if empty:
            raise SelectionError(
                f"selection emptied theme vector(s) {empty} (min_G={min_G}, min_df={min_df}); "
                "lower the purity or coverage threshold"
            )
        return space


def count_document_frequencies(train: Iterable[Dialogue], themes: Sequence[str]) -> tuple[dict, int]:
    """Per-theme document frequency of every attested feature, and the dialogue count."""
    col = {c: j for j, c in enumerate(themes)}
    df: dict[FeatureId, np.ndarray] = {}
    n = 0
    for d in train:
        n += 1
        if len(d.labels) != 1:
            raise ValueError(f"train dialogue {d.id!r} is not mono-label")
        j = col[next(iter(d.labels))]
        for t in {t for t, _ in extract_features(d)}:
            row = df.get(t)
            if row is None:
                row = df[t] = np.zeros(len(themes), dtype=np.int64)
            row[j] += 1
    return df, n


def attested_space(train: Corpus) -> FeatureSpace:
    """All features attested in the train split, without any threshold."""
    dialogues = [d for d in train if d.split == "train"]
    if not dialogues:
        raise SelectionError("train split is empty")
    df, n = count_document_frequencies(dialogues, train.themes)
    features = list(df)
    df_c = np.array([df[t] for t in features]).reshape(len(features), len(train.themes))
    return FeatureSpace(train.themes, features, df_c, n, min_G=0.0, min_df=1)


def select_features(train: Corpus, min_G: float = DEFAULT_MIN_G, min_df: int = DEFAULT_MIN_DF) -> FeatureSpace:
    """Count features on the train split and keep the pure, well-covered ones."""
    return attested_space(train).restrict(min_G, min_df)


def save_feature_space(space: FeatureSpace, path: str | Path) -> None:
    Path(path).write_text(dump_feature_space(space), encoding="utf-8")


def dump_feature_space(space: FeatureSpace) -> str:
    lines = [
        f"#format\t{FORMAT_NAME}\t{FORMAT_VERSION}",
        "#themes\t" + "\t".join(space.themes),
        f"#N\t{space.N}",
        f"#min_G\t{space.min_G!r}",
        f"#min_df\t{space.min_df}",
        "\t".join(["kind", "words", "gap", "df_T", *space.themes]),
    ]
    for t, df_T, row in zip(space.features, space.df_T, space.df_c):
        lines.append("\t".join([t.kind, " ".join(t.words), str(t.gap), str(df_T), *map(str, row)]))
    return "\n".join(lines) + "\n"


def load_feature_space(path: str | Path) -> FeatureSpace:
    header = {}
    features, rows = [], []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if fields[0].startswith("#"):
                header[fields[0][1:]] = fields[1:]
                continue
            if fields[0] == "kind":
                continue
            try:
                kind, words, gap, df_T, *df_c = fields
                t = FeatureId(tuple(words.split(" ")), int(gap))
                if t.kind != kind or len(df_c) != len(header["themes"]):
                    raise ValueError("inconsistent record")
                counts = [int(x) for x in df_c]
                if sum(counts) != int(df_T):
                    raise ValueError("df_T does not match per-theme counts")
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed feature record ({exc})") from None
            features.append(t)
            rows.append(counts)
    if header.get("format", [None])[0] != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} file")
    themes = header["themes"]
    df_c = np.array(rows, dtype=np.int64).reshape(len(rows), len(themes))
    return FeatureSpace(themes, features, df_c, int(header["N"][0]),
                        float(header["min_G"][0]), int(header["min_df"][0]))
