"""Synthetic multi-theme dialogue corpora with planted, known labels.

Every theme owns a private "signal" vocabulary; all themes share a "filler"
vocabulary. A dialogue is a stream of filler words into which signal words of
its gold themes are planted. Noise replaces planted signal words with random
filler words, standing in for recognition errors.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import DEFAULT_THEMES, Corpus, Dialogue

MIXING_MODES = ("disjoint-segments", "interleaved", "co-mentioned")

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class GenSpec:
    themes: tuple[str, ...] = DEFAULT_THEMES
    signal_vocab_size: int = 40
    filler_vocab_size: int = 400
    # probability that a token inside a theme's stretch is a signal word
    signal_rate: float = 0.08
    min_length: int = 60
    max_length: int = 200
    split_sizes: dict = field(default_factory=lambda: {"train": 884, "dev": 196, "test": 578})
    # share of dev/test dialogues that carry more than one theme
    multi_label_rate: float = 0.4
    max_themes: int = 2
    mixing: str = "disjoint-segments"
    # smallest share of a multi-theme dialogue given to one theme
    min_share: float = 0.3
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "themes", tuple(self.themes))
        object.__setattr__(self, "split_sizes", dict(self.split_sizes))
        self.validate()

    def validate(self) -> None:
        if len(self.themes) < 2 or len(set(self.themes)) != len(self.themes):
            raise ValueError("need at least 2 distinct themes")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")
        if not 0.0 < self.signal_rate <= 1.0:
            raise ValueError("signal_rate must lie in (0, 1]")
        if not 0.0 <= self.multi_label_rate <= 1.0:
            raise ValueError("multi_label_rate must lie in [0, 1]")
        if not 1 <= self.min_length <= self.max_length:
            raise ValueError("need 1 <= min_length <= max_length")
        if not 2 <= self.max_themes <= len(self.themes):
            raise ValueError("max_themes must lie in [2, number of themes]")
        if not 0.0 < self.min_share * self.max_themes <= 1.0:
            raise ValueError("min_share * max_themes must lie in (0, 1]")
        if self.mixing not in MIXING_MODES:
            raise ValueError(f"mixing must be one of {MIXING_MODES}")
        if self.signal_vocab_size < 1 or self.filler_vocab_size < 1:
            raise ValueError("vocabulary sizes must be positive")
        unknown = set(self.split_sizes) - {"train", "dev", "test"}
        if unknown or any(n < 0 for n in self.split_sizes.values()):
            raise ValueError(f"bad split sizes {self.split_sizes}")

    @classmethod
    def from_dict(cls, data: dict) -> GenSpec:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown generator settings: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["themes"] = list(self.themes)
        return d


def load_genspec(path: str | Path) -> GenSpec:
    """Read a generator spec from a flat JSON object of settings."""
    return GenSpec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _pseudo_words(rng: np.random.Generator, count: int, syllables: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(syllables))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


@dataclass(frozen=True)
class Vocabulary:
    signal: dict[str, list[str]]
    filler: list[str]

    def theme_of(self, word: str) -> str | None:
        for theme, words in self.signal.items():
            if word in words:
                return theme
        return None


def build_vocabulary(spec: GenSpec) -> Vocabulary:
    rng = np.random.default_rng([spec.seed, 0])
    taken: set[str] = set()
    # signal words are three syllables, filler two, so the vocabularies never collide
    signal = {t: _pseudo_words(rng, spec.signal_vocab_size, 3, taken) for t in spec.themes}
    filler = _pseudo_words(rng, spec.filler_vocab_size, 2, taken)
    return Vocabulary(signal, filler)


def _zipf(size: int) -> np.ndarray:
    p = 1.0 / np.arange(1, size + 1)
    return p / p.sum()


def _theme_track(rng, labels: list[str], n: int, spec: GenSpec) -> list[str]:
    """Which gold theme owns each position."""
    k = len(labels)
    if k == 1:
        return labels * n
    shares = spec.min_share + (1 - spec.min_share * k) * rng.dirichlet(np.ones(k))
    if spec.mixing == "disjoint-segments":
        bounds = np.round(np.cumsum(shares) * n).astype(int)
        track, start = [], 0
        for label, end in zip(labels, bounds):
            track += [label] * (end - start)
            start = end
        return (track + [labels[-1]] * n)[:n]
    if spec.mixing == "interleaved":
        return list(rng.choice(labels, size=n, p=shares))
    # co-mentioned: short alternating windows
    track = []
    while len(track) < n:
        label = labels[rng.choice(k, p=shares)]
        track += [label] * int(rng.integers(3, 9))
    return track[:n]


def generate_dialogue(rng: np.random.Generator, vocab: Vocabulary, spec: GenSpec, did: str, split: str,
                      labels: list[str]) -> Dialogue:
    n = int(rng.integers(spec.min_length, spec.max_length + 1))
    track = _theme_track(rng, labels, n, spec)
    planted = (rng.random(n) < spec.signal_rate) & (rng.random(n) >= spec.noise)
    signal_idx = rng.choice(spec.signal_vocab_size, size=n, p=_zipf(spec.signal_vocab_size))
    filler_idx = rng.choice(len(vocab.filler), size=n, p=_zipf(len(vocab.filler)))
    tokens = tuple(vocab.signal[theme][s] if keep else vocab.filler[f]
                   for theme, keep, s, f in zip(track, planted, signal_idx, filler_idx))
    return Dialogue(id=did, split=split, tokens=tokens, labels=frozenset(labels))


def generate(spec: GenSpec) -> Corpus:
    """Build a corpus from ``spec``; identical specs give identical corpora.

    Train dialogues always carry a single theme. Each dialogue draws from its
    own seed, derived from the generator seed and the dialogue's index.
    """
    vocab = build_vocabulary(spec)
    dialogues = []
    index = 0
    for split in ("train", "dev", "test"):
        for _ in range(spec.split_sizes.get(split, 0)):
            index += 1
            rng = np.random.default_rng([spec.seed, 1, index])
            k = 1
            if split != "train" and rng.random() < spec.multi_label_rate:
                k = int(rng.integers(2, spec.max_themes + 1))
            labels = [str(t) for t in rng.choice(spec.themes, size=k, replace=False)]
            dialogues.append(generate_dialogue(rng, vocab, spec, f"{split}-{index:05d}", split, labels))
    return Corpus(tuple(spec.themes), tuple(dialogues))
