"""Dialogue corpora: loading, normalization, validation and dev-subset sampling.

Corpus files are UTF-8 JSON lines. The first record is a header declaring the
theme inventory::

    {"format": "multitheme-corpus", "version": 1, "themes": ["fine", "itinerary", ...]}

and every following line holds one dialogue::

    {"id": "d0001", "split": "train", "labels": ["itinerary"], "text": "bonjour je voudrais ..."}
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_NAME = "multitheme-corpus"
FORMAT_VERSION = 1

SPLITS = ("train", "dev", "test")

DEFAULT_THEMES = (
    "itinerary",
    "lost_and_found",
    "time_schedules",
    "transportation_card",
    "traffic_state",
    "fine",
    "special_offers",
)


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent corpus contents."""


def normalize_token(raw: str) -> str:
    """Case-fold and NFC-normalize a raw token, stripping surrounding punctuation.

    Returns the empty string when nothing is left; callers drop such tokens.
    Internal punctuation (hyphens, apostrophes) is kept.
    """
    text = unicodedata.normalize("NFC", raw).lower()
    start, end = 0, len(text)
    while start < end and _is_strippable(text[start]):
        start += 1
    while end > start and _is_strippable(text[end - 1]):
        end -= 1
    return text[start:end]


def _is_strippable(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> tuple[str, ...]:
    tokens = (normalize_token(raw) for raw in text.split())
    return tuple(tok for tok in tokens if tok)


def normalize_theme(name: str) -> str:
    return unicodedata.normalize("NFC", name).strip().lower()


@dataclass(frozen=True)
class Dialogue:
    id: str
    split: str
    tokens: tuple[str, ...]
    labels: frozenset[str]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def is_multilabel(self) -> bool:
        return len(self.labels) > 1


@dataclass(frozen=True)
class Corpus:
    """An immutable set of dialogues over a closed theme inventory.

    ``themes`` is kept sorted by name so that every theme-indexed array in the
    package shares the same column order, and ties broken "by index" are ties
    broken by theme name.
    """

    themes: tuple[str, ...]
    dialogues: tuple[Dialogue, ...]
    _by_id: dict[str, Dialogue] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        themes = tuple(sorted(normalize_theme(t) for t in self.themes))
        if not themes or any(not t for t in themes):
            raise CorpusError("theme inventory must be non-empty with non-empty names")
        if len(set(themes)) != len(themes):
            raise CorpusError(f"duplicate theme names in inventory: {themes}")
        object.__setattr__(self, "themes", themes)

        by_id = {}
        inventory = set(themes)
        for d in self.dialogues:
            if d.id in by_id:
                raise CorpusError(f"duplicate dialogue id {d.id!r}")
            _check_dialogue(d, inventory)
            by_id[d.id] = d
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    def __contains__(self, dialogue_id: str) -> bool:
        return dialogue_id in self._by_id

    def __getitem__(self, dialogue_id: str) -> Dialogue:
        return self._by_id[dialogue_id]

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.dialogues]

    def split(self, name: str) -> Corpus:
        """Sub-corpus holding only the dialogues of split ``name``."""
        if name not in SPLITS:
            raise CorpusError(f"unknown split {name!r}; expected one of {SPLITS}")
        return Corpus(self.themes, tuple(d for d in self.dialogues if d.split == name))

    def subset(self, ids: Iterable[str]) -> Corpus:
        wanted = set(ids)
        missing = wanted - self._by_id.keys()
        if missing:
            raise CorpusError(f"unknown dialogue ids: {sorted(missing)[:5]}")
        return Corpus(self.themes, tuple(d for d in self.dialogues if d.id in wanted))

    def theme_index(self, theme: str) -> int:
        return self.themes.index(theme)

    def label_matrix(self) -> np.ndarray:
        """Boolean (dialogues x themes) matrix of gold labels."""
        col = {t: j for j, t in enumerate(self.themes)}
        gold = np.zeros((len(self.dialogues), len(self.themes)), dtype=bool)
        for i, d in enumerate(self.dialogues):
            for label in d.labels:
                gold[i, col[label]] = True
        return gold


def _check_dialogue(d: Dialogue, inventory: set[str]) -> None:
    if d.split not in SPLITS:
        raise CorpusError(f"dialogue {d.id!r}: unknown split {d.split!r}")
    if not d.tokens:
        raise CorpusError(f"dialogue {d.id!r}: empty dialogue")
    if any(not tok for tok in d.tokens):
        raise CorpusError(f"dialogue {d.id!r}: empty token")
    if not d.labels:
        raise CorpusError(f"dialogue {d.id!r}: no theme labels")
    unknown = sorted(d.labels - inventory)
    if unknown:
        raise CorpusError(f"dialogue {d.id!r}: unknown theme {unknown[0]!r}")
    if d.split == "train" and len(d.labels) != 1:
        raise CorpusError(
            f"dialogue {d.id!r}: train dialogues must carry exactly one label, got {sorted(d.labels)}"
        )


def make_dialogue(id: str, split: str, labels: Iterable[str], text: str) -> Dialogue:
    return Dialogue(
        id=str(id),
        split=str(split),
        tokens=tokenize(text),
        labels=frozenset(normalize_theme(label) for label in labels),
    )


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    themes = None
    dialogues = []
    seen = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: malformed record (not an object)")

            if themes is None:
                if "themes" not in record:
                    raise CorpusError(f"{path}:{lineno}: malformed record (missing header with 'themes')")
                if record.get("format", FORMAT_NAME) != FORMAT_NAME:
                    raise CorpusError(f"{path}:{lineno}: unsupported format {record['format']!r}")
                themes = [normalize_theme(t) for t in record["themes"]]
                continue

            try:
                did, split, labels, text = (record[k] for k in ("id", "split", "labels", "text"))
            except KeyError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record (missing field {exc.args[0]!r})") from None
            if not isinstance(labels, list) or not isinstance(text, str):
                raise CorpusError(f"{path}:{lineno}: malformed record (bad field types)")
            if did in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate dialogue id {did!r}")
            seen.add(did)
            try:
                d = make_dialogue(did, split, labels, text)
                _check_dialogue(d, set(themes))
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
            dialogues.append(d)

    if themes is None:
        raise CorpusError(f"{path}: missing header record")
    return Corpus(tuple(themes), tuple(dialogues))


def dump_corpus(corpus: Corpus) -> str:
    lines = [json.dumps({"format": FORMAT_NAME, "version": FORMAT_VERSION, "themes": list(corpus.themes)},
                        ensure_ascii=False)]
    for d in corpus.dialogues:
        record = {"id": d.id, "split": d.split, "labels": sorted(d.labels), "text": " ".join(d.tokens)}
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dump_corpus(corpus), encoding="utf-8")


def sample_dev_subsets(corpus: Corpus, k: int = 20, size: int = 98, seed: int = 0) -> list[frozenset[str]]:
    """Draw ``k`` independent subsets of ``size`` dev dialogues.

    Each subset keeps the dev set's share of multi-label dialogues (rounded to
    the nearest count). Subsets never repeat a dialogue internally but may
    overlap one another.
    """
    if size < 2:
        raise CorpusError("subset size must be at least 2")
    dev = sorted((d for d in corpus if d.split == "dev"), key=lambda d: d.id)
    if len(dev) < size:
        raise CorpusError(f"dev split has {len(dev)} dialogues, fewer than subset size {size}")

    multi = [d.id for d in dev if d.is_multilabel]
    single = [d.id for d in dev if not d.is_multilabel]
    n_multi = math.floor(size * len(multi) / len(dev) + 0.5)
    n_multi = min(max(n_multi, size - len(single)), len(multi))

    rng = np.random.default_rng(seed)
    subsets = []
    for _ in range(k):
        picked = list(rng.choice(multi, n_multi, replace=False)) if n_multi else []
        picked += list(rng.choice(single, size - n_multi, replace=False)) if size > n_multi else []
        subsets.append(frozenset(str(x) for x in picked))
    return subsets
