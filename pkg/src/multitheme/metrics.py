"""Multi-label recall, precision, F-score and accuracy, plus the close-score rejection rule."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Collection, Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Dialogue


@dataclass(frozen=True)
class DialogueResult:
    id: str
    gold: frozenset[str]
    hypothesis: frozenset[str]
    rejected: bool

    @property
    def n_correct(self) -> int:
        return len(self.gold & self.hypothesis)

    @property
    def recall(self) -> float:
        return self.n_correct / len(self.gold)

    @property
    def precision(self) -> float:
        return self.n_correct / len(self.hypothesis) if self.hypothesis else 0.0

    @property
    def accuracy(self) -> float:
        return self.n_correct / len(self.gold | self.hypothesis)


@dataclass(frozen=True)
class EvalReport:
    recall: float
    precision: float
    fscore: float
    accuracy: float
    n_dialogues: int
    n_rejected: int
    rows: tuple[DialogueResult, ...] = field(repr=False)

    @property
    def n_retained(self) -> int:
        return self.n_dialogues - self.n_rejected

    @property
    def rejection_rate(self) -> float:
        return self.n_rejected / self.n_dialogues

    def as_dict(self) -> dict[str, float | int]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "fscore": self.fscore,
            "n_dialogues": self.n_dialogues,
            "n_rejected": self.n_rejected,
            "rejection_rate": self.rejection_rate,
        }

    def to_keyvalue(self, prefix: str = "") -> str:
        return "".join(f"{prefix}{k} = {_fmt(v)}\n" for k, v in self.as_dict().items())

    def breakdown_csv(self) -> str:
        """Per-dialogue rows: gold, hypothesis, overlap size and the three ratio terms."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "gold", "hypothesis", "n_correct", "recall_term", "precision_term",
                         "accuracy_term", "rejected"])
        for r in self.rows:
            writer.writerow([r.id, " ".join(sorted(r.gold)), " ".join(sorted(r.hypothesis)), r.n_correct,
                             _fmt(r.recall), _fmt(r.precision), _fmt(r.accuracy), int(r.rejected)])
        return buf.getvalue()


def _fmt(x) -> str:
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def fscore(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


def _gold_map(gold: Corpus | Mapping[str, Collection[str]] | Iterable[Dialogue]) -> dict[str, frozenset[str]]:
    if isinstance(gold, Mapping):
        return {k: frozenset(v) for k, v in gold.items()}
    return {d.id: d.labels for d in gold}


def evaluate(hypotheses: Mapping[str, Collection[str]],
             gold: Corpus | Mapping[str, Collection[str]] | Iterable[Dialogue],
             rejected: Collection[str] = ()) -> EvalReport:
    """Score hypothesis sets against gold labels.

    A dialogue is rejected when its hypothesis set is empty or its id is in
    ``rejected``; rejected dialogues are listed in the report but left out of
    all four averages. F is the harmonic mean of the averaged P and R.
    """
    if not hypotheses:
        raise ValueError("empty evaluation set")
    gold_labels = _gold_map(gold)
    rejected = set(rejected)

    rows = []
    for did in sorted(hypotheses):
        if did not in gold_labels:
            raise KeyError(f"no gold labels for dialogue {did!r}")
        g = gold_labels[did]
        if not g:
            raise ValueError(f"dialogue {did!r} has an empty gold label set")
        h = frozenset(hypotheses[did])
        rows.append(DialogueResult(did, g, h, rejected=not h or did in rejected))

    kept = [r for r in rows if not r.rejected]
    if kept:
        R = math.fsum(r.recall for r in kept) / len(kept)
        P = math.fsum(r.precision for r in kept) / len(kept)
        A = math.fsum(r.accuracy for r in kept) / len(kept)
    else:
        R = P = A = 0.0
    return EvalReport(recall=R, precision=P, fscore=fscore(P, R), accuracy=A,
                      n_dialogues=len(rows), n_rejected=len(rows) - len(kept), rows=tuple(rows))


def subset_fscores(members: np.ndarray, gold: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """F-score of many candidate decisions on many dialogue subsets at once.

    members: boolean (..., D, C) hypothesis sets for D dialogues under each
    candidate setting; gold: boolean (D, C); subsets: (K, D) 0/1 indicator of
    subset membership. Returns (..., K). Matches :func:`evaluate` (empty
    hypotheses are rejected) up to floating-point summation order.
    """
    inter = (members & gold).sum(axis=-1)
    size = members.sum(axis=-1)
    retained = size > 0
    p_term = np.divide(inter, size, out=np.zeros(inter.shape), where=retained)
    r_term = np.where(retained, inter / gold.sum(axis=-1), 0.0)
    S = subsets.T.astype(float)
    n_kept = retained.astype(float) @ S
    with np.errstate(divide="ignore", invalid="ignore"):
        P = np.where(n_kept > 0, (p_term @ S) / n_kept, 0.0)
        R = np.where(n_kept > 0, (r_term @ S) / n_kept, 0.0)
        F = np.where(P + R > 0, 2 * P * R / (P + R), 0.0)
    return F


def reject_close_scores(scores: np.ndarray | Iterable[float], margin: float) -> bool:
    """True when the runner-up score is within ``margin`` (relative) of the best one."""
    if not 0.0 <= margin <= 1.0:
        raise ValueError("margin must lie in [0, 1]")
    ratio = top_two_ratio(scores)
    return ratio >= 1.0 - margin


def top_two_ratio(scores: np.ndarray | Iterable[float]) -> float:
    """second-best / best score; 1.0 (a tie) when every score is zero."""
    s = np.sort(np.asarray(list(scores) if not isinstance(scores, np.ndarray) else scores, dtype=float))[::-1]
    if s.size == 0 or s[0] <= 0:
        return 1.0
    second = s[1] if s.size > 1 else 0.0
    return float(second / s[0])


def tune_rejection_margin(score_vectors: Iterable[np.ndarray], target_rate: float = 0.10) -> float:
    """Smallest margin whose rejection rate on ``score_vectors`` reaches ``target_rate``."""
    ratios = np.sort([top_two_ratio(s) for s in score_vectors])[::-1]
    if ratios.size == 0:
        raise ValueError("no score vectors to tune on")
    k = int(math.floor(target_rate * ratios.size + 0.5))
    if k == 0:
        return 0.0
    # nudge so the k-th ratio itself survives the 1 - (1 - r) round trip
    return float(min(1.0, max(0.0, 1.0 - ratios[k - 1] + 1e-12)))


def format_table(reports: Mapping[str, EvalReport], title: str = "") -> str:
    """Plain-text table with one column per method and one row per measure."""
    names = list(reports)
    width = max([10, *map(len, names)])
    header = f"{title:<12}" + "".join(f"{n:>{width + 2}}" for n in names)
    lines = [header, "-" * len(header)]
    for label, attr in [("Accuracy", "accuracy"), ("Precision", "precision"),
                        ("Recall", "recall"), ("F-score", "fscore")]:
        lines.append(f"{label:<12}" + "".join(f"{getattr(reports[n], attr):>{width + 2}.4f}" for n in names))
    lines.append(f"{'Rejected':<12}" + "".join(
        f"{f'{reports[n].n_rejected}/{reports[n].n_dialogues}':>{width + 2}}" for n in names))
    return "\n".join(lines) + "\n"
