import pytest

from multitheme.corpus import Corpus, make_dialogue
from multitheme.features import select_features
from multitheme.syncorp import GenSpec, generate


def corpus_from(records, themes=("a", "b", "c")):
    """records: (id, split, labels, text) tuples."""
    return Corpus(tuple(themes), tuple(make_dialogue(*r) for r in records))


@pytest.fixture(scope="session")
def small_spec():
    return GenSpec(split_sizes={"train": 210, "dev": 100, "test": 60}, noise=0.2, seed=7)


@pytest.fixture(scope="session")
def small_corpus(small_spec):
    return generate(small_spec)


@pytest.fixture(scope="session")
def small_space(small_corpus):
    return select_features(small_corpus)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion (a criterion fails if any of its cases fail)."""
    outcome = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            name = dict(getattr(report, "user_properties", ())).get("criterion")
            if name is None or getattr(report, "when", "call") not in ("call", "setup"):
                continue
            ok = status == "passed"
            outcome[name] = outcome.get(name, True) and ok
    if outcome:
        terminalreporter.section("acceptance criteria")
        for name, ok in outcome.items():
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
