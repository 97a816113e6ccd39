import json

import pytest

from multitheme.corpus import (DEFAULT_THEMES, Corpus, CorpusError, dump_corpus, load_corpus, make_dialogue,
                               normalize_token, sample_dev_subsets, save_corpus, tokenize)

from conftest import corpus_from


@pytest.mark.parametrize("raw, expected", [
    ("Opera", "opera"),
    ("9", "9"),
    ("là-bas,", "là-bas"),
    ("«Bonjour»", "bonjour"),
    ("l'arrêt.", "l'arrêt"),
    ("...", ""),
])
def test_normalize_token(raw, expected):
    assert normalize_token(raw) == expected


def test_normalize_token_composes_unicode():
    # "e" + combining acute folds to the precomposed form
    assert normalize_token("Café") == "café"


def test_tokenize_drops_punctuation_only_tokens():
    assert tokenize("Fare is 9 euros 10 , cash !") == ("fare", "is", "9", "euros", "10", "cash")


def _write(tmp_path, lines, themes=("itinerary", "fine", "time_schedules")):
    path = tmp_path / "corpus.jsonl"
    header = json.dumps({"format": "multitheme-corpus", "version": 1, "themes": list(themes)})
    path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
    return path


def _rec(did, split="dev", labels=("fine",), text="you must pay a fine"):
    return json.dumps({"id": did, "split": split, "labels": list(labels), "text": text})


def test_load_three_records(tmp_path):
    path = _write(tmp_path, [_rec("a", "train"), _rec("b"), _rec("c", "test", ["fine", "itinerary"])])
    corpus = load_corpus(path)
    assert len(corpus) == 3
    assert corpus.themes == ("fine", "itinerary", "time_schedules")
    assert corpus["a"].tokens == ("you", "must", "pay", "a", "fine")
    assert corpus["c"].labels == {"fine", "itinerary"}


def test_unknown_theme(tmp_path):
    path = _write(tmp_path, [_rec("a"), _rec("b", labels=["weather"])])
    with pytest.raises(CorpusError, match="unknown theme 'weather'") as err:
        load_corpus(path)
    assert ":3:" in str(err.value)


def test_empty_dialogue(tmp_path):
    path = _write(tmp_path, [_rec("a", text=" ,, ")])
    with pytest.raises(CorpusError, match="empty dialogue"):
        load_corpus(path)


def test_malformed_line_reports_line_number(tmp_path):
    path = _write(tmp_path, [_rec("a"), "{not json"])
    with pytest.raises(CorpusError, match=r":3: malformed record"):
        load_corpus(path)


def test_missing_field(tmp_path):
    path = _write(tmp_path, [json.dumps({"id": "a", "split": "dev", "labels": ["fine"]})])
    with pytest.raises(CorpusError, match="missing field 'text'"):
        load_corpus(path)


def test_duplicate_id(tmp_path):
    path = _write(tmp_path, [_rec("a"), _rec("a")])
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(path)


def test_multilabel_train_rejected(tmp_path):
    path = _write(tmp_path, [_rec("a", "train", ["fine", "itinerary"])])
    with pytest.raises(CorpusError, match="exactly one label"):
        load_corpus(path)


def test_theme_names_case_normalized(tmp_path):
    path = _write(tmp_path, [_rec("a", labels=["FINE"])], themes=("Fine", "Itinerary"))
    corpus = load_corpus(path)
    assert corpus.themes == ("fine", "itinerary")
    assert corpus["a"].labels == {"fine"}


def test_default_inventory_has_seven_themes():
    assert len(DEFAULT_THEMES) == 7


def test_round_trip(tmp_path, small_corpus):
    path = tmp_path / "c.jsonl"
    save_corpus(small_corpus, path)
    again = load_corpus(path)
    assert again == small_corpus
    assert dump_corpus(again) == path.read_text(encoding="utf-8")


def test_split_and_label_matrix():
    corpus = corpus_from([("x", "train", ["a"], "w"), ("y", "dev", ["b", "c"], "w w")])
    assert corpus.split("dev").ids == ["y"]
    assert corpus.label_matrix().tolist() == [[True, False, False], [False, True, True]]


def _dev_corpus(n_multi, n_single):
    records = [(f"m{i:03d}", "dev", ["a", "b"], "w") for i in range(n_multi)]
    records += [(f"s{i:03d}", "dev", ["a"], "w") for i in range(n_single)]
    return corpus_from(records)


def test_subsets_default_shape():
    corpus = _dev_corpus(40, 156)
    subsets = sample_dev_subsets(corpus, k=20, size=98, seed=3)
    assert len(subsets) == 20
    assert all(len(s) == 98 for s in subsets)


def test_subsets_exhaustive():
    corpus = _dev_corpus(5, 7)
    (subset,) = sample_dev_subsets(corpus, k=1, size=12, seed=0)
    assert subset == set(corpus.ids)


def test_subsets_stratified_half():
    corpus = _dev_corpus(20, 20)
    for subset in sample_dev_subsets(corpus, k=10, size=10, seed=1):
        assert sum(corpus[i].is_multilabel for i in subset) == 5


@pytest.mark.parametrize("n_multi, n_single, size", [(13, 50, 17), (1, 30, 5), (29, 3, 9), (0, 10, 4)])
def test_subsets_stratification_bound(n_multi, n_single, size):
    corpus = _dev_corpus(n_multi, n_single)
    frac = n_multi / (n_multi + n_single)
    for subset in sample_dev_subsets(corpus, k=15, size=size, seed=2):
        assert len(subset) == size
        count = sum(corpus[i].is_multilabel for i in subset)
        assert abs(count - round(size * frac)) <= 1


def test_subsets_deterministic():
    corpus = _dev_corpus(30, 70)
    assert sample_dev_subsets(corpus, 5, 20, seed=9) == sample_dev_subsets(corpus, 5, 20, seed=9)
    assert sample_dev_subsets(corpus, 5, 20, seed=9) != sample_dev_subsets(corpus, 5, 20, seed=10)


def test_subsets_too_small():
    with pytest.raises(CorpusError, match="fewer than subset size"):
        sample_dev_subsets(_dev_corpus(2, 3), k=1, size=6)


def test_corpus_rejects_unknown_label():
    with pytest.raises(CorpusError, match="unknown theme"):
        Corpus(("a",), (make_dialogue("x", "dev", ["z"], "w"),))
