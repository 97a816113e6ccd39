import json

import numpy as np
import pytest

from multitheme import cli
from multitheme.corpus import load_corpus
from multitheme.density import read_skeleton_csv
from multitheme.features import extract_features, load_feature_space
from multitheme.metrics import evaluate

GEN = {"split_sizes": {"train": 210, "dev": 100, "test": 60}, "noise": 0.2, "seed": 11,
       "multi_label_rate": 0.0}
TUNE = ["--n-subsets", "4", "--subset-size", "50", "--grid-step", "0.05"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    gen = out / "gen.json"
    gen.write_text(json.dumps(GEN), encoding="utf-8")
    assert cli.main(["generate", "--config", str(gen), "--out", str(out)]) == 0
    corpus = str(out / "corpus.jsonl")
    assert cli.main(["build-features", "--corpus", corpus, "--out", str(out)]) == 0
    assert cli.main(["tune", "--corpus", corpus, "--out", str(out), *TUNE]) == 0
    assert cli.main(["classify", "--corpus", corpus, "--out", str(out)]) == 0
    assert cli.main(["evaluate", "--corpus", corpus, "--out", str(out)]) == 0
    return out


def test_outputs_exist(workdir):
    for name in ["corpus.jsonl", "features.tsv", "params-cosine.txt", "params-density.txt", "hypotheses.jsonl",
                 "report.txt", "report.kv", "breakdown-cosine.csv", "breakdown-density.csv"]:
        assert (workdir / name).exists(), name


def test_feature_counts_match_recount(workdir, capsys):
    corpus = load_corpus(workdir / "corpus.jsonl")
    cli.main(["build-features", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(workdir / "recount")])
    printed = dict(line.split(": ", 1) for line in capsys.readouterr().out.splitlines() if ": " in line)
    # independent recount with sliding windows over the raw train text
    attested = set()
    for d in corpus.split("train"):
        toks = d.tokens
        attested |= {(w,) for w in toks}
        attested |= {(a, b, 0) for a, b in zip(toks, toks[1:])}
        attested |= {(a, b, 1) for a, b in zip(toks, toks[2:])}
    assert int(printed["attested features"]) == len(attested)
    assert int(printed["unigram lexicon"]) == sum(len(f) == 1 for f in attested)
    assert int(printed["attested features"]) > int(printed["unigram lexicon"])
    space = load_feature_space(workdir / "recount" / "features.tsv")
    assert int(printed["selected features"].split()[0]) == len(space)


def test_vacuous_thresholds_keep_attested(tmp_path, workdir, capsys):
    code = cli.main(["build-features", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(tmp_path),
                     "--min-g", str(1 / 7), "--min-df", "1"])
    assert code == 0
    printed = dict(line.split(": ", 1) for line in capsys.readouterr().out.splitlines() if ": " in line)
    assert printed["selected features"].split()[0] == printed["attested features"]


def test_infinite_min_df_errors(tmp_path, workdir, capsys):
    code = cli.main(["build-features", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(tmp_path),
                     "--min-df", "inf"])
    assert code != 0
    assert "selection emptied theme vector" in capsys.readouterr().err


def test_tuned_params_provenance(workdir):
    params = cli.read_keyvalue(workdir / "params-cosine.txt")
    assert {"rho", "v", "grid_step", "seed", "dev_fingerprint", "subsets_fingerprint", "reject_margin"} <= set(params)
    assert 0 <= float(params["rho"]) <= 1
    dens = cli.read_keyvalue(workdir / "params-density.txt")
    assert float(dens["lambda"]) in {1.0, 1.05, 1.1, 1.2, 1.5, 2.0, 2.8}


def test_separable_tuning_reaches_perfect_dev(tmp_path):
    gen = tmp_path / "gen.json"
    gen.write_text(json.dumps({"split_sizes": {"train": 140, "dev": 60, "test": 10}, "noise": 0.0,
                               "multi_label_rate": 0.0, "signal_rate": 0.3, "seed": 2}), encoding="utf-8")
    corpus = str(tmp_path / "corpus.jsonl")
    assert cli.main(["generate", "--config", str(gen), "--out", str(tmp_path)]) == 0
    assert cli.main(["build-features", "--corpus", corpus, "--out", str(tmp_path)]) == 0
    assert cli.main(["tune", "--corpus", corpus, "--out", str(tmp_path), "--method", "cosine",
                     "--n-subsets", "3", "--subset-size", "30"]) == 0
    params = cli.read_keyvalue(tmp_path / "params-cosine.txt")
    assert float(params["mean_subset_fscore"]) == 1.0
    assert cli.main(["classify", "--corpus", corpus, "--out", str(tmp_path), "--method", "cosine",
                     "--split", "dev"]) == 0
    records = cli.read_hypotheses(tmp_path / "hypotheses.jsonl")
    dev = load_corpus(corpus).split("dev")
    assert evaluate({r["id"]: r["cosine"]["hypothesis"] for r in records}, dev).fscore == 1.0


def test_classification_records(workdir):
    records = cli.read_hypotheses(workdir / "hypotheses.jsonl")
    corpus = load_corpus(workdir / "corpus.jsonl")
    assert [r["id"] for r in records] == sorted(d.id for d in corpus.split("test"))
    for r in records:
        for method in ("cosine", "density"):
            rec = r[method]
            assert set(rec) == {"scores", "hypothesis", "status", "close_scores"}
            assert list(rec["scores"]) == list(corpus.themes)
            assert rec["status"] == "ok"
            assert rec["hypothesis"]


def test_clean_mono_label_end_to_end(tmp_path):
    gen = tmp_path / "gen.json"
    gen.write_text(json.dumps({"split_sizes": {"train": 210, "dev": 100, "test": 60}, "noise": 0.0,
                               "multi_label_rate": 0.0, "signal_rate": 0.25, "seed": 3}), encoding="utf-8")
    corpus = str(tmp_path / "corpus.jsonl")
    for argv in (["generate", "--config", str(gen)], ["build-features", "--corpus", corpus],
                 ["tune", "--corpus", corpus, *TUNE], ["classify", "--corpus", corpus]):
        assert cli.main([*argv, "--out", str(tmp_path)]) == 0
    gold = {d.id: d.labels for d in load_corpus(corpus).split("test")}
    for r in cli.read_hypotheses(tmp_path / "hypotheses.jsonl"):
        assert set(r["cosine"]["hypothesis"]) == gold[r["id"]]
        assert set(r["density"]["hypothesis"]) == gold[r["id"]]


def test_report_equals_direct_metrics(workdir):
    records = cli.read_hypotheses(workdir / "hypotheses.jsonl")
    corpus = load_corpus(workdir / "corpus.jsonl")
    kv = cli.read_keyvalue(workdir / "report.kv")
    for method in ("cosine", "density"):
        direct = evaluate({r["id"]: r[method]["hypothesis"] for r in records}, corpus)
        for key in ("accuracy", "precision", "recall", "fscore"):
            assert kv[f"{method}.{key}"] == f"{getattr(direct, key):.6f}"
    table = (workdir / "report.txt").read_text(encoding="utf-8")
    assert "cos." in table and "dens." in table and "F-score" in table


def test_perfect_hypotheses_report_ones(tmp_path, workdir):
    corpus = load_corpus(workdir / "corpus.jsonl")
    lines = []
    for d in sorted(corpus.split("test"), key=lambda d: d.id):
        rec = {"scores": {}, "hypothesis": sorted(d.labels), "status": "ok", "close_scores": False}
        lines.append(json.dumps({"id": d.id, "cosine": rec}))
    (tmp_path / "hypotheses.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert cli.main(["evaluate", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(tmp_path)]) == 0
    kv = cli.read_keyvalue(tmp_path / "report.kv")
    assert all(kv[f"cosine.{k}"] == "1.000000" for k in ("accuracy", "precision", "recall", "fscore"))


def test_skeleton_files(workdir):
    corpus = load_corpus(workdir / "corpus.jsonl")
    did = corpus.split("test").ids[0]
    assert cli.main(["skeleton", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(workdir),
                     "--dialogue", did]) == 0
    for lam in ("1", "1.05", "2.8"):
        themes, density = read_skeleton_csv(workdir / f"skeleton-{did}-lambda{lam}.csv")
        assert themes == corpus.themes
        assert density.shape == (len(themes), len(corpus[did].tokens))
        if lam == "1":
            assert all(len(set(row)) == 1 for row in density)


def test_skeleton_planted_segments_peak_inside(tmp_path):
    gen = tmp_path / "gen.json"
    gen.write_text(json.dumps({"split_sizes": {"train": 210, "dev": 0, "test": 20}, "noise": 0.0,
                               "multi_label_rate": 1.0, "signal_rate": 0.3, "min_share": 0.4,
                               "min_length": 150, "seed": 5}), encoding="utf-8")
    corpus_path = str(tmp_path / "corpus.jsonl")
    assert cli.main(["generate", "--config", str(gen), "--out", str(tmp_path)]) == 0
    assert cli.main(["build-features", "--corpus", corpus_path, "--out", str(tmp_path)]) == 0
    from multitheme.syncorp import GenSpec, build_vocabulary
    vocab = build_vocabulary(GenSpec.from_dict(json.loads(gen.read_text())))
    corpus = load_corpus(corpus_path)
    for d in corpus.split("test").dialogues[:5]:
        assert cli.main(["skeleton", "--corpus", corpus_path, "--out", str(tmp_path), "--dialogue", d.id,
                         "--lambda", "1.05"]) == 0
        themes, density = read_skeleton_csv(tmp_path / f"skeleton-{d.id}-lambda1.05.csv")
        for theme in d.labels:
            # planted segment bounds: first and last position of that theme's signal words
            planted = [i for i, w in enumerate(d.tokens) if vocab.theme_of(w) == theme]
            peak = int(np.argmax(density[themes.index(theme)]))
            assert planted[0] <= peak <= planted[-1]


def test_unknown_dialogue_lists_nearest(workdir, capsys):
    code = cli.main(["skeleton", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(workdir),
                     "--dialogue", "test-9"])
    assert code != 0
    err = capsys.readouterr().err
    assert "unknown dialogue id" in err and "nearest ids: test-" in err


def test_empty_split_errors(tmp_path, workdir, capsys):
    corpus = load_corpus(workdir / "corpus.jsonl")
    from multitheme.corpus import Corpus, save_corpus
    path = tmp_path / "notest.jsonl"
    save_corpus(Corpus(corpus.themes, tuple(d for d in corpus if d.split != "test")), path)
    (tmp_path / "features.tsv").write_text((workdir / "features.tsv").read_text())
    code = cli.main(["classify", "--corpus", str(path), "--out", str(tmp_path), "--rho", "0.5", "--v", "0.1",
                     "--lambda", "1.05"])
    assert code != 0
    assert "no test dialogues" in capsys.readouterr().err


def test_classify_without_params_errors(tmp_path, workdir, capsys):
    (tmp_path / "features.tsv").write_text((workdir / "features.tsv").read_text())
    code = cli.main(["classify", "--corpus", str(workdir / "corpus.jsonl"), "--out", str(tmp_path)])
    assert code != 0
    assert "run tune" in capsys.readouterr().err


def test_flags_override_config(tmp_path, workdir):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"corpus": str(workdir / "corpus.jsonl"), "min_g": 0.9, "min_df": 3}))
    assert cli.main(["build-features", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["build-features", "--config", str(cfg), "--min-df", "5", "--out", str(tmp_path / "b")]) == 0
    a = load_feature_space(tmp_path / "a" / "features.tsv")
    b = load_feature_space(tmp_path / "b" / "features.tsv")
    assert (a.min_G, a.min_df) == (0.9, 3)
    assert (b.min_G, b.min_df) == (0.9, 5)


def test_missing_corpus_file(tmp_path, capsys):
    assert cli.main(["build-features", "--corpus", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path)]) != 0
    assert "error:" in capsys.readouterr().err
