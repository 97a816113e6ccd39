"""Batch command-line front end.

    multitheme generate        --out DIR [--config gen.json] [--seed N]
    multitheme build-features  --corpus FILE --out DIR [--min-g G] [--min-df N]
    multitheme tune            --corpus FILE --out DIR [--method M] [--grid-step S] [--seed N]
    multitheme classify        --corpus FILE --out DIR [--method M] [--rho R] [--v V] [--lambda L]
    multitheme evaluate        --corpus FILE --out DIR [--method M]
    multitheme skeleton        --corpus FILE --out DIR --dialogue ID [--lambda 1,1.05,2.8]

Every command reads and writes inside ``--out``. Options may also come from a
flat JSON ``--config`` file; command-line flags win over the file, which wins
over the built-in defaults.
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import sys
from pathlib import Path

from . import cosine as cos
from . import density as dens
from .corpus import Corpus, CorpusError, load_corpus, sample_dev_subsets, save_corpus
from .features import DEFAULT_MIN_DF, DEFAULT_MIN_G, SelectionError, attested_space, load_feature_space, \
    save_feature_space
from .metrics import evaluate, format_table, reject_close_scores, tune_rejection_margin
from .syncorp import GenSpec, generate, load_genspec

FEATURES_FILE = "features.tsv"
HYPOTHESES_FILE = "hypotheses.jsonl"
METHODS = ("cosine", "density")

DEFAULTS = {
    "method": "both",
    "min_g": DEFAULT_MIN_G,
    "min_df": DEFAULT_MIN_DF,
    "grid_step": 0.01,
    "seed": 0,
    "n_subsets": 20,
    "subset_size": 98,
    "reject_rate": 0.10,
    "split": "test",
    "lam": None,
    "rho": None,
    "v": None,
}


class CommandError(Exception):
    pass


def _methods(method: str) -> tuple[str, ...]:
    if method == "both":
        return METHODS
    if method not in METHODS:
        raise CommandError(f"unknown method {method!r}; expected cosine, density or both")
    return (method,)


def _lambdas(text) -> list[float]:
    if text is None:
        return []
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _fingerprint(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()[:16]


def _corpus_fingerprint(corpus: Corpus) -> str:
    return _fingerprint(*(f"{d.id}|{','.join(sorted(d.labels))}|{' '.join(d.tokens)}" for d in corpus))


def write_keyvalue(path: Path, values: dict) -> None:
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()), encoding="utf-8")


def read_keyvalue(path: Path) -> dict[str, str]:
    values = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _load(cfg) -> Corpus:
    if not cfg.corpus:
        raise CommandError("--corpus is required")
    return load_corpus(cfg.corpus)


def _space(cfg, corpus: Corpus):
    path = cfg.out / FEATURES_FILE
    if not path.exists():
        raise CommandError(f"{path} not found; run build-features first")
    space = load_feature_space(path)
    if space.themes != corpus.themes:
        raise CommandError("feature file and corpus disagree on the theme inventory")
    return space


def cmd_generate(cfg) -> None:
    spec = load_genspec(cfg.config_gen) if cfg.config_gen else GenSpec()
    if cfg.seed_given:
        spec = GenSpec.from_dict({**spec.to_dict(), "seed": cfg.seed})
    path = cfg.out / "corpus.jsonl"
    save_corpus(generate(spec), path)
    print(f"wrote {path}")


def cmd_build_features(cfg) -> None:
    corpus = _load(cfg)
    attested = attested_space(corpus)
    min_df = float(cfg.min_df)
    # an infinite coverage threshold keeps nothing; N + 1 says the same in integers
    space = attested.restrict(float(cfg.min_g), attested.N + 1 if min_df == float("inf") else int(min_df))
    save_feature_space(space, cfg.out / FEATURES_FILE)
    lexicon = sum(1 for t in attested.features if t.kind == "unigram")
    print(f"train dialogues: {attested.N}")
    print(f"unigram lexicon: {lexicon}")
    print(f"attested features: {len(attested)}")
    print(f"selected features: {len(space)} (min_G={space.min_G}, min_df={space.min_df})")
    print(f"wrote {cfg.out / FEATURES_FILE}")


def cmd_tune(cfg) -> None:
    corpus = _load(cfg)
    space = _space(cfg, corpus)
    dev = corpus.split("dev")
    if not len(dev):
        raise CommandError("corpus has no dev dialogues")
    subsets = sample_dev_subsets(corpus, int(cfg.n_subsets), int(cfg.subset_size), int(cfg.seed))
    provenance = {
        "grid_step": cfg.grid_step,
        "seed": cfg.seed,
        "n_subsets": cfg.n_subsets,
        "subset_size": cfg.subset_size,
        "dev_fingerprint": _corpus_fingerprint(dev),
        "features_fingerprint": _fingerprint((cfg.out / FEATURES_FILE).read_text(encoding="utf-8")),
        "subsets_fingerprint": _fingerprint(*(",".join(sorted(s)) for s in subsets)),
    }
    for method in _methods(cfg.method):
        if method == "cosine":
            (rho, v), objective = cos._tune(dev, space, subsets, float(cfg.grid_step), False)
            values = {"method": method, "rho": rho, "v": v}
            dev_scores = [cos.cosine_scores(d, space)[0] for d in dev]
        else:
            grid = _lambdas(cfg.lam) or list(dens.DEFAULT_LAMBDA_GRID)
            (lam, v), objective = dens._tune(dev, space, subsets, grid, float(cfg.grid_step))
            values = {"method": method, "lambda": lam, "v": v,
                      "lambda_grid": ",".join(repr(x) for x in sorted(set(grid)))}
            dev_scores = [dens.dominant_masses(dens.compute_skeleton(d, space, lam).density)[0] for d in dev]
        values["objective"] = repr(float(objective.max()))
        values["mean_subset_fscore"] = repr(float(objective.max()) / len(subsets))
        values["reject_target_rate"] = cfg.reject_rate
        values["reject_margin"] = repr(tune_rejection_margin(dev_scores, float(cfg.reject_rate)))
        values.update(provenance)
        path = cfg.out / f"params-{method}.txt"
        write_keyvalue(path, values)
        print(f"{method}: " + ", ".join(f"{k}={values[k]}" for k in values if k in ("rho", "lambda", "v")))
        print(f"wrote {path}")


def _params(cfg, method: str) -> dict[str, float]:
    path = cfg.out / f"params-{method}.txt"
    stored = read_keyvalue(path) if path.exists() else {}
    params = {}
    keys = ("rho", "v") if method == "cosine" else ("lambda", "v")
    for key in keys:
        override = cfg.rho if key == "rho" else cfg.v if key == "v" else (_lambdas(cfg.lam) or [None])[0]
        if override is not None:
            params[key] = float(override)
        elif key in stored:
            params[key] = float(stored[key])
        else:
            raise CommandError(f"no value for {key!r} ({path} missing); run tune or pass it on the command line")
    params["reject_margin"] = float(stored.get("reject_margin", 0.0))
    return params


def cmd_classify(cfg) -> None:
    corpus = _load(cfg)
    space = _space(cfg, corpus)
    part = corpus.split(cfg.split)
    if not len(part):
        raise CommandError(f"corpus has no {cfg.split} dialogues")
    methods = _methods(cfg.method)
    params = {m: _params(cfg, m) for m in methods}
    records = []
    for d in sorted(part, key=lambda d: d.id):
        record = {"id": d.id}
        for m in methods:
            p = params[m]
            if m == "cosine":
                decision = cos.classify_cosine(d, space, cos.CosineParams(p["rho"], p["v"]))
            else:
                decision = dens.classify_dialogue_density(d, space, dens.DensityParams(p["lambda"], p["v"]))
            record[m] = {
                "scores": {c: float(s) for c, s in zip(space.themes, decision.scores)},
                "hypothesis": sorted(decision.themes),
                "status": decision.status,
                "close_scores": bool(reject_close_scores(decision.scores, p["reject_margin"])),
            }
        records.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    path = cfg.out / HYPOTHESES_FILE
    path.write_text("\n".join(records) + "\n", encoding="utf-8")
    print(f"classified {len(records)} {cfg.split} dialogues with {', '.join(methods)}")
    print(f"wrote {path}")


def read_hypotheses(path: Path) -> list[dict]:
    if not path.exists():
        raise CommandError(f"{path} not found; run classify first")
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def cmd_evaluate(cfg) -> None:
    corpus = _load(cfg)
    records = read_hypotheses(cfg.out / HYPOTHESES_FILE)
    if not records:
        raise CommandError("hypothesis file is empty")
    present = [m for m in METHODS if m in records[0]]
    methods = [m for m in _methods(cfg.method) if m in present] if cfg.method != "both" else present
    if not methods:
        raise CommandError(f"hypothesis file holds none of the requested methods ({cfg.method})")
    missing = [r["id"] for r in records if r["id"] not in corpus]
    if missing:
        raise CommandError(f"hypotheses for unknown dialogues: {missing[:5]}")

    short = {"cosine": "cos.", "density": "dens."}
    plain, with_reject = {}, {}
    kv = []
    for m in methods:
        hyps = {r["id"]: r[m]["hypothesis"] for r in records}
        close = [r["id"] for r in records if r[m]["close_scores"]]
        plain[short[m]] = report = evaluate(hyps, corpus)
        with_reject[short[m]] = rejected = evaluate(hyps, corpus, rejected=close)
        kv.append(report.to_keyvalue(prefix=f"{m}."))
        kv.append(rejected.to_keyvalue(prefix=f"{m}.with_rejection."))
        (cfg.out / f"breakdown-{m}.csv").write_text(report.breakdown_csv(), encoding="utf-8")

    table = format_table(plain, title="all") + "\n" + format_table(with_reject, title="rejection")
    (cfg.out / "report.txt").write_text(table, encoding="utf-8")
    (cfg.out / "report.kv").write_text("".join(kv), encoding="utf-8")
    print(table, end="")


def cmd_skeleton(cfg) -> None:
    corpus = _load(cfg)
    space = _space(cfg, corpus)
    if not cfg.dialogue:
        raise CommandError("--dialogue is required")
    if cfg.dialogue not in corpus:
        near = difflib.get_close_matches(cfg.dialogue, corpus.ids, n=5, cutoff=0.0)
        raise CommandError(f"unknown dialogue id {cfg.dialogue!r}; nearest ids: {', '.join(near)}")
    dialogue = corpus[cfg.dialogue]
    for lam in _lambdas(cfg.lam) or [1.0, 1.05, 2.8]:
        skeleton = dens.compute_skeleton(dialogue, space, lam)
        path = cfg.out / f"skeleton-{cfg.dialogue}-lambda{lam:g}.csv"
        dens.export_skeleton(skeleton, path)
        print(f"wrote {path}")


COMMANDS = {
    "generate": cmd_generate,
    "build-features": cmd_build_features,
    "tune": cmd_tune,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "skeleton": cmd_skeleton,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multitheme", description="Multi-label theme identification.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        # defaults are None so that config-file values can fill the gaps
        p.add_argument("--corpus")
        p.add_argument("--config", help="flat JSON file of option values")
        p.add_argument("--method", choices=["cosine", "density", "both"], default=None)
        p.add_argument("--rho", type=float)
        p.add_argument("--v", type=float)
        p.add_argument("--lambda", dest="lam", help="a value, or a comma-separated list")
        p.add_argument("--min-g", dest="min_g", type=float)
        p.add_argument("--min-df", dest="min_df", type=float)
        p.add_argument("--grid-step", dest="grid_step", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--n-subsets", dest="n_subsets", type=int)
        p.add_argument("--subset-size", dest="subset_size", type=int)
        p.add_argument("--reject-rate", dest="reject_rate", type=float)
        p.add_argument("--split", choices=["train", "dev", "test"])
        p.add_argument("--dialogue")
    return parser


def resolve_config(args: argparse.Namespace) -> argparse.Namespace:
    file_values = {}
    if args.config:
        file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(file_values, dict):
            raise CommandError("config file must hold a JSON object")
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
        if "lambda" in file_values:
            file_values["lam"] = file_values.pop("lambda")

    cfg = argparse.Namespace(command=args.command)
    cfg.seed_given = args.seed is not None or "seed" in file_values
    keys = set(DEFAULTS) | {"corpus", "out", "dialogue"}
    for key in keys:
        flag = getattr(args, key, None)
        setattr(cfg, key, flag if flag is not None else file_values.get(key, DEFAULTS.get(key)))
    # generate reads the generator settings from --config itself
    cfg.config_gen = args.config if args.command == "generate" else None
    if not cfg.out:
        raise CommandError("--out is required")
    cfg.out = Path(cfg.out)
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg)
    except (CommandError, CorpusError, SelectionError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
