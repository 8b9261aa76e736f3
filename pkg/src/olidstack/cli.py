"""Command-line entry point: preprocess, train, predict, evaluate."""

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .config import HELP, RunConfig, field_types, load_config
from .ensemble import EnsembleModel, ExternalScores, MissingExternalScore, train_ensemble
from .evaluation import (
    LABELS,
    MODES,
    TASKS,
    DatasetError,
    cascade_predict,
    evaluate_files,
    load_olid,
    macro_f1,
    write_olid,
    write_predictions,
)
from .preprocess import Preprocessor


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resource_flags(p: argparse.ArgumentParser) -> None:
    for key in ("emoji_map", "emoticons", "unigrams", "bigrams"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, metavar="PATH", help=HELP[key])


def _preprocessor(args) -> Preprocessor:
    return Preprocessor.from_paths(args.emoji_map, args.emoticons, args.unigrams, args.bigrams)


def _load_externals(paths):
    paths = [p for p in paths if p]
    if not paths:
        return None
    return ExternalScores.merge([ExternalScores.load(p) for p in paths])


def cmd_preprocess(args) -> int:
    data = load_olid(args.input)
    pre = _preprocessor(args)
    texts = [" ".join(pre(r.tweet).tokens) for r in data]
    write_olid(data.with_texts(texts), args.output)
    _log(f"preprocessed {len(data)} rows -> {args.output}")
    return 0


def _report(name, gold, pred, task) -> None:
    rep = macro_f1(gold, pred, LABELS[task])
    print(f"[{name}] task {task}")
    print(rep.table())
    print(rep.key_values())


def cmd_train(args) -> int:
    overrides = {f.name: getattr(args, f.name, None) for f in fields(RunConfig)}
    cfg = load_config(args.config, overrides)
    cfg.validate()
    pre = Preprocessor.from_paths(cfg.emoji_map, cfg.emoticons, cfg.unigrams, cfg.bigrams)
    external = _load_externals(cfg.external_paths())
    specs = cfg.view_specs()

    data = load_olid(cfg.train).labelled(cfg.task)
    streams = [pre(r.tweet) for r in data]
    _log(f"training task {cfg.task} on {len(data)} rows with {len(specs)} view(s)")
    model = train_ensemble(
        streams, data.labels(cfg.task), specs, external,
        k_folds=cfg.k_folds, meta_reg=cfg.effective_meta_reg, meta_C=cfg.effective_meta_C,
        seed=cfg.seed, tol=cfg.tol, max_iter=cfg.max_iter, task=cfg.task, n_jobs=cfg.n_jobs)
    model.save(cfg.model_dir)
    _log(f"wrote {cfg.model_dir}")

    for name in ("dev", "test"):
        path = getattr(cfg, name)
        if path is None:
            continue
        split = load_olid(path).labelled(cfg.task)
        if not len(split):
            _log(f"{name}: no task {cfg.task} labels, skipped")
            continue
        labels, _ = model.predict_many([pre(r.tweet) for r in split], external)
        _report(name, split.labels(cfg.task), labels, cfg.task)
    return 0


def _load_models(model_dir: Path):
    if (model_dir / "manifest.txt").is_file():
        model = EnsembleModel.load(model_dir)
        return {model.task: model}, False
    models = {t: EnsembleModel.load(model_dir / t) for t in TASKS if (model_dir / t / "manifest.txt").is_file()}
    if not models:
        raise ValueError(f"{model_dir}: neither an ensemble directory nor a parent of A/B/C ensembles")
    return models, True


def cmd_predict(args) -> int:
    models, multi = _load_models(Path(args.model_dir))
    data = load_olid(args.input)
    external = _load_externals(args.external or [])
    externals = {t: external for t in models}
    preds = cascade_predict(models, data, externals, args.mode, _preprocessor(args))
    out = Path(args.output)
    if multi:
        out.mkdir(parents=True, exist_ok=True)
        for task, rows in preds.items():
            write_predictions(out / f"subtask_{task.lower()}.tsv", rows)
            _log(f"task {task}: {len(rows)} predictions -> {out / f'subtask_{task.lower()}.tsv'}")
    else:
        (task, rows), = preds.items()
        write_predictions(out, rows)
        _log(f"task {task}: {len(rows)} predictions -> {out}")
    return 0


def cmd_evaluate(args) -> int:
    rep = evaluate_files(args.gold, args.pred, args.task)
    print(rep.table())
    print(rep.key_values())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="olidstack", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="normalize the tweet column of an OLID TSV")
    p.add_argument("input", help="OLID TSV to read")
    p.add_argument("output", help="OLID TSV to write, tweets replaced by space-joined tokens")
    _resource_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train one sub-task ensemble",
                       description="Settings come from --config and are overridden by flags.")
    p.add_argument("--config", metavar="PATH", help="key = value settings file")
    types = field_types()
    for f in fields(RunConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=types[f.name],
                       default=None, help=f"{HELP[f.name]} (default: {f.default})")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write submission-format predictions")
    p.add_argument("--model-dir", required=True,
                   help="an ensemble directory, or a directory holding A/, B/, C/ ensembles")
    p.add_argument("--input", required=True, help="OLID TSV with the tweets to label")
    p.add_argument("--external", action="append", metavar="PATH",
                   help="external score TSV (repeatable)")
    p.add_argument("--output", required=True,
                   help="prediction TSV; a directory when --model-dir holds several tasks")
    p.add_argument("--mode", choices=MODES, default="gold-gated", help=HELP["mode"])
    _resource_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="macro-F1 of a prediction file against gold labels")
    p.add_argument("gold", help="OLID TSV with gold labels")
    p.add_argument("pred", help="prediction TSV (id<TAB>label)")
    p.add_argument("--task", choices=TASKS, required=True)
    p.set_defaults(func=cmd_evaluate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, MissingExternalScore, ValueError, OSError) as err:
        _log(f"error: {err}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
