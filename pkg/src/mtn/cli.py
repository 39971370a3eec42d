"""Command-line surface: parse, gen-corpus, train, eval, embed, param-count,
ablate.

Errors exit nonzero with one machine-parsable JSON line on stderr. The
environment variable MTN_SEED supplies a global seed when --seed is absent.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .autodiff import DegenerateVector
from .evaluation import ScoredPair, accuracy, metrics_report
from .frontend import (
    LexError,
    ParseError,
    from_interchange,
    parse_source,
    to_interchange,
)
from .model import (
    ModelConfig,
    build_vocab,
    encode,
    init_params,
    load_model,
    param_count,
    save_model,
)
from .training import (
    AdamState,
    ClonePair,
    LabeledExample,
    clone_forward,
    down_sample,
    example_loss,
    fit,
    pair_loss,
    predict_class,
    sample_clone_pairs,
)
from .training import classify_forward as _classify_forward

ABLATION_MODULES = ("FuncDef", "For", "If", "While", "Seq")


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("MTN_SEED")
    return int(env) if env else 0


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, separators=(",", ":")))


# --- data assembly ------------------------------------------------------------


def _split_records(records, split: str):
    return [r for r in records if r["split"] == split]


def _classify_sets(records, seed: int, train_fraction: float):
    train = _split_records(records, "train")
    if train_fraction < 1.0:
        train = down_sample(train, train_fraction, seed,
                            stratify=lambda r: r["group"])
    to_examples = lambda rs: [LabeledExample(r["ast"], r["group"]) for r in rs]
    return (to_examples(train),
            to_examples(_split_records(records, "valid")),
            to_examples(_split_records(records, "test")))


def _clone_pair_sets(records, manifest, args):
    """Pair sets are seeded by the corpus seed, so an eval run rebuilds the
    exact pairs the training run validated against."""
    frag_splits = tuple(
        [(r["ast"], r["group"]) for r in _split_records(records, name)]
        for name in ("train", "valid", "test"))
    if getattr(args, "train_fraction", 1.0) < 1.0:
        train = down_sample(frag_splits[0], args.train_fraction,
                            manifest["seed"], stratify=lambda f: f[1])
        frag_splits = (train, frag_splits[1], frag_splits[2])
    return sample_clone_pairs(
        frag_splits, args.train_pos, args.train_neg, args.eval_pairs,
        seed=manifest["seed"])


def _score_pairs(pairs, store, config) -> list[ScoredPair]:
    scored = []
    cache: dict[int, object] = {}
    for pair in pairs:
        scores = []
        for ast in (pair.ast1, pair.ast2):
            if id(ast) not in cache:
                cache[id(ast)] = encode(ast, store, config)
            scores.append(cache[id(ast)])
        try:
            score = clone_forward(scores[0], scores[1]).item()
        except DegenerateVector:
            score = 0.0
        scored.append(ScoredPair(score, pair.label))
    return scored


def _classify_accuracy(examples, store, config) -> float:
    preds = []
    for ex in examples:
        logits = _classify_forward(encode(ex.ast, store, config), *store.head)
        preds.append(predict_class(logits))
    return accuracy(preds, [ex.label for ex in examples])


def _train_model(task, records, manifest, config, args, log_fn=None):
    store = init_params(config)
    state = AdamState(store, lr=args.lr)
    if task == "classify":
        train, valid, _test = _classify_sets(records, config.seed,
                                             args.train_fraction)
        result = fit(train, store, state, config, example_loss,
                     lambda s: _classify_accuracy(valid, s, config),
                     epochs=args.epochs, batch_size=args.batch,
                     patience=args.patience, log_fn=log_fn)
    else:
        train_pairs, valid_pairs, _test_pairs = _clone_pair_sets(
            records, manifest, args)

        def val_f1(s):
            scored = _score_pairs(valid_pairs, s, config)
            from .evaluation import binary_metrics
            return binary_metrics(scored)["f1"]

        result = fit(train_pairs, store, state, config, pair_loss, val_f1,
                     epochs=args.epochs, batch_size=args.batch,
                     patience=args.patience, log_fn=log_fn)
    return store, state, result


def _make_config(args, manifest, records) -> ModelConfig:
    seed = _resolve_seed(args.seed)
    mode = "with-ids" if args.with_ids else "types-only"
    train_asts = (r["ast"] for r in records if r["split"] == "train")
    vocab = build_vocab(train_asts, mode)
    disabled = tuple(m for m in (args.disable_modules or "").split(",") if m)
    n_classes = manifest["n_classes"] if manifest["task"] == "classify" else None
    return ModelConfig(
        variant=args.variant, hidden=args.hidden, vocab=vocab,
        identifier_mode=mode, disabled_modules=disabled, seed=seed,
        n_classes=n_classes)


# --- subcommands -----------------------------------------------------------------


def cmd_parse(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    ast = parse_source(source)
    doc = to_interchange(ast)
    if args.emit_ast:
        Path(args.emit_ast).write_text(doc + "\n", encoding="utf-8")
    else:
        print(doc)
    return 0


def cmd_gen_corpus(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.task == "classify":
        spec = corpus_mod.CorpusSpec(
            task="classify", n_classes=args.classes, per_class=args.per_class,
            seed=seed, rename_prob=args.rename_prob,
            loop_swap_prob=args.loop_swap_prob, const_jitter=args.const_jitter,
            shuffle_prob=args.shuffle_prob, dead_code_prob=args.dead_code_prob)
    else:
        spec = corpus_mod.CorpusSpec(
            task="clone", n_problems=args.problems, per_class=args.per_class,
            seed=seed, rename_prob=args.rename_prob,
            loop_swap_prob=args.loop_swap_prob, const_jitter=args.const_jitter,
            shuffle_prob=args.shuffle_prob, dead_code_prob=args.dead_code_prob)
    manifest = corpus_mod.generate_corpus(spec, args.out)
    _emit({"out": str(args.out), "task": spec.task,
           "files": len(manifest["files"]), "seed": seed})
    return 0


def cmd_train(args) -> int:
    manifest, records = corpus_mod.load_corpus(args.data)
    if manifest["task"] != args.task:
        raise ValueError(
            f"corpus task {manifest['task']!r} does not match {args.task!r}")
    config = _make_config(args, manifest, records)
    log_path = Path(args.log) if args.log else Path(str(args.out) + ".log.jsonl")
    log_lines: list[str] = []

    def log_fn(entry):
        log_lines.append(json.dumps(entry, sort_keys=True,
                                    separators=(",", ":")))

    store, state, result = _train_model(args.task, records, manifest, config,
                                        args, log_fn)
    save_model(store, args.out)
    state.save(str(args.out) + ".opt.json")
    log_path.write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    _emit({"out": str(args.out), "epochs_run": len(result.history),
           "best_epoch": result.best_epoch,
           "best_val_metric": result.best_metric})
    return 0


def cmd_eval(args) -> int:
    store = load_model(args.model)
    config = store.config
    manifest, records = corpus_mod.load_corpus(args.data)
    if manifest["task"] != args.task:
        raise ValueError(
            f"corpus task {manifest['task']!r} does not match {args.task!r}")
    if args.task == "classify":
        examples = [LabeledExample(r["ast"], r["group"])
                    for r in _split_records(records, args.split)]
        report = {
            "task": "classify", "variant": config.variant,
            "seed": config.seed, "split": args.split,
            "accuracy": _classify_accuracy(examples, store, config),
            "n_examples": len(examples),
        }
    else:
        pair_sets = _clone_pair_sets(records, manifest, args)
        pairs = {"train": pair_sets[0], "valid": pair_sets[1],
                 "test": pair_sets[2]}[args.split]
        scored = _score_pairs(pairs, store, config)
        report = metrics_report(scored, task="clone", variant=config.variant,
                                seed=config.seed)
        report["split"] = args.split
        report["n_pairs"] = len(pairs)
    _emit(report)
    return 0


def cmd_embed(args) -> int:
    store = load_model(args.model)
    path = Path(args.input)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".c":
        ast = parse_source(text)
    else:
        ast = from_interchange(text)
    vector = encode(ast, store, store.config)
    _emit({"input": str(args.input), "dim": store.config.hidden,
           "vector": vector.data[:, 0].tolist()})
    return 0


def cmd_param_count(args) -> int:
    disabled = tuple(m for m in (args.disable_modules or "").split(",") if m)
    config = ModelConfig(variant=args.variant, hidden=args.hidden,
                         vocab={}, disabled_modules=disabled,
                         n_classes=args.classes)
    counts = param_count(config)
    out = {
        "variant": args.variant,
        "hidden": args.hidden,
        "containers": counts["containers"],
        "modules": counts["modules"],
        "encoder_total": counts["encoder"],
        # Without a vocabulary the reportable total is the encoder itself.
        "total": counts["encoder"],
    }
    if args.vocab_size is not None:
        embeddings = args.vocab_size * args.hidden
        out["embeddings"] = embeddings
        out["grand_total"] = counts["encoder"] + embeddings + counts["head"]
    if args.classes is not None:
        out["head"] = counts["head"]
    _emit(out)
    return 0


def cmd_ablate(args) -> int:
    manifest, records = corpus_mod.load_corpus(args.data)
    if manifest["task"] != "clone":
        raise ValueError("ablate runs on a clone corpus")
    rows = []
    for disabled in (None, *ABLATION_MODULES):
        row_args = argparse.Namespace(**vars(args))
        row_args.variant = "mtn-b"
        row_args.disable_modules = disabled or ""
        row_args.with_ids = False
        row_args.train_fraction = 1.0
        config = _make_config(row_args, manifest, records)
        store, _state, _result = _train_model("clone", records, manifest,
                                              config, row_args)
        _train, _valid, test_pairs = _clone_pair_sets(records, manifest,
                                                      row_args)
        scored = _score_pairs(test_pairs, store, config)
        report = metrics_report(scored, task="clone", variant="mtn-b",
                                seed=config.seed)
        rows.append({
            "model": "mtn-b" if disabled is None else f"-{disabled}",
            "precision": report["precision"],
            "recall": report["recall"],
            "f1": report["f1"],
            "roc_auc": report["roc_auc"],
            "param_count": param_count(config)["encoder"],
        })
    out = {"task": "clone", "hidden": args.hidden,
           "seed": _resolve_seed(args.seed), "rows": rows}
    if args.out:
        Path(args.out).write_text(
            json.dumps(out, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8")
    _emit(out)
    return 0


# --- argument plumbing --------------------------------------------------------------


def _add_knob_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rename-prob", type=float, default=0.9)
    p.add_argument("--loop-swap-prob", type=float, default=0.5)
    p.add_argument("--const-jitter", type=int, default=10)
    p.add_argument("--shuffle-prob", type=float, default=0.3)
    p.add_argument("--dead-code-prob", type=float, default=0.2)


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True)
    p.add_argument("--variant", default="mtn-b",
                   choices=["mtn-a", "mtn-b", "treelstm", "seq-lstm"])
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--with-ids", action="store_true")
    p.add_argument("--train-fraction", type=float, default=1.0)
    p.add_argument("--disable-modules", default="",
                   help="comma-separated module types to replace with the "
                        "child-sum default unit")
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--train-pos", type=int, default=2000)
    p.add_argument("--train-neg", type=int, default=2000)
    p.add_argument("--eval-pairs", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtn",
        description="Tree-structured code encoders: corpus generation, "
                    "training and evaluation for program classification "
                    "and clone detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a .c file to AST interchange JSON")
    p.add_argument("file")
    p.add_argument("--emit-ast", default=None)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus")
    p.add_argument("--task", required=True, choices=["classify", "clone"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--problems", type=int, default=15)
    p.add_argument("--per-class", type=int, default=100)
    _add_knob_args(p)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("train", help="train an encoder on a corpus")
    p.add_argument("task", choices=["classify", "clone"])
    _add_train_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model; metrics JSON to stdout")
    p.add_argument("task", choices=["classify", "clone"])
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test",
                   choices=["train", "valid", "test"])
    p.add_argument("--train-pos", type=int, default=2000)
    p.add_argument("--train-neg", type=int, default=2000)
    p.add_argument("--eval-pairs", type=int, default=500)
    p.set_defaults(func=cmd_eval, train_fraction=1.0)

    p = sub.add_parser("embed", help="embed one .c or AST .json file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("param-count", help="parameter count breakdown")
    p.add_argument("--variant", required=True,
                   choices=["mtn-a", "mtn-b", "treelstm", "seq-lstm"])
    p.add_argument("--hidden", type=int, required=True)
    p.add_argument("--vocab-size", type=int, default=None)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--disable-modules", default="")
    p.set_defaults(func=cmd_param_count)

    p = sub.add_parser(
        "ablate",
        help="clone-task ablation: full model plus one run per disabled "
             "module in {FuncDef, For, If, While, Seq}")
    p.add_argument("task", choices=["clone"])
    _add_train_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, LexError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "line": exc.line, "column": exc.column}
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")),
              file=sys.stderr)
        return 1
    except Exception as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
