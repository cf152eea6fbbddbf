"""ltstr command line: synth, stats, eval, ensemble, adjust, simulate.

Exit status is 0 on success, 1 on bad input and 2 when an internal
consistency check fails. Every output is deterministic for a fixed seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import adjust as adj
from .charset import (
    EOS,
    CategoryThresholds,
    Charset,
    CountMode,
    categorize,
    read_charset,
    read_frequency_table,
    write_frequency_table,
)
from .ensemble import (
    Prediction,
    char_level_ensemble,
    decisions_to_csv,
    prediction_to_json,
    read_predictions,
    word_level_ensemble,
)
from .errors import InputError, InvariantError, NoConfidentExpert
from .experiment import ExperimentConfig, run_experiment
from .metrics import evaluate, report_to_csv
from .synth import (
    MAX_LEN,
    LengthModel,
    distribution_stats,
    read_dataset,
    sample_combined,
    sample_random,
    sample_wiki,
    split_tokens,
    synthetic_charset,
    tokenize_corpus,
    RANDOM,
    WIKI,
    dataset_to_tsv,
    zipf_corpus,
)

log = logging.getLogger("ltstr")

MAX_ORPHANS = 10


def _emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _thresholds(args) -> CategoryThresholds:
    return CategoryThresholds(args.many_min, args.medium_min)


def _charset(args, fallback_words=None) -> Charset | None:
    if args.charset:
        return read_charset(args.charset)
    if fallback_words is not None:
        return Charset.from_words(fallback_words)
    return None


def _check_ids(a: dict, b: dict, name_a: str, name_b: str) -> None:
    orphans = sorted(set(a) ^ set(b))
    if orphans:
        where = {k: (name_a if k in a else name_b) for k in orphans[:MAX_ORPHANS]}
        listed = ", ".join(f"{k} (only in {v})" for k, v in where.items())
        raise InputError(None, None, f"{len(orphans)} ids present in only one file: {listed}")


# --- subcommands ------------------------------------------------------------

def cmd_synth(args) -> None:
    text = Path(args.corpus).read_text(encoding="utf-8") if args.corpus else None
    if args.charset:
        cs = read_charset(args.charset)
    elif text is not None:
        cs = Charset.from_words(split_tokens(text))
    else:
        cs = synthetic_charset(args.charset_size)
    if text is not None:
        corpus = tokenize_corpus(text, cs, args.max_len)
    else:
        corpus = zipf_corpus(cs, seed=args.seed, max_len=args.max_len)
    lengths = LengthModel.fixed(args.length) if args.length else LengthModel.from_corpus(corpus)
    if args.mode == WIKI:
        rows = [(w, WIKI) for w in sample_wiki(corpus, args.n, args.seed)]
    elif args.mode == RANDOM:
        rows = [(w, RANDOM) for w in sample_random(cs, args.n, lengths, args.seed)]
    else:
        rows = sample_combined(corpus, cs, args.n, args.seed, lengths)
    _emit(dataset_to_tsv(rows), args.out)


def cmd_stats(args) -> None:
    words = [w for _, w, _ in read_dataset(args.gt)]
    cs = _charset(args, words)
    st = distribution_stats(words, cs, _thresholds(args), args.mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "stats.csv").write_text(st.to_csv(), encoding="utf-8", newline="\n")
    (out / "summary.json").write_text(st.summary_json(), encoding="utf-8", newline="\n")
    table = st.per_sample if st.count_mode is CountMode.PER_SAMPLE else st.per_occurrence
    write_frequency_table(table, out / "freq.tsv")


def cmd_eval(args) -> None:
    gt = {sid: w for sid, w, _ in read_dataset(args.gt)}
    cs = _charset(args)
    preds = read_predictions(args.pred, cs)
    _check_ids(gt, preds, args.gt, args.pred)
    table = read_frequency_table(args.freq)
    cats = categorize(table, _thresholds(args), cs)
    ids = sorted(gt)
    gts = [gt[i] for i in ids]
    words = [preds[i].word for i in ids]
    report = evaluate(gts, words, cats, cs)
    # every ground-truth character is either a tp or a fn
    n_gt = sum(len(w) for w in gts)
    if sum(report.tally.tp.values()) + sum(report.tally.fn.values()) != n_gt:
        raise InvariantError("tally does not account for every ground-truth character")
    _emit(report_to_csv(report), args.out)


def cmd_ensemble(args) -> None:
    cs = _charset(args)
    ca = read_predictions(args.pred_ca, cs)
    cf = read_predictions(args.pred_cf, cs)
    _check_ids(ca, cf, args.pred_ca, args.pred_cf)
    ids = sorted(ca)
    if args.level == "word":
        rows = []
        for sid in ids:
            try:
                rows.append((sid, word_level_ensemble(ca[sid], cf[sid])))
            except NoConfidentExpert:
                raise InputError(None, None, f"sample {sid!r}: both experts predicted an empty word") from None
            if rows[-1][1].word not in (ca[sid].word, cf[sid].word):
                raise InvariantError(f"sample {sid!r}: ensemble word is neither input word")
        _emit(decisions_to_csv(rows), args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "word"])
        for sid in ids:
            w.writerow([sid, char_level_ensemble(ca[sid], cf[sid])])
        _emit(buf.getvalue(), args.out)


def _float_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_adjust(args) -> None:
    if args.method == "tau-norm":
        if not args.weights:
            raise InputError(None, None, "tau-norm needs --weights")
        names, W = adj.read_weights(args.weights)
        try:
            out = adj.tau_normalize(W, args.tau, names)
        except ValueError as e:
            raise InputError(args.weights, None, str(e)) from None
        _emit(adj.weights_to_tsv(names, out), args.out)
        return
    if args.method == "nll":
        if not (args.pred and args.gt):
            raise InputError(None, None, "nll needs --pred and --gt")
        gt = {sid: w for sid, w, _ in read_dataset(args.gt)}
        preds = read_predictions(args.pred, _charset(args))
        _check_ids(gt, preds, args.gt, args.pred)
        rows = []
        for sid in sorted(gt):
            try:
                rows.append([sid, repr(adj.word_nll(preds[sid], gt[sid]))])
            except ValueError as e:
                raise InputError(args.pred, None, f"sample {sid!r}: {e}") from None
        _emit(_float_csv(["id", "nll"], rows), args.out)
        return

    # pc-softmax over a logit file
    if not (args.logits and args.charset and args.source_prior):
        raise InputError(None, None, "pc-softmax needs --logits, --charset (class manifest) and --source-prior")
    classes = adj.read_class_manifest(args.charset)
    missing = [s for s in (EOS,) if s not in classes]
    if missing:
        raise InputError(args.charset, None, f"class manifest lacks {missing}")
    source = adj.read_prior(args.source_prior, classes)
    target = adj.read_prior(args.target_prior, classes) if args.target_prior else None
    if (source <= 0).any():
        raise InputError(args.source_prior, None, "source prior has a zero entry")
    items = []
    for sid, z in adj.read_logits(args.logits, len(classes)):
        items.append((sid, Prediction(adj.pc_softmax(z, source, target), tuple(classes))))
    _emit("".join(prediction_to_json(s, p, args.top_k) + "\n" for s, p in items), args.out)


def cmd_simulate(args) -> None:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    if args.many_min is not None:
        overrides["many_min"] = args.many_min
    if args.medium_min is not None:
        overrides["medium_min"] = args.medium_min
    if args.max_len is not None:
        overrides["max_len"] = args.max_len
    if overrides:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    train_ca = [w for _, w, _ in read_dataset(args.train_ca)] if args.train_ca else None
    train_cf = [w for _, w, _ in read_dataset(args.train_cf)] if args.train_cf else None
    if train_cf is not None and train_ca is None:
        raise InputError(None, None, "--train-cf needs --train-ca")
    report = run_experiment(cfg, train_ca, train_cf)
    report.write(args.out)


# --- parser -----------------------------------------------------------------

def _add_thresholds(p, default=True):
    d = CategoryThresholds()
    p.add_argument("--many-min", type=int, default=d.many_min if default else None)
    p.add_argument("--medium-min", type=int, default=d.medium_min if default else None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ltstr", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="sample a word dataset (TSV id, word, origin)")
    p.add_argument("--mode", choices=[WIKI, RANDOM, "combined"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--corpus", help="raw UTF-8 text; default is a synthetic Zipf language")
    p.add_argument("--charset", help="charset manifest, one symbol per line")
    p.add_argument("--charset-size", type=int, default=200)
    p.add_argument("--max-len", type=int, default=MAX_LEN)
    p.add_argument("--length", type=int, help="fixed length for random words")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="character frequency statistics of a dataset")
    p.add_argument("--gt", required=True, help="dataset TSV")
    p.add_argument("--charset")
    p.add_argument("--mode", choices=[m.value for m in CountMode], default=CountMode.PER_SAMPLE.value)
    _add_thresholds(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="word accuracy and per-category char F1")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--freq", required=True, help="training frequency table TSV")
    p.add_argument("--charset")
    _add_thresholds(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ensemble", help="combine context-aware and context-free predictions")
    p.add_argument("--pred-ca", required=True)
    p.add_argument("--pred-cf", required=True)
    p.add_argument("--level", choices=["word", "char"], default="word")
    p.add_argument("--charset")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("adjust", help="long-tail post-hoc adjustments")
    p.add_argument("--method", choices=["pc-softmax", "tau-norm", "nll"], required=True)
    p.add_argument("--logits")
    p.add_argument("--charset", help="class manifest (logit column order) or charset")
    p.add_argument("--source-prior")
    p.add_argument("--target-prior", help="default uniform")
    p.add_argument("--weights")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--pred")
    p.add_argument("--gt")
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("simulate", help="run the two-expert simulation")
    p.add_argument("--config", help="experiment JSON")
    p.add_argument("--seed", type=int, help="run this single seed instead of the configured ones")
    p.add_argument("--train-ca", help="dataset TSV used to train the context-aware expert")
    p.add_argument("--train-cf", help="dataset TSV used to train the context-free expert")
    p.add_argument("--max-len", type=int)
    _add_thresholds(p, default=False)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except InvariantError as e:
        print(f"ltstr: internal error: {e}", file=sys.stderr)
        return 2
    except (InputError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"ltstr: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
