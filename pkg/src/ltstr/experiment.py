"""End-to-end two-expert simulation: WS-trained context-aware vs RS-trained context-free.

For every seed this builds a toy language, trains both experts, decodes three
test sets and reports accuracy, per-category char F1, expert selection
ratios and ground-truth character probabilities.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .charset import (
    CategoryThresholds,
    CharCategory,
    Charset,
    build_frequency_table,
    categorize,
)
from .ensemble import Expert, char_level_ensemble, word_level_ensemble
from .metrics import char_f1, tally_words, word_accuracy
from .recognizer import ExpertKind, GlyphModel, decode_batch, fit_expert, render
from .synth import (
    Corpus,
    LengthModel,
    sample_random,
    sample_wiki,
    synthetic_charset,
    zipf_corpus,
)

log = logging.getLogger(__name__)

TEST_SETS = ("common", "hard", "random")
COMBINED = "combined"
SYSTEMS = ("context-aware", "context-free", "ensemble-word", "ensemble-char")


@dataclass
class ExperimentConfig:
    charset_size: int = 200
    dim: int = 16
    sigma: float = 0.15
    confusable_fraction: float = 0.05
    zipf_exponent: float = 1.0
    n_train: int = 50_000
    n_test: int = 2_000
    max_len: int = 25
    smoothing_k: float = 0.001
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    # toy-language and glyph-space shape
    vocab_size: int = 20_000
    char_exponent: float = 1.0
    holdout_fraction: float = 0.2
    family_size: int = 10
    family_cos: float = 0.8
    end_evidence: float = 4.0
    many_min: int = 1500
    medium_min: int = 100

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must be in (0, 1)")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.seeds = [int(s) for s in self.seeds]

    @property
    def thresholds(self) -> CategoryThresholds:
        return CategoryThresholds(self.many_min, self.medium_min)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config fields: {unknown}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SeedResult:
    seed: int
    accuracy: dict[tuple[str, str], float]
    char_f1: dict[tuple[str, str], dict[str, float]]
    selection: dict[str, float]
    many_proportion: dict[str, float]
    set_sizes: dict[str, int]
    gt_prob_by_category: dict[str, dict[str, float]]
    gt_prob_by_char: list[tuple[int, str, str, int, float, float, int]]
    n_few: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    seeds: list[SeedResult]

    def mean_accuracy(self, test_set: str, system: str) -> float:
        return float(np.mean([r.accuracy[test_set, system] for r in self.seeds]))

    def mean_f1(self, test_set: str, system: str, category: str) -> float:
        return _nanmean([r.char_f1[test_set, system][category] for r in self.seeds])

    def mean_gt_prob(self, expert: str, category: str) -> float:
        return _nanmean([r.gt_prob_by_category[expert][category] for r in self.seeds])

    # --- CSV tables -------------------------------------------------------
    def accuracy_csv(self) -> str:
        rows = [["seed", "test_set", "system", "word_accuracy"]]
        for r in self.seeds:
            for ts in TEST_SETS + (COMBINED,):
                for sy in SYSTEMS:
                    rows.append([r.seed, ts, sy, _f(r.accuracy[ts, sy])])
        for ts in TEST_SETS + (COMBINED,):
            for sy in SYSTEMS:
                rows.append(["mean", ts, sy, _f(self.mean_accuracy(ts, sy))])
        return _csv(rows)

    def char_f1_csv(self) -> str:
        rows = [["seed", "test_set", "system", "few", "medium", "many", "macro"]]
        for r in self.seeds:
            for ts in TEST_SETS + (COMBINED,):
                for sy in SYSTEMS:
                    d = r.char_f1[ts, sy]
                    rows.append([r.seed, ts, sy] + [_f(d[k]) for k in ("few", "medium", "many", "macro")])
        for ts in TEST_SETS + (COMBINED,):
            for sy in SYSTEMS:
                rows.append(["mean", ts, sy] + [_f(self.mean_f1(ts, sy, k)) for k in ("few", "medium", "many", "macro")])
        return _csv(rows)

    def selection_csv(self) -> str:
        rows = [["seed", "test_set", "context_aware_ratio", "context_free_ratio", "many_proportion", "n"]]
        for r in self.seeds:
            for ts in TEST_SETS + (COMBINED,):
                s = r.selection[ts]
                rows.append([r.seed, ts, _f(s), _f(1.0 - s), _f(r.many_proportion[ts]), r.set_sizes[ts]])
        return _csv(rows)

    def prob_rank_csv(self) -> str:
        rows = [["seed", "rank", "char", "category", "train_count", "context_aware_prob", "context_free_prob", "n"]]
        for r in self.seeds:
            for rank, ch, cat, cnt, pa, pf, n in r.gt_prob_by_char:
                rows.append([r.seed, rank, ch, cat, cnt, _f(pa), _f(pf), n])
        return _csv(rows)

    def prob_category_csv(self) -> str:
        rows = [["seed", "category", "context_aware_prob", "context_free_prob"]]
        for r in self.seeds:
            for cat in ("few", "medium", "many"):
                rows.append([r.seed, cat, _f(r.gt_prob_by_category["context-aware"][cat]),
                             _f(r.gt_prob_by_category["context-free"][cat])])
        return _csv(rows)

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "mean_accuracy": {f"{ts}/{sy}": self.mean_accuracy(ts, sy)
                              for ts in TEST_SETS + (COMBINED,) for sy in SYSTEMS},
            "mean_few_f1_hard": {sy: self.mean_f1("hard", sy, "few") for sy in SYSTEMS},
            "mean_selection_ratio": {ts: float(np.mean([r.selection[ts] for r in self.seeds]))
                                     for ts in TEST_SETS + (COMBINED,)},
            "mean_gt_prob": {e: {c: self.mean_gt_prob(e, c) for c in ("few", "medium", "many")}
                             for e in ("context-aware", "context-free")},
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "accuracy.csv": self.accuracy_csv(),
            "char_f1.csv": self.char_f1_csv(),
            "selection.csv": self.selection_csv(),
            "prob_rank.csv": self.prob_rank_csv(),
            "prob_category.csv": self.prob_category_csv(),
            "summary.json": json.dumps(_no_nan(self.summary()), indent=2, sort_keys=True) + "\n",
        }
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8", newline="\n")


def _no_nan(obj):
    # strict JSON has no NaN; an undefined mean becomes null
    if isinstance(obj, dict):
        return {k: _no_nan(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_no_nan(v) for v in obj]
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def _nanmean(xs) -> float:
    """Mean over the non-NaN values; NaN (without a warning) when there are none."""
    a = np.asarray(xs, dtype=float)
    a = a[~np.isnan(a)]
    return float(a.mean()) if a.size else math.nan


def _f(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.6f}"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _child(seed: int, *tags: int) -> int:
    ss = np.random.SeedSequence([seed, *tags])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class _World:
    charset: Charset
    train_ca: list[str]
    train_cf: list[str]
    common_pool: Corpus
    hard_pool: Corpus
    lengths: LengthModel


def _synthetic_world(cfg: ExperimentConfig, seed: int) -> _World:
    charset = synthetic_charset(cfg.charset_size)
    corpus = zipf_corpus(
        charset, seed=_child(seed, 1), exponent=cfg.zipf_exponent, vocab_size=cfg.vocab_size,
        max_len=cfg.max_len, char_exponent=cfg.char_exponent,
    )
    # hard-test words come from vocabulary never shown to the context-aware expert
    perm = np.random.default_rng(_child(seed, 2)).permutation(len(corpus))
    n_held = int(cfg.holdout_fraction * len(corpus))
    held = sorted(perm[:n_held])
    kept = sorted(perm[n_held:])
    train_pool = Corpus(tuple(corpus.words[i] for i in kept), charset)
    held_pool = Corpus(tuple(corpus.words[i] for i in held), charset)
    lengths = LengthModel.from_corpus(corpus)
    train_ca = sample_wiki(train_pool, cfg.n_train, _child(seed, 3))
    train_cf = sample_random(charset, cfg.n_train, lengths, _child(seed, 4))
    return _World(charset, train_ca, train_cf, train_pool, held_pool, lengths)


def _external_world(cfg: ExperimentConfig, train_ca: Sequence[str], train_cf: Sequence[str] | None, seed: int) -> _World:
    words = list(train_ca) + list(train_cf or [])
    charset = Charset.from_words(words)
    counts = Counter(train_ca)
    pool = Corpus(tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))), charset)
    lengths = LengthModel.from_corpus(pool)
    if not train_cf:
        train_cf = sample_random(charset, len(train_ca), lengths, _child(seed, 4))
    return _World(charset, list(train_ca), list(train_cf), pool, pool, lengths)


def run_seed(
    cfg: ExperimentConfig,
    seed: int,
    train_ca: Sequence[str] | None = None,
    train_cf: Sequence[str] | None = None,
) -> SeedResult:
    if train_ca is None:
        world = _synthetic_world(cfg, seed)
    else:
        world = _external_world(cfg, train_ca, train_cf, seed)
    cs = world.charset
    glyphs = GlyphModel.random(
        cs, cfg.dim, cfg.sigma, cfg.confusable_fraction, seed=_child(seed, 5),
        family_size=cfg.family_size, family_cos=cfg.family_cos,
    )
    table = build_frequency_table(world.train_ca, cs)
    cats = categorize(table, cfg.thresholds, cs)
    few = {c for c, v in cats.items() if v is CharCategory.FEW}
    # each distinct rare word equally likely, so one frequent held-out word
    # cannot dominate the set
    hard_words = tuple((w, 1) for w, _ in world.hard_pool.words if few & set(w))
    if not few or not hard_words:
        raise ValueError(
            "no words with few-category characters available for the hard test; "
            "use a larger charset_size or a smaller n_train"
        )
    ca = fit_expert(ExpertKind.CONTEXT_AWARE, world.train_ca, glyphs, cfg.smoothing_k,
                    cfg.max_len, cfg.end_evidence)
    cf = fit_expert(ExpertKind.CONTEXT_FREE, world.train_cf, glyphs, cfg.smoothing_k, cfg.max_len)

    tests = {
        "common": sample_wiki(world.common_pool, cfg.n_test, _child(seed, 6)),
        "hard": sample_wiki(Corpus(hard_words, cs), cfg.n_test, _child(seed, 7)),
        "random": sample_random(cs, cfg.n_test, world.lengths, _child(seed, 8)),
    }

    accuracy, f1s, selection, many_prop, sizes = {}, {}, {}, {}, {}
    tallies = defaultdict(list)
    outputs = defaultdict(list)
    gt_all = []
    chose_ca = []
    prob_sum = {e: defaultdict(float) for e in ("context-aware", "context-free")}
    prob_n: Counter = Counter()
    for si, name in enumerate(TEST_SETS):
        words = tests[name]
        obs = [render(w, glyphs, (_child(seed, 9), si, i)) for i, w in enumerate(words)]
        pa = decode_batch(ca, obs)
        pf = decode_batch(cf, obs)
        decisions = [word_level_ensemble(a, f) for a, f in zip(pa, pf)]
        preds = {
            "context-aware": [p.word for p in pa],
            "context-free": [p.word for p in pf],
            "ensemble-word": [d.word for d in decisions],
            "ensemble-char": [char_level_ensemble(a, f) for a, f in zip(pa, pf)],
        }
        for expert, ps in (("context-aware", pa), ("context-free", pf)):
            for w, p in zip(words, ps):
                for t, c in enumerate(w):
                    prob_sum[expert][c] += p.probs[t, cs.index(c)]
                    if expert == "context-aware":
                        prob_n[c] += 1
        for sy in SYSTEMS:
            t = tally_words(words, preds[sy])
            tallies[sy].append(t)
            accuracy[name, sy] = word_accuracy(words, preds[sy])
            f1s[name, sy] = _f1_dict(char_f1(t, cats))
            outputs[sy].extend(preds[sy])
        selection[name] = float(np.mean([d.chosen is Expert.CONTEXT_AWARE for d in decisions]))
        chose_ca.extend(d.chosen is Expert.CONTEXT_AWARE for d in decisions)
        chars = [c for w in words for c in w]
        many_prop[name] = float(np.mean([cats[c] is CharCategory.MANY for c in chars]))
        sizes[name] = len(words)
        gt_all.extend(words)

    for sy in SYSTEMS:
        total = tallies[sy][0]
        for t in tallies[sy][1:]:
            total = total + t
        accuracy[COMBINED, sy] = word_accuracy(gt_all, outputs[sy])
        f1s[COMBINED, sy] = _f1_dict(char_f1(total, cats))
    selection[COMBINED] = float(np.mean(chose_ca))
    many_prop[COMBINED] = float(np.mean([cats[c] is CharCategory.MANY for w in gt_all for c in w]))
    sizes[COMBINED] = len(gt_all)

    by_cat = {}
    for expert in prob_sum:
        by_cat[expert] = {}
        for cat in CharCategory:
            num = sum(prob_sum[expert][c] for c in prob_n if cats[c] is cat)
            den = sum(n for c, n in prob_n.items() if cats[c] is cat)
            by_cat[expert][cat.value] = num / den if den else float("nan")
    by_char = []
    for rank, (c, cnt) in enumerate(sorted(((c, table[c]) for c in cs), key=lambda kv: (-kv[1], kv[0])), 1):
        n = prob_n[c]
        pa_ = prob_sum["context-aware"][c] / n if n else float("nan")
        pf_ = prob_sum["context-free"][c] / n if n else float("nan")
        by_char.append((rank, c, cats[c].value, cnt, pa_, pf_, n))

    return SeedResult(seed, accuracy, f1s, selection, many_prop, sizes, by_cat, by_char, len(few))


def _f1_dict(report) -> dict[str, float]:
    d = {cat.value: report.category_f1[cat] for cat in CharCategory}
    d["macro"] = report.macro_f1
    return d


def run_experiment(
    cfg: ExperimentConfig,
    train_ca: Sequence[str] | None = None,
    train_cf: Sequence[str] | None = None,
) -> ExperimentReport:
    """Run every configured seed.

    With ``train_ca`` (and optionally ``train_cf``) the given word lists are
    used for training instead of a synthetic language; the common and hard
    tests are then drawn from the ``train_ca`` vocabulary itself.
    """
    results = []
    for seed in cfg.seeds:
        log.info("seed %d", seed)
        results.append(run_seed(cfg, seed, train_ca, train_cf))
    return ExperimentReport(cfg, results)
