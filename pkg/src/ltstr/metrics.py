"""Character-level F1 with frequency buckets, plus word accuracy."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .alignment import Alignment, StepKind, align
from .charset import UNK, CharCategory, Charset


@dataclass
class CharTally:
    tp: Counter = field(default_factory=Counter)
    fp: Counter = field(default_factory=Counter)
    fn: Counter = field(default_factory=Counter)

    def __add__(self, other: "CharTally") -> "CharTally":
        return CharTally(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def chars(self) -> set[str]:
        return {c for d in (self.tp, self.fp, self.fn) for c, n in d.items() if n > 0}

    def update(self, alignment: Alignment) -> None:
        for s in alignment.steps:
            if s.kind is StepKind.MATCH:
                self.tp[s.gt_char] += 1
            elif s.kind is StepKind.SUBSTITUTE:
                self.fn[s.gt_char] += 1
                self.fp[s.pred_char] += 1
            elif s.kind is StepKind.DELETE:
                self.fn[s.gt_char] += 1
            else:
                self.fp[s.pred_char] += 1


def tally(alignments: Iterable[Alignment]) -> CharTally:
    t = CharTally()
    for a in alignments:
        t.update(a)
    return t


def tally_words(gts: Sequence[str], preds: Sequence[str], charset: Charset | None = None) -> CharTally:
    """Align each (gt, pred) pair and tally. Out-of-charset characters become UNK."""
    if len(gts) != len(preds):
        raise ValueError(f"{len(gts)} ground truths vs {len(preds)} predictions")
    t = CharTally()
    for g, p in zip(gts, preds):
        if charset is not None:
            g, p = charset.map_unknown(g), charset.map_unknown(p)
        t.update(align(g, p))
    return t


@dataclass
class CharF1Report:
    per_char_f1: dict[str, float]
    precision: dict[str, float]
    recall: dict[str, float]
    category_f1: dict[CharCategory, float]
    macro_f1: float
    support: dict[str, int]
    categories: dict[str, CharCategory | None]
    tally: CharTally
    word_accuracy: float | None = None


def _safe_div(a, b):
    return a / b if b else 0.0


def char_f1(
    tally: CharTally,
    categories: Mapping[str, CharCategory],
) -> CharF1Report:
    """Per-character F1 averaged within each frequency category.

    Characters with no tp/fp/fn are left out of every average. Characters
    absent from ``categories`` count as FEW (never seen in training); UNK
    is reported but kept out of all averages. Empty categories average to NaN.
    """
    f1s, prec, rec, support, cats = {}, {}, {}, {}, {}
    for c in sorted(tally.chars()):
        tp, fp, fn = tally.tp[c], tally.fp[c], tally.fn[c]
        p = _safe_div(tp, tp + fp)
        r = _safe_div(tp, tp + fn)
        f1s[c] = _safe_div(2 * p * r, p + r)
        prec[c], rec[c] = p, r
        support[c] = tp + fn
        cats[c] = None if c == UNK else categories.get(c, CharCategory.FEW)
    by_cat = {}
    for cat in CharCategory:
        vals = [f1s[c] for c in f1s if cats[c] is cat]
        by_cat[cat] = float(np.mean(vals)) if vals else float("nan")
    scored = [f1s[c] for c in f1s if cats[c] is not None]
    macro = float(np.mean(scored)) if scored else float("nan")
    return CharF1Report(f1s, prec, rec, by_cat, macro, support, cats, tally)


def word_accuracy(gts: Sequence[str], preds: Sequence[str]) -> float:
    if len(gts) != len(preds):
        raise ValueError(f"length mismatch: {len(gts)} ground truths vs {len(preds)} predictions")
    if not gts:
        raise ValueError("empty corpus")
    return sum(g == p for g, p in zip(gts, preds)) / len(gts)


def evaluate(
    gts: Sequence[str],
    preds: Sequence[str],
    categories: Mapping[str, CharCategory],
    charset: Charset | None = None,
) -> CharF1Report:
    report = char_f1(tally_words(gts, preds, charset), categories)
    report.word_accuracy = word_accuracy(gts, preds)
    return report


REPORT_COLUMNS = ["char", "category", "tp", "fp", "fn", "precision", "recall", "f1", "support"]


def _fmt(x: float) -> str:
    return "nan" if x != x else f"{x:.6f}"


def report_to_csv(report: CharF1Report) -> str:
    """Render the report. Footer rows put the averaged score in the ``f1`` column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    t = report.tally
    for c in report.per_char_f1:
        cat = report.categories[c]
        w.writerow([
            c, cat.value if cat else "unk", t.tp[c], t.fp[c], t.fn[c],
            _fmt(report.precision[c]), _fmt(report.recall[c]), _fmt(report.per_char_f1[c]),
            report.support[c],
        ])
    footer = [
        ("FEW", report.category_f1[CharCategory.FEW]),
        ("MEDIUM", report.category_f1[CharCategory.MEDIUM]),
        ("MANY", report.category_f1[CharCategory.MANY]),
        ("MACRO", report.macro_f1),
    ]
    if report.word_accuracy is not None:
        footer.append(("WORD_ACC", report.word_accuracy))
    for label, v in footer:
        w.writerow([label, "", "", "", "", "", "", _fmt(v), ""])
    return buf.getvalue()


def write_report(report: CharF1Report, path) -> None:
    Path(path).write_text(report_to_csv(report), encoding="utf-8", newline="\n")
