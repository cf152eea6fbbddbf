"""Sequence confidence and two-expert ensembling.

A :class:`Prediction` stores one probability row per decoding step over a
fixed class order (charset symbols followed by the special tokens). The
scored word is every non-PAD argmax before the first EOS.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .charset import EOS, PAD, SPECIALS, Charset
from .errors import InputError, NoConfidentExpert

LOG_FLOOR = 1e-300
MAX_LEN = 25


class Expert(str, enum.Enum):
    CONTEXT_AWARE = "context-aware"
    CONTEXT_FREE = "context-free"


@dataclass(frozen=True, eq=False)
class Prediction:
    probs: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[1] != len(self.labels):
            raise ValueError(f"probs shape {probs.shape} does not match {len(self.labels)} labels")
        if (probs < 0).any():
            raise ValueError("negative probability")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", tuple(self.labels))

    @cached_property
    def decoded(self) -> list[str]:
        if len(self.probs) == 0:
            return []
        return [self.labels[k] for k in self.probs.argmax(axis=1)]

    @cached_property
    def _scored(self) -> list[int]:
        rows = []
        for t, sym in enumerate(self.decoded):
            if sym == EOS:
                break
            if sym != PAD:
                rows.append(t)
        return rows

    @cached_property
    def chars(self) -> list[str]:
        return [self.decoded[t] for t in self._scored]

    @property
    def word(self) -> str:
        return "".join(self.chars)

    @property
    def length(self) -> int:
        return len(self._scored)

    @cached_property
    def max_probs(self) -> np.ndarray:
        """Maximum probability at each scored step."""
        return self.probs[self._scored].max(axis=1) if self._scored else np.zeros(0)

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.probs.sum(axis=1) - 1.0) <= tol))


def sequence_probability(pred: Prediction) -> float:
    """Product of the per-step max probabilities over the word before EOS."""
    if pred.length == 0:
        raise ValueError("empty prediction")
    return float(np.prod(pred.max_probs))


def confidence_score(pred: Prediction) -> float:
    """Length-normalised mean log max probability; -inf for an empty word."""
    if pred.length == 0:
        return -math.inf
    m = pred.max_probs
    if (m < LOG_FLOOR).any():
        return -math.inf
    return float(np.log(m).sum() / pred.length)


@dataclass(frozen=True)
class EnsembleDecision:
    chosen: Expert
    word: str
    score_ca: float
    score_cf: float


def word_level_ensemble(ca: Prediction, cf: Prediction) -> EnsembleDecision:
    s_ca, s_cf = confidence_score(ca), confidence_score(cf)
    if s_ca == -math.inf and s_cf == -math.inf:
        raise NoConfidentExpert("no confident expert")
    # exact ties go to the context-aware expert
    if s_ca >= s_cf:
        return EnsembleDecision(Expert.CONTEXT_AWARE, ca.word, s_ca, s_cf)
    return EnsembleDecision(Expert.CONTEXT_FREE, cf.word, s_ca, s_cf)


def char_level_ensemble(ca: Prediction, cf: Prediction) -> str:
    """Position-wise pick of the more confident expert's character.

    A position past an expert's EOS has probability 0 for that expert.
    """
    out = []
    pa, pf = ca.max_probs, cf.max_probs
    for t in range(max(ca.length, cf.length)):
        a = pa[t] if t < ca.length else 0.0
        f = pf[t] if t < cf.length else 0.0
        out.append(ca.chars[t] if a >= f else cf.chars[t])
    return "".join(out)


# --- prediction files -------------------------------------------------------

def default_labels(charset: Charset) -> tuple[str, ...]:
    return charset.symbols + (EOS, PAD)


def prediction_to_json(sample_id: str, pred: Prediction, top_k: int = 5) -> str:
    steps = []
    for row in pred.probs:
        # stable: ties keep class order
        order = np.argsort(-row, kind="stable")[:top_k]
        steps.append({"p": [[pred.labels[k], float(row[k])] for k in order]})
    return json.dumps({"id": sample_id, "word": pred.word, "steps": steps}, ensure_ascii=False)


def write_predictions(items: Iterable[tuple[str, Prediction]], path, top_k: int = 5) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sid, pred in items:
            fh.write(prediction_to_json(sid, pred, top_k) + "\n")


def read_predictions(path, charset: Charset | None = None) -> dict[str, Prediction]:
    """Load a prediction JSONL file keyed by id.

    Unlisted classes get probability 0. With a ``charset``, any step entry
    naming a class outside the charset (and specials) is an input error.
    """
    raw = []
    seen_labels: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sid = str(obj["id"])
                word = obj["word"]
                steps = [[(str(c), float(p)) for c, p in st["p"]] for st in obj["steps"]]
            except (ValueError, KeyError, TypeError) as e:
                raise InputError(path, lineno, f"malformed prediction record: {e}") from None
            if not isinstance(word, str):
                raise InputError(path, lineno, "'word' must be a string")
            for st in steps:
                if not st:
                    raise InputError(path, lineno, "step with no entries")
                for c, p in st:
                    if p < 0 or p != p:
                        raise InputError(path, lineno, f"invalid probability {p} for {c!r}")
                    seen_labels.add(c)
            raw.append((lineno, sid, word, steps))
    if charset is not None:
        allowed = set(charset.symbols) | set(SPECIALS)
        for lineno, _, _, steps in raw:
            bad = sorted({c for st in steps for c, _ in st if c not in allowed})
            if bad:
                raise InputError(path, lineno, f"classes not in charset manifest: {bad[:10]}")
        labels = default_labels(charset)
    else:
        symbols = sorted(seen_labels - set(SPECIALS))
        labels = tuple(symbols) + (EOS, PAD)
    index = {c: i for i, c in enumerate(labels)}
    out: dict[str, Prediction] = {}
    for lineno, sid, word, steps in raw:
        if sid in out:
            raise InputError(path, lineno, f"duplicate id {sid!r}")
        probs = np.zeros((len(steps), len(labels)))
        for t, st in enumerate(steps):
            for c, p in st:
                if c not in index:
                    raise InputError(path, lineno, f"unknown class {c!r}")
                probs[t, index[c]] = p
        pred = Prediction(probs, labels)
        if pred.word != word:
            raise InputError(path, lineno, f"'word' {word!r} disagrees with decoded steps {pred.word!r}")
        out[sid] = pred
    return out


DECISION_COLUMNS = ["id", "chosen", "score_ca", "score_cf", "word"]


def _fmt_score(x: float) -> str:
    return "-inf" if x == -math.inf else repr(float(x))


def decisions_to_csv(rows: Sequence[tuple[str, EnsembleDecision]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DECISION_COLUMNS)
    for sid, d in rows:
        w.writerow([sid, d.chosen.value, _fmt_score(d.score_ca), _fmt_score(d.score_cf), d.word])
    return buf.getvalue()
