"""Word NLL and post-hoc / loss-level long-tail baselines on raw numbers.

Everything here is a pure function of arrays; no training loop.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from .charset import EOS
from .ensemble import Prediction
from .errors import InputError


def word_nll(pred: Prediction, gt: str) -> float:
    """Mean negative log-probability of the ground-truth characters and EOS.

    Averages over ``len(gt) + 1`` steps. If the prediction has exactly
    ``len(gt)`` steps there is no EOS row and the average is over ``len(gt)``.
    Returns +inf when a target has probability 0.
    """
    n_steps = len(pred.probs)
    if n_steps < len(gt):
        raise ValueError(f"{n_steps} steps cannot cover a {len(gt)}-character word")
    index = {c: i for i, c in enumerate(pred.labels)}
    targets = list(gt) + ([EOS] if n_steps > len(gt) else [])
    if not targets:
        raise ValueError("nothing to score")
    total = 0.0
    for t, c in enumerate(targets):
        if c not in index:
            raise ValueError(f"ground-truth class {c!r} not in prediction labels")
        p = pred.probs[t, index[c]]
        if p <= 0:
            return math.inf
        total -= math.log(p)
    return total / len(targets)


def focal_loss(p: float, gamma: float = 1.0) -> float:
    """-(1 - p)**gamma * log(p) for the probability of the true class."""
    if not p > 0:
        raise ValueError(f"probability must be in (0, 1], got {p}")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return -((1.0 - p) ** gamma) * math.log(p)


def tau_normalize(weights, tau: float = 1.0, labels: Sequence[str] | None = None) -> np.ndarray:
    """Scale each class row ``w_i`` to ``w_i / ||w_i||**tau``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be (classes, dim)")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    if tau == 0:
        return w.copy()
    norms = np.linalg.norm(w, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        name = labels[zero[0]] if labels is not None else f"#{zero[0]}"
        raise ValueError(f"class {name} has a zero-norm weight vector")
    return w / norms[:, None] ** tau


def _check_prior(prior, name: str, size: int) -> np.ndarray:
    p = np.asarray(prior, dtype=float)
    if p.shape != (size,):
        raise ValueError(f"{name} has shape {p.shape}, expected ({size},)")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} is not a probability distribution")
    return p


def uniform_prior(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def pc_softmax(logits, source, target=None) -> np.ndarray:
    """Post-compensated softmax: swap the source label prior for ``target``.

    ``target`` defaults to uniform. Works on a single logit vector or a
    (steps, classes) matrix.
    """
    z = np.asarray(logits, dtype=float)
    k = z.shape[-1]
    ps = _check_prior(source, "source prior", k)
    if (ps <= 0).any():
        raise ValueError("source prior has a zero entry")
    pt = uniform_prior(k) if target is None else _check_prior(target, "target prior", k)
    with np.errstate(divide="ignore"):
        adjusted = z - np.log(ps) + np.log(pt)
    return softmax(adjusted, axis=-1)


def balanced_softmax_loss(logits, target: int, train_prior) -> float:
    """Cross-entropy of softmax(z + log pi) at ``target``."""
    z = np.asarray(logits, dtype=float)
    pi = _check_prior(train_prior, "train prior", z.shape[-1])
    if (pi <= 0).any():
        raise ValueError("train prior has a zero entry")
    return float(-log_softmax(z + np.log(pi))[target])


def cross_entropy(logits, target: int) -> float:
    return float(-log_softmax(np.asarray(logits, dtype=float))[target])


# --- file formats -----------------------------------------------------------

def read_class_manifest(path) -> list[str]:
    """One class name per line, in logit column order (specials included)."""
    classes = [ln for ln in Path(path).read_text(encoding="utf-8").split("\n") if ln != ""]
    if len(set(classes)) != len(classes):
        raise InputError(path, None, "duplicate class in manifest")
    return classes


def read_logits(path, num_classes: int) -> list[tuple[str, np.ndarray]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sid = str(obj["id"])
                steps = np.asarray(obj["steps"], dtype=float)
            except (ValueError, KeyError, TypeError) as e:
                raise InputError(path, lineno, f"malformed logit record: {e}") from None
            if steps.ndim != 2 or steps.shape[1] != num_classes:
                raise InputError(
                    path, lineno, f"steps shape {steps.shape} does not match {num_classes} classes"
                )
            if not np.isfinite(steps).all():
                raise InputError(path, lineno, "non-finite logit")
            out.append((sid, steps))
    return out


def read_prior(path, classes: Sequence[str]) -> np.ndarray:
    """Prior TSV ``class<TAB>prob``; classes not listed get 0."""
    index = {c: i for i, c in enumerate(classes)}
    p = np.zeros(len(classes))
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise InputError(path, lineno, "expected 'class<TAB>prob'")
        if parts[0] not in index:
            raise InputError(path, lineno, f"class {parts[0]!r} not in manifest")
        try:
            p[index[parts[0]]] = float(parts[1])
        except ValueError:
            raise InputError(path, lineno, f"bad probability {parts[1]!r}") from None
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise InputError(path, None, f"prior sums to {p.sum():.12g}, not 1")
    return p


def read_weights(path) -> tuple[list[str], np.ndarray]:
    """Weights TSV ``class<TAB>w1<TAB>w2...``."""
    names, rows = [], []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line:
            continue
        parts = line.split("\t")
        try:
            rows.append([float(x) for x in parts[1:]])
        except ValueError:
            raise InputError(path, lineno, "non-numeric weight") from None
        if not rows[-1] or (rows and len(rows[-1]) != len(rows[0])):
            raise InputError(path, lineno, "weight rows must share one non-zero dimension")
        names.append(parts[0])
    return names, np.asarray(rows)


def weights_to_tsv(names: Sequence[str], weights: np.ndarray) -> str:
    return "".join("\t".join([n] + [repr(float(x)) for x in row]) + "\n" for n, row in zip(names, weights))


def write_weights(names: Sequence[str], weights: np.ndarray, path) -> None:
    Path(path).write_text(weights_to_tsv(names, weights), encoding="utf-8", newline="\n")
