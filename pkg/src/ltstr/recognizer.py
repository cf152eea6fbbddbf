"""Desk-scale noisy-channel recognizer with a context-free and a context-aware expert.

Glyphs are unit vectors; an "image" of a word is its sequence of glyph
centroids plus isotropic Gaussian noise. The context-free expert scores each
observation against every centroid under a (near-uniform) class prior; the
context-aware expert replaces the prior with a character bigram model
conditioned on its own previous output, so its step posteriors have the
form p(y_t | y_<t).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .charset import EOS, Charset
from .ensemble import Prediction, default_labels

MAX_LEN = 25


class ExpertKind(str, enum.Enum):
    CONTEXT_AWARE = "context-aware"
    CONTEXT_FREE = "context-free"


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class GlyphModel:
    charset: Charset
    centroids: np.ndarray
    sigma: float
    confusable_pairs: tuple[tuple[str, str], ...] = ()
    seed: int | None = None

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def random(
        cls,
        charset: Charset,
        dim: int = 16,
        sigma: float = 0.3,
        confusable_fraction: float = 0.05,
        seed: int = 0,
        confusable_cos: float = 0.96,
        max_cos: float = 0.9,
        family_size: int = 10,
        family_cos: float = 0.8,
    ) -> "GlyphModel":
        """Random unit centroids grouped into look-alike families.

        Members of a family (like characters sharing a radical) sit at cosine
        about ``family_cos`` from each other; ``family_size=1`` gives plain
        random centroids. A fraction of symbols is additionally paired up as
        near-duplicates at exactly ``confusable_cos``. Every other pair stays
        below ``max_cos``.
        """
        rng = np.random.default_rng(seed)
        K = len(charset)
        n_fam = -(-K // family_size)
        bases = _unit(rng.standard_normal((n_fam, dim)))
        family = rng.permutation(np.arange(K) % n_fam)
        spread = np.sqrt(1.0 / family_cos - 1.0) if family_size > 1 else 1e6

        def draw(i):
            return _unit(bases[family[i]] + spread * _unit(rng.standard_normal(dim)))

        C = np.stack([draw(i) for i in range(K)])
        # re-draw rows until every pair is below max_cos
        for _ in range(10000):
            G = C @ C.T
            np.fill_diagonal(G, -1)
            bad = np.flatnonzero((G >= max_cos).any(axis=1))
            if bad.size == 0:
                break
            C[bad[0]] = draw(bad[0])
        else:
            raise ValueError("could not place centroids; use a larger dim")

        n_pairs = int(round(confusable_fraction * K / 2))
        pairs: list[tuple[int, int]] = []
        members = rng.permutation(K)[: 2 * n_pairs]
        theta = np.arccos(confusable_cos)
        for a, b in members.reshape(-1, 2):
            for _ in range(1000):
                u = rng.standard_normal(dim)
                u -= (u @ C[a]) * C[a]
                u = _unit(u)
                cand = np.cos(theta) * C[a] + np.sin(theta) * u
                sims = C @ cand
                sims[[a, b]] = -1
                if sims.max() < max_cos:
                    C[b] = cand
                    break
            else:
                raise ValueError("could not place a confusable pair")
            pairs.append((int(a), int(b)))
        sym = charset.symbols
        return cls(charset, C, float(sigma), tuple((sym[a], sym[b]) for a, b in pairs), seed)

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def log_likelihood(self, obs: np.ndarray) -> np.ndarray:
        """-||x - c_k||^2 / (2 sigma^2) for every observation row and class."""
        obs = np.atleast_2d(obs)
        d2 = np.maximum((obs ** 2).sum(axis=1)[:, None] - 2 * obs @ self.centroids.T + 1.0, 0.0)
        if self.sigma == 0:
            # noiseless limit: a delta at the exact centroid
            return np.where(d2 <= 1e-12, 0.0, -np.inf)
        return -d2 / (2 * self.sigma ** 2)


def render(word: str, glyphs: GlyphModel, seed) -> np.ndarray:
    """Noisy observation sequence, one row per character."""
    idx = [glyphs.charset.index(c) for c in word]
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((len(idx), glyphs.dim))
    return glyphs.centroids[idx] + glyphs.sigma * noise


@dataclass(frozen=True, eq=False)
class BigramLM:
    """Add-k smoothed character bigrams.

    Rows are contexts (START, then the charset symbols); columns are the
    symbols followed by EOS.
    """

    charset: Charset
    log_probs: np.ndarray
    k: float

    @classmethod
    def fit(cls, words: Sequence[str], charset: Charset, k: float = 0.1) -> "BigramLM":
        if k <= 0:
            raise ValueError("smoothing k must be positive")
        K = len(charset)
        counts = np.zeros((K + 1, K + 1))
        ix = charset.index
        for w in words:
            prev = 0
            for c in w:
                j = ix(c)
                counts[prev, j] += 1
                prev = j + 1
            counts[prev, K] += 1
        counts += k
        probs = counts / counts.sum(axis=1, keepdims=True)
        return cls(charset, np.log(probs), k)

    @classmethod
    def uniform(cls, charset: Charset) -> "BigramLM":
        K = len(charset)
        return cls(charset, np.full((K + 1, K + 1), -np.log(K + 1)), 1.0)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def prob(self, nxt: str, prev: str | None = None) -> float:
        K = len(self.charset)
        row = 0 if prev is None else self.charset.index(prev) + 1
        col = K if nxt == EOS else self.charset.index(nxt)
        return float(np.exp(self.log_probs[row, col]))


@dataclass(frozen=True, eq=False)
class ExpertModel:
    kind: ExpertKind
    glyphs: GlyphModel
    prior: np.ndarray
    lm: BigramLM | None = None
    max_len: int = MAX_LEN
    end_evidence: float = 4.0

    def __post_init__(self):
        if (self.kind is ExpertKind.CONTEXT_AWARE) != (self.lm is not None):
            raise ValueError("a context-aware expert needs a language model; context-free must not have one")


def fit_expert(
    kind: ExpertKind | str,
    train_words: Sequence[str],
    glyphs: GlyphModel,
    smoothing_k: float = 0.1,
    max_len: int = MAX_LEN,
    end_evidence: float = 4.0,
) -> ExpertModel:
    """Fit the class prior (per-occurrence) and, for context-aware, the bigram LM."""
    kind = ExpertKind(kind)
    if not train_words:
        raise ValueError("no training words")
    cs = glyphs.charset
    counts = np.zeros(len(cs))
    for w in train_words:
        for c in w:
            counts[cs.index(c)] += 1
    # a symbol unseen in training still needs a non-zero prior
    counts += 1e-12 * counts.sum() if counts.min() == 0 else 0
    prior = counts / counts.sum()
    lm = BigramLM.fit(train_words, cs, smoothing_k) if kind is ExpertKind.CONTEXT_AWARE else None
    return ExpertModel(kind, glyphs, prior, lm, max_len, end_evidence)


def _normalize_log(a: np.ndarray) -> np.ndarray:
    return np.exp(a - logsumexp(a, axis=-1, keepdims=True))


def decode(expert: ExpertModel, observations) -> Prediction:
    return decode_batch(expert, [observations])[0]


def decode_batch(expert: ExpertModel, batch: Sequence[np.ndarray]) -> list[Prediction]:
    """Greedy left-to-right decoding of many observation sequences.

    Each observed position yields a posterior over the charset. The step
    after the last observation is a blank: for the context-free expert it is
    EOS with probability 1; for the context-aware expert EOS (blank glyph at
    the origin) competes with every character under the LM, each character
    being ``end_evidence`` nats less likely than EOS on a blank. A winning
    character is emitted and decoding continues on blanks until EOS wins or
    ``max_len`` steps were produced.
    """
    g = expert.glyphs
    K = len(g.charset)
    labels = default_labels(g.charset)
    lengths = [len(o) for o in batch]
    if expert.kind is ExpertKind.CONTEXT_FREE:
        return [_decode_cf(expert, np.asarray(o, dtype=float).reshape(-1, g.dim), labels) for o in batch]

    lm = expert.lm.log_probs
    n = len(batch)
    rows: list[list[np.ndarray]] = [[] for _ in range(n)]
    prev = np.zeros(n, dtype=int)  # START row
    active = np.array([L > 0 for L in lengths])
    blank_ll = np.full(K + 1, -float(expert.end_evidence))
    blank_ll[K] = 0.0
    t = 0
    stacked = [np.asarray(o, dtype=float).reshape(-1, g.dim) for o in batch]
    while active.any():
        idx = np.flatnonzero(active)
        observed = np.array([t < lengths[i] for i in idx])
        post = np.zeros((idx.size, K + 2))
        if observed.any():
            oi = idx[observed]
            x = np.stack([stacked[i][t] for i in oi])
            logit = g.log_likelihood(x) + lm[prev[oi], :K]
            post[observed, :K] = _normalize_log(logit)
        if (~observed).any():
            bi = idx[~observed]
            logit = blank_ll[None, :] + lm[prev[bi]]
            post[~observed, : K + 1] = _normalize_log(logit)
        best = post.argmax(axis=1)
        for r, i in enumerate(idx):
            rows[i].append(post[r])
        ended = best == K
        prev[idx] = best + 1
        t += 1
        stop = ended | (t >= expert.max_len)
        # length cap: close with an explicit EOS row
        capped = ~ended & (t >= expert.max_len)
        for r in np.flatnonzero(capped):
            eos = np.zeros(K + 2)
            eos[K] = 1.0
            rows[idx[r]].append(eos)
        active[idx[stop]] = False
    out = []
    for i in range(n):
        if lengths[i] == 0:
            eos = np.zeros((1, K + 2))
            eos[0, K] = 1.0
            out.append(Prediction(eos, labels))
        else:
            out.append(Prediction(np.stack(rows[i]), labels))
    return out


def _decode_cf(expert: ExpertModel, obs: np.ndarray, labels) -> Prediction:
    K = len(expert.glyphs.charset)
    L = min(len(obs), expert.max_len)
    probs = np.zeros((L + 1, K + 2))
    if L:
        logit = expert.glyphs.log_likelihood(obs[:L]) + np.log(expert.prior)[None, :]
        probs[:L, :K] = _normalize_log(logit)
    probs[L, K] = 1.0
    return Prediction(probs, labels)
