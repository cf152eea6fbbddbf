"""Text-level WikiSynth / RandomSynth / CombinedSynth word lists and their statistics."""
from __future__ import annotations

import csv
import io
import json
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .charset import (
    CategoryThresholds,
    CharCategory,
    Charset,
    CountMode,
    FrequencyTable,
    build_frequency_table,
    categorize,
)
from .errors import InputError

MAX_LEN = 25
WIKI = "wiki"
RANDOM = "random"

# ASCII punctuation plus common CJK / typographic marks.
PUNCTUATION = frozenset(string.punctuation + "，。、！？；：「」『』（）《》〈〉【】…·“”‘’・～")


@dataclass(frozen=True)
class Corpus:
    words: tuple[tuple[str, int], ...]
    charset: Charset

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        for w, f in self.words:
            if f <= 0:
                raise ValueError(f"non-positive frequency for {w!r}")
            if any(c not in self.charset for c in w):
                raise ValueError(f"word {w!r} has characters outside the charset")

    def __len__(self):
        return len(self.words)

    @property
    def vocabulary(self) -> list[str]:
        return [w for w, _ in self.words]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([f for _, f in self.words], dtype=float)


@dataclass(frozen=True)
class LengthModel:
    """Discrete word-length distribution."""

    lengths: tuple[int, ...]
    weights: tuple[float, ...]

    @classmethod
    def fixed(cls, n: int) -> "LengthModel":
        if n < 1:
            raise ValueError("word length must be >= 1")
        return cls((n,), (1.0,))

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "LengthModel":
        c: Counter = Counter()
        for w, f in corpus.words:
            c[len(w)] += f
        lengths = tuple(sorted(c))
        total = sum(c.values())
        return cls(lengths, tuple(c[n] / total for n in lengths))

    @classmethod
    def from_words(cls, words: Sequence[str]) -> "LengthModel":
        c = Counter(len(w) for w in words if w)
        lengths = tuple(sorted(c))
        total = sum(c.values())
        return cls(lengths, tuple(c[n] / total for n in lengths))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p = np.asarray(self.weights, dtype=float)
        return rng.choice(np.asarray(self.lengths), size=n, p=p / p.sum())


def split_tokens(text: str) -> list[str]:
    tokens, cur = [], []
    for ch in text:
        if ch.isspace() or ch in PUNCTUATION:
            if cur:
                tokens.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        tokens.append("".join(cur))
    return tokens


def tokenize_corpus(text: str, charset: Charset, max_len: int = MAX_LEN) -> Corpus:
    """Whitespace/punctuation tokenizer with a length cap and charset filter.

    Over-long tokens are dropped before filtering; out-of-charset characters
    are removed from the remaining tokens.
    """
    counts: Counter = Counter()
    for tok in split_tokens(text):
        if len(tok) > max_len:
            continue
        kept = "".join(c for c in tok if c in charset)
        if kept:
            counts[kept] += 1
    if not counts:
        raise ValueError("corpus is empty after tokenization and filtering")
    # first-seen order is irrelevant downstream; sort for determinism
    words = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Corpus(tuple(words), charset)


def sample_wiki(corpus: Corpus, n: int, seed: int) -> list[str]:
    """Frequency-proportional sampling with replacement."""
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    p = corpus.frequencies
    idx = rng.choice(len(corpus), size=n, p=p / p.sum())
    vocab = corpus.vocabulary
    return [vocab[i] for i in idx]


def sample_random(
    charset: Charset, n: int, length_model: LengthModel | int, seed: int
) -> list[str]:
    """Words whose characters are i.i.d. uniform over the charset."""
    if len(charset) == 0:
        raise ValueError("empty charset")
    if isinstance(length_model, int):
        length_model = LengthModel.fixed(length_model)
    rng = np.random.default_rng(seed)
    lengths = length_model.sample(rng, n)
    chars = rng.integers(0, len(charset), size=int(lengths.sum()))
    sym = charset.symbols
    out, pos = [], 0
    for L in lengths:
        out.append("".join(sym[k] for k in chars[pos:pos + L]))
        pos += L
    return out


def sample_combined(
    corpus: Corpus,
    charset: Charset,
    n: int,
    seed: int,
    length_model: LengthModel | int | None = None,
) -> list[tuple[str, str]]:
    """ceil(n/2) wiki words and floor(n/2) random words, shuffled, tagged by origin."""
    if n < 2:
        raise ValueError("combined sampling needs n >= 2")
    s_wiki, s_rand, s_shuf = np.random.SeedSequence(seed).spawn(3)
    if length_model is None:
        length_model = LengthModel.from_corpus(corpus)
    wiki = sample_wiki(corpus, (n + 1) // 2, _seed_int(s_wiki))
    rand = sample_random(charset, n // 2, length_model, _seed_int(s_rand))
    tagged = [(w, WIKI) for w in wiki] + [(w, RANDOM) for w in rand]
    order = np.random.default_rng(s_shuf).permutation(len(tagged))
    return [tagged[i] for i in order]


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# --- synthetic languages ----------------------------------------------------

def synthetic_charset(size: int, start: int = 0xAC00) -> Charset:
    """``size`` consecutive code points (Hangul syllables by default)."""
    return Charset(tuple(chr(start + i) for i in range(size)))


def zipf_corpus(
    charset: Charset,
    seed: int,
    exponent: float = 1.0,
    vocab_size: int = 20000,
    max_len: int = MAX_LEN,
    char_exponent: float = 1.0,
    successors: int = 8,
    successor_mass: float = 0.75,
    n_endings: int = 10,
    ending_rate: float = 0.9,
    mean_stem: float = 4.0,
) -> Corpus:
    """A toy language whose words have Zipf(``exponent``) frequencies.

    Characters have Zipf(``char_exponent``) popularity, so rare characters
    live in few words and the corpus is long-tailed at the character level.
    Stems follow a sparse first-order Markov chain (each character prefers a
    handful of successors) and most words end in one of a few suffix
    characters, which gives a bigram model real context to exploit.
    """
    rng = np.random.default_rng(seed)
    K = len(charset)
    if K < n_endings + 2:
        raise ValueError("charset too small for the synthetic language")
    pop = 1.0 / np.arange(1, K + 1) ** char_exponent
    pop = pop[rng.permutation(K)]
    order = np.argsort(-pop, kind="stable")
    # suffixes are mid-popularity characters
    endings = order[2::3][:n_endings]
    if len(endings) < n_endings:
        endings = order[2:2 + n_endings]
    stem_pop = pop.copy()
    stem_pop[endings] = 0.0
    stem_pop /= stem_pop.sum()
    succ = np.zeros((K, K))
    for a in range(K):
        nxt = rng.choice(K, size=successors, replace=False, p=stem_pop)
        succ[a, nxt] = rng.dirichlet(np.ones(successors))
    trans = successor_mass * succ + (1 - successor_mass) * stem_pop[None, :]
    trans /= trans.sum(axis=1, keepdims=True)
    end_w = rng.dirichlet(np.ones(n_endings))
    cum = np.cumsum(trans, axis=1)

    sym = charset.symbols
    words: list[str] = []
    seen: set[str] = set()
    attempts = 0
    while len(words) < vocab_size:
        attempts += 1
        if attempts > 50 * vocab_size:
            raise ValueError("could not generate enough distinct words")
        L = 1 + rng.poisson(mean_stem - 1)
        if L + 1 > max_len:
            continue
        ks = [int(rng.choice(K, p=stem_pop))]
        for _ in range(L - 1):
            ks.append(int(np.searchsorted(cum[ks[-1]], rng.random() * cum[ks[-1], -1])))
        if rng.random() < ending_rate:
            ks.append(int(endings[rng.choice(n_endings, p=end_w)]))
        w = "".join(sym[k] for k in ks)
        if w not in seen:
            seen.add(w)
            words.append(w)
    ranks = np.arange(1, vocab_size + 1)
    freqs = np.ceil(1e6 / ranks ** exponent).astype(int)
    return Corpus(tuple(zip(words, freqs.tolist())), charset)


# --- statistics -------------------------------------------------------------

@dataclass
class DistributionStats:
    per_sample: FrequencyTable
    per_occurrence: FrequencyTable
    categories: dict[str, CharCategory]
    category_counts: dict[CharCategory, int]
    category_proportions: dict[CharCategory, float]
    count_mode: CountMode

    def curve(self) -> list[tuple[int, str, int]]:
        """(rank, char, count) sorted by descending count: the long-tail plot."""
        table = self.per_sample if self.count_mode is CountMode.PER_SAMPLE else self.per_occurrence
        return [(r, c, n) for r, (c, n) in enumerate(table.sorted_items(), 1)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["char", "count_per_sample", "count_per_occurrence", "category"])
        for _, c, _ in self.curve():
            w.writerow([c, self.per_sample[c], self.per_occurrence[c], self.categories[c].value])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "count_mode": self.count_mode.value,
            "total_samples": self.per_sample.total_samples,
            "category_counts": {k.value: v for k, v in self.category_counts.items()},
            "category_proportions": {k.value: v for k, v in self.category_proportions.items()},
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def distribution_stats(
    words: Sequence[str],
    charset: Charset,
    thresholds: CategoryThresholds = CategoryThresholds(),
    count_mode: CountMode | str = CountMode.PER_SAMPLE,
) -> DistributionStats:
    """Both frequency tables, categories and category shares over the whole charset."""
    if not words:
        raise ValueError("no words")
    count_mode = CountMode(count_mode)
    ps = build_frequency_table(words, charset, CountMode.PER_SAMPLE, include_zero=True)
    po = build_frequency_table(words, charset, CountMode.PER_OCCURRENCE, include_zero=True)
    cats = categorize(ps if count_mode is CountMode.PER_SAMPLE else po, thresholds, charset)
    counts = {cat: sum(1 for v in cats.values() if v is cat) for cat in CharCategory}
    props = {cat: counts[cat] / len(cats) for cat in CharCategory}
    return DistributionStats(ps, po, cats, counts, props, count_mode)


# --- dataset files ----------------------------------------------------------

def dataset_to_tsv(rows: Sequence[tuple[str, str]], prefix: str = "") -> str:
    """TSV ``id<TAB>word<TAB>origin`` with zero-padded sequential ids."""
    width = max(1, len(str(len(rows) - 1)))
    return "".join(f"{prefix}{i:0{width}d}\t{w}\t{o}\n" for i, (w, o) in enumerate(rows))


def write_dataset(rows: Sequence[tuple[str, str]], path, prefix: str = "") -> None:
    Path(path).write_text(dataset_to_tsv(rows, prefix), encoding="utf-8", newline="\n")


def read_dataset(path) -> list[tuple[str, str, str | None]]:
    """Rows of ``(id, word, origin)``; origin is None for two-column files."""
    out = []
    ids = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise InputError(path, lineno, "expected 'id<TAB>word[<TAB>origin]'")
        origin = parts[2] if len(parts) == 3 else None
        if origin is not None and origin not in (WIKI, RANDOM):
            raise InputError(path, lineno, f"unknown origin {origin!r}")
        if parts[0] in ids:
            raise InputError(path, lineno, f"duplicate id {parts[0]!r}")
        ids.add(parts[0])
        out.append((parts[0], parts[1], origin))
    return out
