"""Character inventory, training frequencies and many/medium/few buckets.

One Unicode scalar value is one character; no normalization is applied.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InputError

PAD = "[PAD]"
EOS = "[EOS]"
UNK = "[UNK]"
SPECIALS = (PAD, EOS, UNK)


class CountMode(str, enum.Enum):
    PER_SAMPLE = "per-sample"
    PER_OCCURRENCE = "per-occurrence"


class CharCategory(str, enum.Enum):
    FEW = "few"
    MEDIUM = "medium"
    MANY = "many"


@dataclass(frozen=True)
class Charset:
    symbols: tuple[str, ...]
    specials: tuple[str, ...] = SPECIALS

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            dup = [c for c, n in Counter(self.symbols).items() if n > 1]
            raise ValueError(f"duplicate symbols in charset: {dup[:10]}")
        clash = set(self.symbols) & set(self.specials)
        if clash:
            raise ValueError(f"specials overlap symbols: {sorted(clash)}")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.symbols)})

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, ch):
        return ch in self._index

    def __iter__(self):
        return iter(self.symbols)

    def index(self, ch: str) -> int:
        return self._index[ch]

    @property
    def classes(self) -> tuple[str, ...]:
        return self.symbols + self.specials

    @property
    def num_classes(self) -> int:
        return len(self.symbols) + len(self.specials)

    def map_unknown(self, text: str) -> list[str]:
        """Split ``text`` into characters, replacing anything outside the set by UNK."""
        return [c if c in self._index else UNK for c in text]

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "Charset":
        seen = sorted({c for w in words for c in w})
        return cls(tuple(seen))


def read_charset(path) -> Charset:
    """Read a class manifest: one symbol per line, UTF-8. Special tokens are skipped."""
    symbols = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if line == "":
            continue
        if line in SPECIALS:
            continue
        if len(line) != 1:
            raise InputError(path, lineno, f"expected one character per line, got {line!r}")
        symbols.append(line)
    try:
        return Charset(tuple(symbols))
    except ValueError as e:
        raise InputError(path, None, str(e)) from None


def write_charset(charset: Charset, path, with_specials: bool = False) -> None:
    rows = charset.classes if with_specials else charset.symbols
    Path(path).write_text("".join(f"{c}\n" for c in rows), encoding="utf-8", newline="\n")


@dataclass(frozen=True)
class CategoryThresholds:
    many_min: int = 1500
    medium_min: int = 100

    def __post_init__(self):
        if not (self.many_min > self.medium_min > 0):
            raise ValueError(
                f"need many_min > medium_min > 0, got {self.many_min}, {self.medium_min}"
            )

    def category(self, n: int) -> CharCategory:
        if n >= self.many_min:
            return CharCategory.MANY
        if n >= self.medium_min:
            return CharCategory.MEDIUM
        return CharCategory.FEW


@dataclass(frozen=True)
class FrequencyTable:
    """Per-character training counts ``n_i``.

    In per-sample mode (the default everywhere) a word contributes at most
    one to each distinct character it contains.
    """

    counts: Mapping[str, int]
    mode: CountMode = CountMode.PER_SAMPLE
    total_samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "counts", dict(self.counts))
        object.__setattr__(self, "mode", CountMode(self.mode))

    def __getitem__(self, ch: str) -> int:
        return self.counts.get(ch, 0)

    def __add__(self, other: "FrequencyTable") -> "FrequencyTable":
        if self.mode != other.mode:
            raise ValueError("cannot add tables with different count modes")
        merged = Counter(self.counts)
        merged.update(other.counts)
        keys = set(self.counts) | set(other.counts)
        return FrequencyTable(
            {k: merged[k] for k in keys}, self.mode, self.total_samples + other.total_samples
        )

    def sorted_items(self) -> list[tuple[str, int]]:
        # descending count, codepoint order among ties
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def build_frequency_table(
    words: Sequence[str],
    charset: Charset,
    mode: CountMode | str = CountMode.PER_SAMPLE,
    include_zero: bool = False,
) -> FrequencyTable:
    mode = CountMode(mode)
    counts: Counter = Counter()
    for w in words:
        for c in w:
            if c not in charset:
                raise ValueError(f"word {w!r} contains character {c!r} outside the charset")
        counts.update(set(w) if mode is CountMode.PER_SAMPLE else w)
    if include_zero:
        for c in charset.symbols:
            counts.setdefault(c, 0)
    return FrequencyTable(dict(counts), mode, len(words))


def categorize(
    table: FrequencyTable,
    thresholds: CategoryThresholds = CategoryThresholds(),
    charset: Charset | Iterable[str] | None = None,
) -> dict[str, CharCategory]:
    """Bucket every character of the table (and of ``charset``, if given).

    Characters missing from the table have ``n_i = 0`` and land in FEW.
    """
    chars = set(table.counts)
    if charset is not None:
        chars |= set(charset)
    return {c: thresholds.category(table[c]) for c in sorted(chars)}


def write_frequency_table(table: FrequencyTable, path) -> None:
    lines = [f"#mode={table.mode.value}", f"#total={table.total_samples}"]
    lines += [f"{c}\t{n}" for c, n in table.sorted_items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_frequency_table(path) -> FrequencyTable:
    mode = CountMode.PER_SAMPLE
    total = 0
    counts = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line:
            continue
        if line.startswith("#mode="):
            try:
                mode = CountMode(line[len("#mode="):])
            except ValueError:
                raise InputError(path, lineno, f"unknown count mode in {line!r}") from None
            continue
        if line.startswith("#total="):
            try:
                total = int(line[len("#total="):])
            except ValueError:
                raise InputError(path, lineno, f"bad total in {line!r}") from None
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise InputError(path, lineno, "expected 'character<TAB>count'")
        try:
            n = int(parts[1])
        except ValueError:
            raise InputError(path, lineno, f"count is not an integer: {parts[1]!r}") from None
        if n < 0:
            raise InputError(path, lineno, "negative count")
        counts[parts[0]] = n
    return FrequencyTable(counts, mode, total)
