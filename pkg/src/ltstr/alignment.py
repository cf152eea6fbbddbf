"""Linear-space optimal alignment under unit edit costs.

Divide and conquer in the spirit of Hirschberg: only O(min(|gt|, |pred|))
distances are held per recursion level, yet the script is exactly the one a
full-table traceback would produce with the preference
Match > Substitute > Delete > Insert at every step.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence


class StepKind(str, enum.Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class AlignmentStep:
    kind: StepKind
    gt_char: str | None = None
    pred_char: str | None = None

    def __post_init__(self):
        k = self.kind
        if k in (StepKind.MATCH, StepKind.SUBSTITUTE):
            if self.gt_char is None or self.pred_char is None:
                raise ValueError(f"{k.value} step needs both characters")
            if (k is StepKind.MATCH) != (self.gt_char == self.pred_char):
                raise ValueError(f"inconsistent {k.value} step {self.gt_char!r}/{self.pred_char!r}")
        elif k is StepKind.DELETE:
            if self.gt_char is None or self.pred_char is not None:
                raise ValueError("delete step carries only gt_char")
        elif self.pred_char is None or self.gt_char is not None:
            raise ValueError("insert step carries only pred_char")


@dataclass(frozen=True)
class Alignment:
    steps: tuple[AlignmentStep, ...]
    cost: int

    def gt_side(self) -> list[str]:
        return [s.gt_char for s in self.steps if s.kind is not StepKind.INSERT]

    def pred_side(self) -> list[str]:
        return [s.pred_char for s in self.steps if s.kind is not StepKind.DELETE]


def _match(a, b):
    return AlignmentStep(StepKind.MATCH, a, b)


def _sub(a, b):
    return AlignmentStep(StepKind.SUBSTITUTE, a, b)


def _del(a):
    return AlignmentStep(StepKind.DELETE, gt_char=a)


def _ins(b):
    return AlignmentStep(StepKind.INSERT, pred_char=b)


def _next_row(prev: list[int], xc, y: Sequence[str]) -> list[int]:
    cur = [prev[0] + 1] + [0] * len(y)
    for j, yc in enumerate(y, 1):
        cur[j] = min(prev[j - 1] + (xc != yc), prev[j] + 1, cur[j - 1] + 1)
    return cur


def _last_row(x: Sequence[str], y: Sequence[str]) -> list[int]:
    """Edit distances from all of ``x`` to every prefix of ``y``; O(|y|) memory."""
    row = list(range(len(y) + 1))
    for xc in x:
        row = _next_row(row, xc, y)
    return row


def _trace(top: list[int], rows: Sequence[str], cols: Sequence[str], flipped: bool, out: list) -> int:
    """Traceback from the bottom-right corner of a block up to its first row.

    ``top`` holds the forward distances on the row just above the block.
    Steps are appended in reverse order; returns the column where the path
    reaches ``top``. The block is halved by rows and the lower half traced
    first, which reproduces a full-table traceback in O(len(cols)) memory
    per level.
    """
    if len(rows) == 1:
        return _trace_row(top, rows[0], cols, flipped, out)
    h = len(rows) // 2
    mid = top
    for xc in rows[:h]:
        mid = _next_row(mid, xc, cols)
    e = _trace(mid, rows[h:], cols, flipped, out)
    # distances left of column e do not depend on the columns after it
    return _trace(top, rows[:h], cols[:e], flipped, out)


def _trace_row(top: list[int], xc, cols: Sequence[str], flipped: bool, out: list) -> int:
    cur = _next_row(top, xc, cols)
    j = len(cols)
    # Match > Substitute > Delete > Insert. With rows on the prediction side
    # a delete is a move along the row and an insert a move up.
    while True:
        yc = cols[j - 1] if j else None
        diag = j and cur[j] == top[j - 1] + (xc != yc)
        up = cur[j] == top[j] + 1
        left = j and cur[j] == cur[j - 1] + 1
        if diag:
            g, p = (yc, xc) if flipped else (xc, yc)
            out.append(_match(g, p) if g == p else _sub(g, p))
            return j - 1
        if not flipped and up:
            out.append(_del(xc))
            return j
        if flipped and left:
            out.append(_del(yc))
            j -= 1
            continue
        if flipped:
            out.append(_ins(xc))
            return j
        out.append(_ins(yc))
        j -= 1


def align(gt: Sequence[str], pred: Sequence[str]) -> Alignment:
    """Minimum-cost edit script turning ``gt`` into ``pred``.

    Accepts strings or lists of symbols (so multi-character tokens such as
    ``[UNK]`` stay atomic). Ties between equal-cost scripts are resolved
    deterministically.
    """
    gt, pred = list(gt), list(pred)
    # rows run over the longer side so each stored row is the shorter one
    flipped = len(pred) > len(gt)
    rows, cols = (pred, gt) if flipped else (gt, pred)
    rev: list[AlignmentStep] = []
    e = _trace(list(range(len(cols) + 1)), rows, cols, flipped, rev) if rows else len(cols)
    # what is left on the first row is all one kind of step
    rev.extend(_ins(c) if not flipped else _del(c) for c in reversed(cols[:e]))
    steps = rev[::-1]
    cost = sum(s.kind is not StepKind.MATCH for s in steps)
    return Alignment(tuple(steps), cost)


def edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    return _last_row(a, b)[-1]
