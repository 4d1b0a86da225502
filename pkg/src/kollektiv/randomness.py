"""Place selections and the randomness audit.

A place selection decides whether to keep position ``j`` from ``j`` and the
labels strictly before ``j``. Rules see the past through :class:`PastView`,
which refuses to reveal position ``j`` or anything later.
"""
from __future__ import annotations

import inspect
import re
import warnings
from collections.abc import Sequence as SequenceABC
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .collectives import (
    Collective,
    StabilizationVerdict,
    Tolerance,
    fit_schedule,
    sqrt_tolerance,
    stabilization_audit,
)
from .errors import EmptySelection, InadmissibleSelection

DEFAULT_MIN_LENGTH = 1000


class PastView(SequenceABC):
    """Read-only window onto the labels at positions ``0 .. j-1``."""

    __slots__ = ("_labels", "_j")

    def __init__(self, labels: Sequence, j: int):
        self._labels = labels
        self._j = j

    def __len__(self):
        return self._j

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._labels[k] for k in range(*i.indices(self._j))]
        if i < 0:
            i += self._j
            if i < 0:
                raise IndexError("position before the start of the sequence")
        if i >= self._j:
            raise InadmissibleSelection(f"rule at position {self._j} read position {i}")
        return self._labels[i]


_PROBE = tuple(f"<probe{k}>" for k in range(12))


class PlaceSelection:
    """A named admissible selection rule ``rule(j, past) -> bool``.

    ``mask`` is an optional vectorized equivalent taking ``(codes, label_set)``
    and returning a boolean array; built-ins provide one so audits over long
    prefixes stay fast. The rule remains the definition.
    """

    def __init__(self, name: str, rule: Callable, mask: Callable | None = None):
        params = [
            p for p in inspect.signature(rule).parameters.values()
            if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD) and p.default is p.empty
        ]
        if len(params) != 2:
            raise InadmissibleSelection(
                f"selection {name!r}: rule must take exactly (position, past), got {len(params)} arguments"
            )
        for j in range(len(_PROBE) + 1):
            try:
                rule(j, PastView(_PROBE, j))
            except InadmissibleSelection as exc:
                raise InadmissibleSelection(f"selection {name!r}: {exc}") from None
            except Exception:
                # probe labels are foreign; only look-ahead matters here
                pass
        self.name = name
        self.rule = rule
        self._mask = mask

    def __repr__(self):
        return f"PlaceSelection({self.name!r})"

    def select(self, j: int, past: Sequence) -> bool:
        return bool(self.rule(j, PastView(past, j)))

    def positions(self, c: Collective, n: int | None = None, vectorized: bool = True) -> np.ndarray:
        n = len(c) if n is None else n
        c = c.ensure(n)
        if vectorized and self._mask is not None:
            return np.flatnonzero(self._mask(c.codes[:n], c.label_set))
        labels = c.labels[:n]
        return np.array([j for j in range(n) if self.rule(j, PastView(labels, j))], dtype=np.int64)


def apply_selection(c: Collective, s: PlaceSelection, n: int | None = None, vectorized: bool = True) -> Collective:
    """Order-preserving subsequence of the selected positions among the first ``n``."""
    n = len(c) if n is None else n
    pos = s.positions(c, n, vectorized)
    if pos.size == 0:
        warnings.warn(f"selection {s.name!r} selected nothing", EmptySelection, stacklevel=2)
    return Collective(c.label_set, c.ensure(n).codes[pos])


# -- built-in selections -----------------------------------------------------

def select_all() -> PlaceSelection:
    return PlaceSelection("all", lambda j, past: True, lambda codes, ls: np.ones(len(codes), bool))


def arithmetic(step: int, offset: int = 1) -> PlaceSelection:
    """Positions ``offset, offset+step, offset+2*step, ...`` (1-based)."""
    if step < 1 or offset < 1:
        raise ValueError("step and offset must be >= 1")

    def rule(j, past):
        return j + 1 >= offset and (j + 1 - offset) % step == 0

    def mask(codes, ls):
        pos = np.arange(1, len(codes) + 1)
        return (pos >= offset) & ((pos - offset) % step == 0)

    return PlaceSelection(f"arithmetic(step={step},offset={offset})", rule, mask)


def after_word(word) -> PlaceSelection:
    """Positions immediately preceded by ``word`` (a label or tuple of labels)."""
    word = (word,) if isinstance(word, str) or not isinstance(word, (tuple, list)) else tuple(word)
    k = len(word)
    if k == 0:
        raise ValueError("empty trigger word")

    def rule(j, past):
        return j >= k and tuple(past[j - k:j]) == word

    def mask(codes, ls):
        if any(w not in ls for w in word):
            return np.zeros(len(codes), bool)
        out = np.zeros(len(codes), bool)
        if len(codes) > k:
            hit = np.ones(len(codes) - k, bool)
            for i, w in enumerate(word):
                hit &= codes[i:len(codes) - k + i] == ls.index(w)
            out[k:] = hit
        return out

    return PlaceSelection(f"after_word({','.join(map(str, word))})", rule, mask)


def skip_first(count: int) -> PlaceSelection:
    """Every position after the first ``count``."""
    return PlaceSelection(
        f"skip_first({count})",
        lambda j, past: j >= count,
        lambda codes, ls: np.arange(len(codes)) >= count,
    )


def arithmetic_family(steps: Sequence[int] = (2, 3)) -> list[PlaceSelection]:
    """Every phase of every step."""
    return [arithmetic(s, o) for s in steps for o in range(1, s + 1)]


def after_word_family(labels, max_length: int = 2) -> list[PlaceSelection]:
    words = [()]
    out = []
    for _ in range(max_length):
        words = [w + (lab,) for w in words for lab in labels]
        out += [after_word(w) for w in words]
    return out


def skip_family(counts: Sequence[int] = (100, 1000)) -> list[PlaceSelection]:
    return [skip_first(k) for k in counts]


def builtin_families(labels) -> dict[str, list[PlaceSelection]]:
    return {
        "arithmetic": arithmetic_family(),
        "after_word": after_word_family(labels),
        "skip_first": skip_family(),
    }


_ENTRY = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")
_KINDS = {
    "arithmetic": (arithmetic, {"step": int, "offset": int}),
    "after_word": (after_word, {"word": lambda v: tuple(v.split("|"))}),
    "skip_first": (skip_first, {"count": int}),
}


def parse_family(text: str) -> list[PlaceSelection]:
    """Parse ``"arithmetic(step=2,offset=1); after_word(word=a); skip_first(count=100)"``.

    Multi-label trigger words separate labels with ``|``.
    """
    family = []
    for entry in filter(str.strip, text.split(";")):
        m = _ENTRY.match(entry)
        if not m or m.group(1) not in _KINDS:
            raise ValueError(f"unknown selection entry {entry.strip()!r}; kinds: {', '.join(_KINDS)}")
        factory, params = _KINDS[m.group(1)]
        kwargs = {}
        for item in filter(str.strip, (m.group(2) or "").split(",")):
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in params:
                raise ValueError(f"{m.group(1)}: unknown parameter {key!r}")
            kwargs[key] = params[key](value.strip())
        family.append(factory(**kwargs))
    return family


# -- audit ---------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionResult:
    length: int
    verdict: StabilizationVerdict | None  # None: too short to judge
    deviation: float | None
    passed: bool

    @property
    def insufficient(self) -> bool:
        return self.verdict is None


@dataclass(frozen=True)
class RandomnessVerdict:
    passed: bool
    mother: StabilizationVerdict
    per_selection: dict

    @property
    def status(self) -> str:
        return "RandomnessPass" if self.passed else "RandomnessFail"

    @property
    def max_deviation(self) -> float:
        devs = [r.deviation for r in self.per_selection.values() if r.deviation is not None]
        return max(devs, default=0.0)


def randomness_audit(
    c: Collective,
    family: Sequence[PlaceSelection],
    schedule: Sequence[int] | None = None,
    tolerance: Tolerance | None = None,
    min_length: int = DEFAULT_MIN_LENGTH,
) -> RandomnessVerdict:
    """Check that every long-enough selected subsequence keeps the mother's frequencies.

    A selection fails when its subsequence stabilizes to frequencies more than
    ``tau(n)`` away from the mother's final frequencies (``n`` its length), or
    does not stabilize while the mother does.
    """
    tau = tolerance or sqrt_tolerance()
    mother = stabilization_audit(c, schedule, tau)
    n = mother.checkpoints[-1][0]
    c = c.ensure(n)
    p = mother.final
    results = {}
    for s in family:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptySelection)
            sub = apply_selection(c, s, n)
        if len(sub) < max(min_length, 2):
            results[s.name] = SelectionResult(len(sub), None, None, True)
            continue
        verdict = stabilization_audit(sub, fit_schedule(len(sub)), tau)
        dev = max(abs(verdict.final[lab] - p[lab]) for lab in c.label_set)
        if verdict.stabilized:
            ok = dev <= tau(len(sub))
        else:
            ok = not mother.stabilized
        results[s.name] = SelectionResult(len(sub), verdict, dev, ok)
    return RandomnessVerdict(all(r.passed for r in results.values()), mother, results)
