"""Label sequences, relative frequencies and the stabilization audit.

A :class:`Collective` is a realized finite prefix of a label sequence,
stored as integer codes into a :class:`LabelSet`. It may carry a generator,
a pure function of ``(seed, index)``, that extends the prefix on demand.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _rng
from .errors import BadSchedule, EmptyPrefix, UnknownLabel

Label = Hashable
Tolerance = Callable[[int], float]

DEFAULT_START = 1000
DEFAULT_CHECKPOINTS = 8
DEFAULT_COEFFICIENT = 5.0


@dataclass(frozen=True)
class LabelSet:
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("label set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels!r}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label):
        return label in self._index

    def index(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise UnknownLabel(label) from None

    def encode(self, labels: Iterable[Label]) -> np.ndarray:
        return np.fromiter((self.index(lab) for lab in labels), dtype=np.int64)


def _as_label_set(labels) -> LabelSet:
    return labels if isinstance(labels, LabelSet) else LabelSet(tuple(labels))


class IIDGenerator:
    """Independent draws from a fixed distribution over a label set.

    Uses inverse-CDF sampling over the label order of ``label_set`` so the
    same uniform stream always yields the same labels.
    """

    def __init__(self, label_set, probabilities: Sequence[float]):
        self.label_set = _as_label_set(label_set)
        p = np.asarray(probabilities, dtype=float)
        if p.shape != (len(self.label_set),):
            raise ValueError("one probability per label is required")
        if np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-9):
            raise ValueError(f"not a probability vector: {p}")
        self.probabilities = p
        self._cdf = np.cumsum(p)
        self._cdf[-1] = 1.0

    @classmethod
    def uniform(cls, labels) -> "IIDGenerator":
        ls = _as_label_set(labels)
        return cls(ls, np.full(len(ls), 1.0 / len(ls)))

    def codes(self, seed: int, start: int, stop: int, workers: int | None = None) -> np.ndarray:
        u = _rng.uniforms(seed, start, stop, workers)
        return np.minimum(np.searchsorted(self._cdf, u, side="right"), len(self._cdf) - 1)

    def __call__(self, seed: int, index: int) -> Label:
        return self.label_set.labels[int(self.codes(seed, index, index + 1)[0])]

    def __repr__(self):
        return f"IIDGenerator({self.label_set.labels!r}, {self.probabilities.tolist()!r})"


class OscillatingGenerator:
    """Deterministic blocks ``a^1 b^r a^(r^2) b^(r^3) ...``.

    Block ``k`` has length ``floor(ratio**k)``. With ``ratio >= 2`` the
    frequency of ``a`` at block ends swings toward ``1/(ratio+1)`` and
    ``ratio/(ratio+1)`` forever, so the sequence never stabilizes.
    The seed is accepted for interface uniformity and ignored.
    """

    def __init__(self, labels=("a", "b"), ratio: float = 2):
        self.label_set = _as_label_set(labels)
        if len(self.label_set) != 2:
            raise ValueError("oscillating generator needs exactly two labels")
        if ratio < 2:
            raise ValueError(f"block growth ratio must be >= 2, got {ratio}")
        self.ratio = ratio

    def block_ends(self, stop: int) -> np.ndarray:
        """Exclusive end positions of blocks 0, 1, ... up to and past ``stop``."""
        ends, total, k = [], 0, 0
        while total < stop or not ends:
            total += int(math.floor(self.ratio ** k))
            ends.append(total)
            k += 1
        return np.asarray(ends, dtype=np.int64)

    def codes(self, seed: int, start: int, stop: int, workers: int | None = None) -> np.ndarray:
        idx = np.arange(start, stop, dtype=np.int64)
        block = np.searchsorted(self.block_ends(stop), idx, side="right")
        return block % 2

    def __call__(self, seed: int, index: int) -> Label:
        return self.label_set.labels[int(self.codes(seed, index, index + 1)[0])]

    def __repr__(self):
        return f"OscillatingGenerator({self.label_set.labels!r}, ratio={self.ratio})"


@dataclass(frozen=True, eq=False)
class Collective:
    """Finite realized prefix of a label sequence.

    ``codes[j]`` is the index of the j-th label in ``label_set``. When a
    generator is attached, :meth:`extend` produces longer prefixes that agree
    with the existing one position by position.
    """

    label_set: LabelSet
    codes: np.ndarray
    generator: object = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "label_set", _as_label_set(self.label_set))
        codes = np.array(self.codes, dtype=np.int64).reshape(-1)
        if codes.size and (codes.min() < 0 or codes.max() >= len(self.label_set)):
            raise UnknownLabel("code outside the label set")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_labels(cls, labels: Iterable[Label], label_set=None) -> "Collective":
        labels = list(labels)
        if label_set is None:
            label_set = LabelSet(tuple(dict.fromkeys(labels)))
        label_set = _as_label_set(label_set)
        return cls(label_set, label_set.encode(labels))

    @classmethod
    def generate(cls, generator, n: int, seed: int = 0, workers: int | None = None) -> "Collective":
        seed = _rng.check_seed(seed)
        return cls(generator.label_set, generator.codes(seed, 0, n, workers), generator, seed)

    def __len__(self):
        return len(self.codes)

    @property
    def labels(self) -> list:
        lab = self.label_set.labels
        return [lab[c] for c in self.codes.tolist()]

    def prefix(self, n: int) -> "Collective":
        return Collective(self.label_set, self.ensure(n).codes[:n], self.generator, self.seed)

    def ensure(self, n: int) -> "Collective":
        """This collective, extended through the generator if shorter than ``n``."""
        if n <= len(self):
            return self
        if self.generator is None:
            raise ValueError(f"prefix has {len(self)} labels and no generator to reach {n}")
        return self.extend(n)

    def extend(self, n: int, workers: int | None = None) -> "Collective":
        if self.generator is None:
            raise ValueError("no generator attached")
        if n <= len(self):
            return self
        more = self.generator.codes(self.seed or 0, len(self), n, workers)
        return Collective(self.label_set, np.concatenate([self.codes, more]), self.generator, self.seed)

    def __repr__(self):
        return f"Collective(labels={self.label_set.labels!r}, N={len(self)}, generator={self.generator!r})"


@dataclass(frozen=True)
class FrequencyTable:
    """Counts ``n_N(label)`` over a finite label set. Tables merge by addition."""

    label_set: LabelSet
    counts: tuple

    @classmethod
    def empty(cls, label_set) -> "FrequencyTable":
        ls = _as_label_set(label_set)
        return cls(ls, (0,) * len(ls))

    @classmethod
    def from_codes(cls, label_set, codes: np.ndarray) -> "FrequencyTable":
        ls = _as_label_set(label_set)
        return cls(ls, tuple(np.bincount(codes, minlength=len(ls)).tolist()))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, label) -> int:
        return self.counts[self.label_set.index(label)]

    def frequency(self, label) -> Fraction:
        if self.total == 0:
            raise EmptyPrefix("frequency of an empty table")
        return Fraction(self.count(label), self.total)

    def frequencies(self) -> dict:
        if self.total == 0:
            return {}
        return {lab: n / self.total for lab, n in zip(self.label_set, self.counts)}

    def as_dict(self) -> dict:
        return dict(zip(self.label_set, self.counts))

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        if other.label_set != self.label_set:
            raise ValueError("cannot merge tables over different label sets")
        return FrequencyTable(self.label_set, tuple(a + b for a, b in zip(self.counts, other.counts)))

    __add__ = merge


def frequency_table(c: Collective, n: int | None = None) -> FrequencyTable:
    n = len(c) if n is None else n
    if n < 0:
        raise ValueError("negative prefix length")
    return FrequencyTable.from_codes(c.label_set, c.ensure(n).codes[:n])


def relative_frequency(c: Collective, labels: Iterable[Label], n: int | None = None) -> Fraction:
    """Exact relative frequency of the label subset ``labels`` in the first ``n`` labels."""
    n = len(c) if n is None else n
    wanted = {c.label_set.index(lab) for lab in labels}
    if n == 0:
        raise EmptyPrefix("relative frequency over an empty prefix")
    table = frequency_table(c, n)
    return Fraction(sum(table.counts[i] for i in wanted), n)


# -- stabilization -----------------------------------------------------------

def sqrt_tolerance(coefficient: float = DEFAULT_COEFFICIENT) -> Tolerance:
    """tau(N) = coefficient / sqrt(N)."""
    def tau(n):
        return coefficient / math.sqrt(n)
    tau.__name__ = f"{coefficient}/sqrt(N)"
    return tau


def constant_tolerance(value: float) -> Tolerance:
    def tau(n):
        return value
    tau.__name__ = f"{value}"
    return tau


def geometric_schedule(start: int = DEFAULT_START, count: int = DEFAULT_CHECKPOINTS) -> list[int]:
    """Checkpoints ``start * 2**k`` for ``k = 0 .. count-1``."""
    return [start << k for k in range(count)]


def fit_schedule(n: int, start: int = DEFAULT_START) -> list[int]:
    """Doubling checkpoints from ``start`` that end exactly at ``n``."""
    start = max(1, min(start, n // 2))
    points, k = [], start
    while k < n:
        points.append(k)
        k *= 2
    points.append(n)
    return points


def check_schedule(schedule: Sequence[int]) -> list[int]:
    points = [int(s) for s in schedule]
    if len(points) < 2:
        raise BadSchedule("a schedule needs at least two checkpoints")
    if points[0] < 1 or any(b <= a for a, b in zip(points, points[1:])):
        raise BadSchedule(f"checkpoints must be positive and strictly increasing: {points}")
    return points


@dataclass(frozen=True)
class Witness:
    label: Label
    frequencies: tuple


@dataclass(frozen=True)
class StabilizationVerdict:
    stabilized: bool
    checkpoints: tuple  # ((N_k, {label: nu}), ...)
    probabilities: dict | None = None
    witness: Witness | None = None
    max_excess: float = 0.0

    @property
    def status(self) -> str:
        return "Stabilized" if self.stabilized else "NotStabilized"

    @property
    def final(self) -> dict:
        return self.checkpoints[-1][1]


def stabilization_audit(
    c: Collective,
    schedule: Sequence[int] | None = None,
    tolerance: Tolerance | None = None,
) -> StabilizationVerdict:
    """Decide stabilization from frequencies at increasing checkpoints.

    Stabilized iff ``|nu_{N_k}(a) - nu_{N_{k+1}}(a)| <= tau(N_k)`` for every
    label and every consecutive checkpoint pair.
    """
    if schedule is None:
        schedule = geometric_schedule() if c.generator is not None else fit_schedule(len(c))
    points = check_schedule(schedule)
    tau = tolerance or sqrt_tolerance()
    try:
        c = c.ensure(points[-1])
    except ValueError as exc:
        raise BadSchedule(str(exc)) from None

    m = len(c.label_set)
    counts = np.zeros(m, dtype=np.int64)
    freqs, prev = [], 0
    for n in points:
        counts = counts + np.bincount(c.codes[prev:n], minlength=m)
        freqs.append(counts / n)
        prev = n
    freqs = np.array(freqs)

    excess = np.abs(np.diff(freqs, axis=0)) - np.array([tau(n) for n in points[:-1]])[:, None]
    worst = float(excess.max())
    labels = c.label_set.labels
    checkpoints = tuple((n, dict(zip(labels, row.tolist()))) for n, row in zip(points, freqs))
    if worst <= 0:
        return StabilizationVerdict(True, checkpoints, dict(checkpoints[-1][1]), None, worst)
    bad = int(np.unravel_index(np.argmax(excess), excess.shape)[1])
    witness = Witness(labels[bad], tuple(freqs[:, bad].tolist()))
    return StabilizationVerdict(False, checkpoints, None, witness, worst)


def oscillating_generator(labels=("a", "b"), block_growth: float = 2, n: int = 0) -> Collective:
    """A never-stabilizing collective; realized to length ``n``, extendable."""
    return Collective.generate(OscillatingGenerator(labels, block_growth), n)


# -- plain-text and CSV formats ---------------------------------------------

def write_sequence(path, c: Collective) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lab in c.labels:
            fh.write(f"{lab}\n")


def read_sequence(path, label_set=None) -> Collective:
    with open(path, encoding="utf-8") as fh:
        labels = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
    return Collective.from_labels(labels, label_set)


def write_frequency_table(path, table: FrequencyTable) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "count", "frequency"])
        for lab, n in zip(table.label_set, table.counts):
            w.writerow([lab, n, repr(n / table.total) if table.total else "0.0"])


def read_frequency_table(path) -> FrequencyTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return FrequencyTable(LabelSet(tuple(r["label"] for r in rows)), tuple(int(r["count"]) for r in rows))

