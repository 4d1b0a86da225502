"""Combining collectives: pairing, conditional frequencies, joint tables, independence."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .collectives import (
    Collective,
    LabelSet,
    StabilizationVerdict,
    Tolerance,
    fit_schedule,
    sqrt_tolerance,
    stabilization_audit,
)
from .errors import ConditionUndefined, EmptySelection, LengthMismatch, NotCombinable
from .randomness import DEFAULT_MIN_LENGTH, PlaceSelection, randomness_audit


@dataclass(frozen=True, eq=False)
class PairedCollective:
    """Positionwise pairs ``z_j = (x_j, y_j)``. Not itself assumed to be a collective."""

    x: Collective
    y: Collective

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise LengthMismatch(f"x has {len(self.x)} labels, y has {len(self.y)}")

    def __len__(self):
        return len(self.x)

    @property
    def x_label_set(self) -> LabelSet:
        return self.x.label_set

    @property
    def y_label_set(self) -> LabelSet:
        return self.y.label_set

    @property
    def pairs(self) -> list:
        return list(zip(self.x.labels, self.y.labels))

    def swap(self) -> "PairedCollective":
        return PairedCollective(self.y, self.x)

    def prefix(self, n: int) -> "PairedCollective":
        return PairedCollective(self.x.prefix(n), self.y.prefix(n))

    @classmethod
    def from_pairs(cls, pairs, x_label_set=None, y_label_set=None) -> "PairedCollective":
        pairs = list(pairs)
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        return cls(Collective.from_labels(xs, x_label_set), Collective.from_labels(ys, y_label_set))


def pair(x: Collective, y: Collective) -> PairedCollective:
    # realized prefixes only; generators are not carried over
    return PairedCollective(Collective(x.label_set, x.codes), Collective(y.label_set, y.codes))


def joint_counts(z: PairedCollective, n: int | None = None) -> np.ndarray:
    """``counts[i, k] = n_N(x=label_i, y=label_k)``."""
    n = len(z) if n is None else n
    mx, my = len(z.x_label_set), len(z.y_label_set)
    flat = z.x.codes[:n] * my + z.y.codes[:n]
    return np.bincount(flat, minlength=mx * my).reshape(mx, my)


def derived_subsequence(z: PairedCollective, a, n: int | None = None) -> Collective:
    """``y(a)``: the y-components at positions where ``x_j == a``, in order."""
    n = len(z) if n is None else n
    ia = z.x_label_set.index(a)
    pos = np.flatnonzero(z.x.codes[:n] == ia)
    if pos.size == 0:
        warnings.warn(f"label {a!r} never occurs in x", EmptySelection, stacklevel=2)
    return Collective(z.y_label_set, z.y.codes[pos])


def conditional_frequency(z: PairedCollective, b, a, n: int | None = None) -> Fraction:
    """``nu_N(b/a; z) = n_N(b/a; z) / n_N(a; z)`` as an exact fraction."""
    n = len(z) if n is None else n
    ia, ib = z.x_label_set.index(a), z.y_label_set.index(b)
    n_a = int(np.count_nonzero(z.x.codes[:n] == ia))
    if n_a == 0:
        raise ConditionUndefined(f"label {a!r} does not occur among the first {n} elements")
    n_ba = int(np.count_nonzero(z.y.codes[:n][z.x.codes[:n] == ia] == ib))
    return Fraction(n_ba, n_a)


def joint_frequency(z: PairedCollective, a, b, n: int | None = None) -> Fraction:
    n = len(z) if n is None else n
    if n == 0:
        raise ConditionUndefined("empty prefix")
    ia, ib = z.x_label_set.index(a), z.y_label_set.index(b)
    hits = (z.x.codes[:n] == ia) & (z.y.codes[:n] == ib)
    return Fraction(int(np.count_nonzero(hits)), n)


@dataclass(frozen=True)
class CombinabilityVerdict:
    combinable: bool
    x_verdict: StabilizationVerdict
    conditional: dict          # a -> StabilizationVerdict, or None when n(a) is too small
    marginal_x: dict           # a -> p(a; x)
    conditional_probabilities: dict  # (a, b) -> p(b/a; z)
    joint: dict | None         # (a, b) -> p(a, b; z), only when combinable
    product_rule_deviation: float  # max |p(a,b) - p(a) p(b/a)|
    witness: object = None     # first label a whose y(a) failed
    n: int = 0
    randomness: dict | None = None  # a -> RandomnessVerdict, only when a family was given

    @property
    def status(self) -> str:
        return "Combinable" if self.combinable else "NotCombinable"

    @property
    def insufficient(self) -> tuple:
        return tuple(a for a, v in self.conditional.items() if v is None)


def combinability_audit(
    z: PairedCollective,
    schedule: Sequence[int] | None = None,
    tolerance: Tolerance | None = None,
    min_length: int = DEFAULT_MIN_LENGTH,
    joint_tolerance: Tolerance | None = None,
    family: Sequence[PlaceSelection] | None = None,
) -> CombinabilityVerdict:
    """Audit whether y is combinable with x.

    x must stabilize; every ``y(a)`` with at least ``min_length`` elements must
    stabilize. Rarer labels are reported as insufficient data, not failures.
    When combinable, the joint table is checked against
    ``p(a,b) = p(a) p(b/a)`` within ``joint_tolerance(N)``.

    With a selection ``family``, every audited ``y(a)`` must also pass the
    randomness audit under it.
    """
    tau = tolerance or sqrt_tolerance()
    tau_joint = joint_tolerance or sqrt_tolerance()
    x_verdict = stabilization_audit(z.x, schedule, tau)
    n = x_verdict.checkpoints[-1][0]
    z = z.prefix(n) if n < len(z) else z

    counts = joint_counts(z, n)
    xs, ys = z.x_label_set.labels, z.y_label_set.labels
    n_a = counts.sum(axis=1)
    marginal_x = {a: int(k) / n for a, k in zip(xs, n_a)}
    cond_p = {
        (a, b): (int(counts[i, k]) / int(n_a[i]) if n_a[i] else None)
        for i, a in enumerate(xs) for k, b in enumerate(ys)
    }

    conditional, witness = {}, None
    randomness = {} if family is not None else None
    for i, a in enumerate(xs):
        if n_a[i] < max(min_length, 2):
            conditional[a] = None
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptySelection)
            ya = derived_subsequence(z, a, n)
        v = stabilization_audit(ya, fit_schedule(len(ya)), tau)
        conditional[a] = v
        ok = v.stabilized
        if family is not None:
            randomness[a] = randomness_audit(ya, family, fit_schedule(len(ya)), tau, min_length)
            ok = ok and randomness[a].passed
        if not ok and witness is None:
            witness = a

    audited = [a for a, v in conditional.items() if v is not None]
    combinable = x_verdict.stabilized and bool(audited) and witness is None

    joint = {(a, b): int(counts[i, k]) / n for i, a in enumerate(xs) for k, b in enumerate(ys)}
    dev = max(
        abs(joint[a, b] - marginal_x[a] * cond_p[a, b])
        for a, b in joint if cond_p[a, b] is not None
    )
    if combinable and dev > tau_joint(n):
        combinable = False
    return CombinabilityVerdict(
        combinable, x_verdict, conditional, marginal_x, cond_p,
        joint if combinable else None, dev, witness, n, randomness,
    )


@dataclass(frozen=True)
class IndependenceVerdict:
    independent: bool
    max_deviation: float       # max over audited a, all b of |p(b/a) - p(b; y)|
    tolerance: float
    factorization_deviation: float  # max |p(a,b) - p(a) p(b)|
    combinability: CombinabilityVerdict

    @property
    def status(self) -> str:
        return "Independent" if self.independent else "Dependent"


def independence_audit(
    z: PairedCollective,
    schedule: Sequence[int] | None = None,
    tolerance: Tolerance | None = None,
    min_length: int = DEFAULT_MIN_LENGTH,
) -> IndependenceVerdict:
    """y is independent from x when every audited ``y(a)`` matches y's own distribution.

    The deviation bound is ``tau(min n(a))`` over the audited labels.
    """
    tau = tolerance or sqrt_tolerance()
    comb = combinability_audit(z, schedule, tau, min_length)
    if not comb.combinable:
        raise NotCombinable(f"y is not combinable with x (witness {comb.witness!r})")
    n = comb.n
    counts = joint_counts(z, n)
    p_y = counts.sum(axis=0) / n
    ys = z.y_label_set.labels
    audited = [a for a, v in comb.conditional.items() if v is not None]
    dev = max(abs(comb.conditional_probabilities[a, b] - p_y[k]) for a in audited for k, b in enumerate(ys))
    n_min = min(int(counts[z.x_label_set.index(a)].sum()) for a in audited)
    bound = tau(n_min)
    fact = max(abs(comb.joint[a, b] - comb.marginal_x[a] * p_y[k]) for a in z.x_label_set for k, b in enumerate(ys))
    return IndependenceVerdict(dev <= bound, dev, bound, fact, comb)


# -- CSV formats ---------------------------------------------------------------

def write_pairs(path, z: PairedCollective) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_label", "y_label"])
        w.writerows(z.pairs)


def read_pairs(path, x_label_set=None, y_label_set=None) -> PairedCollective:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return PairedCollective.from_pairs(((r["x_label"], r["y_label"]) for r in rows), x_label_set, y_label_set)


def write_joint_table(path, z: PairedCollective, n: int | None = None) -> None:
    n = len(z) if n is None else n
    counts = joint_counts(z, n)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "count", "p"])
        for i, a in enumerate(z.x_label_set):
            for k, b in enumerate(z.y_label_set):
                w.writerow([a, b, int(counts[i, k]), repr(int(counts[i, k]) / n)])
