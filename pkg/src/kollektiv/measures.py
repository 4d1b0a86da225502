"""Probability measures on finite hidden-variable spaces.

Covers the measure-level side of the GHZ argument: the events ``Omega_i^+``
built from observable tables, the pointwise parity identity behind
``Sigma^+ = Omega_1^+ & Omega_2^+ & Omega_3^+  subset of  Omega_4^+``, the
resulting contradiction for a single measure, and the comparison of measures
by absolute continuity, equivalence, singularity and Radon-Nikodym densities.

Masses given as ints or :class:`~fractions.Fraction` stay exact. Float masses
are compared to zero with ``ZERO_TOL``.

Only finite spaces (the power set as sigma-field) are handled; the
equivalence/singularity dichotomy for infinite-dimensional Gaussian measures
is out of scope.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

from .errors import NoDensity, SpaceMismatch, StructureViolation, UnknownAtom

ZERO_TOL = 1e-12

Atom = Hashable
EventSet = frozenset

# Which per-photon value (x: phase 0, y: phase pi/2) each GHZ setting reads.
GHZ_PATTERNS = ("yxx", "xyx", "xxy", "yyy")
GHZ_SIGNS = (1, 1, 1, -1)
PHOTON_VALUE_NAMES = ("A_x", "A_y", "B_x", "B_y", "C_x", "C_y")


@dataclass(frozen=True)
class HiddenSpace:
    atoms: tuple

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValueError("hidden space must have at least one atom")
        if len(set(atoms)) != len(atoms):
            raise ValueError("atoms must be distinct")
        object.__setattr__(self, "atoms", atoms)

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, atom):
        return atom in set(self.atoms)

    def event(self, atoms: Iterable[Atom]) -> EventSet:
        e = frozenset(atoms)
        foreign = e - set(self.atoms)
        if foreign:
            raise UnknownAtom(sorted(map(str, foreign))[0])
        return e

    @property
    def full(self) -> EventSet:
        return frozenset(self.atoms)


def _is_zero(m) -> bool:
    return m == 0 if isinstance(m, Rational) else abs(m) <= ZERO_TOL


class FiniteMeasure:
    """Probability masses on the atoms of a :class:`HiddenSpace`."""

    def __init__(self, space: HiddenSpace, mass: Mapping[Atom, object] | Sequence):
        if not isinstance(mass, Mapping):
            mass = dict(zip(space.atoms, mass, strict=True))
        unknown = set(mass) - set(space.atoms)
        if unknown:
            raise UnknownAtom(next(iter(unknown)))
        values = {a: mass.get(a, 0) for a in space.atoms}
        exact = all(isinstance(v, Rational) for v in values.values())
        if exact:
            values = {a: Fraction(v) for a, v in values.items()}
        else:
            values = {a: float(v) for a, v in values.items()}
        if any(v < 0 for v in values.values()):
            raise ValueError("masses must be non-negative")
        total = sum(values.values())
        if (exact and total != 1) or (not exact and not math.isclose(total, 1.0, abs_tol=1e-9)):
            raise ValueError(f"masses sum to {total}, not 1")
        self.space = space
        self.exact = exact
        self._mass = values

    @classmethod
    def uniform(cls, space: HiddenSpace, atoms: Iterable[Atom] | None = None) -> "FiniteMeasure":
        atoms = list(space.atoms if atoms is None else atoms)
        return cls(space, {a: Fraction(1, len(atoms)) for a in atoms})

    @classmethod
    def point(cls, space: HiddenSpace, atom: Atom) -> "FiniteMeasure":
        return cls(space, {atom: 1})

    def mass(self, atom: Atom):
        try:
            return self._mass[atom]
        except KeyError:
            raise UnknownAtom(atom) from None

    def masses(self) -> dict:
        return dict(self._mass)

    @property
    def support(self) -> EventSet:
        return frozenset(a for a, m in self._mass.items() if not _is_zero(m))

    def __call__(self, event: Iterable[Atom]):
        return event_probability(self, event)

    def __eq__(self, other):
        return isinstance(other, FiniteMeasure) and self.space == other.space and self._mass == other._mass

    def __repr__(self):
        return f"FiniteMeasure({ {a: str(m) for a, m in self._mass.items() if not _is_zero(m)} })"


def event_probability(p: FiniteMeasure, event: Iterable[Atom]):
    event = p.space.event(event)
    zero = Fraction(0) if p.exact else 0.0
    return sum((p.mass(a) for a in event), zero)


# -- observables and the GHZ events --------------------------------------------

class ObservableTable:
    """Outcomes ``(A, B, C)`` in {-1, +1}^3 of one setting, atom by atom."""

    def __init__(self, setting_id: int, space: HiddenSpace, values: Mapping[Atom, tuple]):
        if setting_id not in (1, 2, 3, 4):
            raise ValueError("setting_id must be 1..4")
        missing = set(space.atoms) - set(values)
        if missing:
            raise ValueError(f"table for setting {setting_id} misses atoms {sorted(map(str, missing))}")
        clean = {}
        for atom in space.atoms:
            triple = tuple(int(v) for v in values[atom])
            if len(triple) != 3 or any(v not in (-1, 1) for v in triple):
                raise ValueError(f"outcomes must be three values in {{-1, +1}}, got {values[atom]!r}")
            clean[atom] = triple
        self.setting_id = setting_id
        self.space = space
        self.values = clean

    def product(self, atom: Atom) -> int:
        a, b, c = self.values[atom]
        return a * b * c

    def __repr__(self):
        return f"ObservableTable(setting={self.setting_id}, atoms={len(self.space)})"


def product_event(table: ObservableTable, sign: int) -> EventSet:
    """``{omega : A(omega) B(omega) C(omega) == sign}``."""
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    return frozenset(a for a in table.space.atoms if table.product(a) == sign)


def _pick(values: Sequence[int], photon: int, kind: str) -> int:
    return values[2 * photon + (kind == "y")]


def induce_tables(space: HiddenSpace, photon_values: Mapping[Atom, Sequence[int]]) -> tuple:
    """The four GHZ observable tables induced by six per-photon values per atom.

    ``photon_values[atom]`` is ``(A_x, A_y, B_x, B_y, C_x, C_y)``.
    """
    tables = []
    for i, pattern in enumerate(GHZ_PATTERNS, start=1):
        tables.append(ObservableTable(i, space, {
            atom: tuple(_pick(photon_values[atom], p, kind) for p, kind in enumerate(pattern))
            for atom in space.atoms
        }))
    return tuple(tables)


def photon_values(tables: Sequence[ObservableTable]) -> dict:
    """Recover the six per-photon values per atom; raise if the tables disagree."""
    if len(tables) != 4 or sorted(t.setting_id for t in tables) != [1, 2, 3, 4]:
        raise StructureViolation("need one table for each of the settings 1..4")
    tables = sorted(tables, key=lambda t: t.setting_id)
    space = tables[0].space
    if any(t.space != space for t in tables):
        raise StructureViolation("tables live on different spaces")
    out = {}
    for atom in space.atoms:
        seen = {}
        for t, pattern in zip(tables, GHZ_PATTERNS):
            for photon, kind in enumerate(pattern):
                key = 2 * photon + (kind == "y")
                value = t.values[atom][photon]
                if seen.setdefault(key, value) != value:
                    raise StructureViolation(
                        f"atom {atom!r}: {PHOTON_VALUE_NAMES[key]} differs between settings"
                    )
        out[atom] = tuple(seen[k] for k in range(6))
    return out


@dataclass(frozen=True)
class IdentityReport:
    atoms_checked: int
    violations: tuple      # atoms where prod_1 prod_2 prod_3 != prod_4
    sigma_plus: EventSet
    omega4_plus: EventSet

    @property
    def holds(self) -> bool:
        return not self.violations

    @property
    def inclusion_holds(self) -> bool:
        return self.sigma_plus <= self.omega4_plus


def ghz_pointwise_identity(tables: Sequence[ObservableTable]) -> IdentityReport:
    """Check ``(A_y B_x C_x)(A_x B_y C_x)(A_x B_x C_y) == A_y B_y C_y`` atom by atom."""
    values = photon_values(tables)
    tables = sorted(tables, key=lambda t: t.setting_id)
    violations = tuple(
        atom for atom in tables[0].space.atoms
        if tables[0].product(atom) * tables[1].product(atom) * tables[2].product(atom) != tables[3].product(atom)
    )
    sigma = frozenset.intersection(*(product_event(t, 1) for t in tables[:3]))
    return IdentityReport(len(values), violations, sigma, product_event(tables[3], 1))


@dataclass(frozen=True)
class ContradictionReport:
    omega_plus: tuple       # P(Omega_i^+), i = 1..3
    omega4_minus: object    # P(Omega_4^-)
    sigma_plus: object      # P(Sigma^+)
    k1_holds: bool          # P(Omega_i^+) = 1 for i = 1..3
    k3_holds: bool          # P(Omega_4^-) = 1
    sigma_meets_omega4_minus: bool

    @property
    def satisfied(self) -> bool:
        """Whether this particular measure meets every probability-one constraint."""
        return self.k1_holds and self.k3_holds

    @property
    def globally_infeasible(self) -> bool:
        """No measure on this space can meet all constraints: Sigma^+ and Omega_4^- are disjoint."""
        return not self.sigma_meets_omega4_minus

    @property
    def forced_sigma_plus(self) -> tuple:
        """Values of P(Sigma^+) forced by the constraints that hold (1 by K1, 0 by K3)."""
        return tuple(v for ok, v in ((self.k1_holds, 1), (self.k3_holds, 0)) if ok)


def _is_one(x) -> bool:
    return x == 1 if isinstance(x, Rational) else abs(x - 1) <= ZERO_TOL


def kolmogorov_contradiction(p: FiniteMeasure, tables: Sequence[ObservableTable]) -> ContradictionReport:
    """Evaluate the GHZ constraints under one setting-independent measure ``p``."""
    ident = ghz_pointwise_identity(tables)
    tables = sorted(tables, key=lambda t: t.setting_id)
    if tables[0].space != p.space:
        raise SpaceMismatch("measure and tables live on different spaces")
    plus = tuple(event_probability(p, product_event(t, 1)) for t in tables[:3])
    minus4 = product_event(tables[3], -1)
    return ContradictionReport(
        omega_plus=plus,
        omega4_minus=event_probability(p, minus4),
        sigma_plus=event_probability(p, ident.sigma_plus),
        k1_holds=all(_is_one(x) for x in plus),
        k3_holds=_is_one(event_probability(p, minus4)),
        sigma_meets_omega4_minus=bool(ident.sigma_plus & minus4),
    )


def all_assignments() -> list[tuple]:
    """All 64 per-photon assignments, (+1, ..., +1) first."""
    return list(itertools.product((1, -1), repeat=6))


def assignment_label(values: Sequence[int]) -> str:
    return "".join("+" if v > 0 else "-" for v in values)


def assignment_space() -> tuple:
    """The 64-atom space of per-photon assignments with its induced tables."""
    assignments = all_assignments()
    space = HiddenSpace(tuple(assignment_label(v) for v in assignments))
    return space, induce_tables(space, dict(zip(space.atoms, assignments)))


# -- comparing measures --------------------------------------------------------

def _same_space(p: FiniteMeasure, q: FiniteMeasure) -> None:
    if p.space != q.space:
        raise SpaceMismatch("measures live on different spaces")


def is_absolutely_continuous(p: FiniteMeasure, q: FiniteMeasure) -> bool:
    """``p << q``: every q-null event is p-null."""
    _same_space(p, q)
    return p.support <= q.support


def is_equivalent(p: FiniteMeasure, q: FiniteMeasure) -> bool:
    _same_space(p, q)
    return p.support == q.support


class Singularity(NamedTuple):
    singular: bool
    witness: EventSet | None  # E with q(E) = 1 and p(E) = 0


def is_singular(p: FiniteMeasure, q: FiniteMeasure) -> Singularity:
    """``p`` is singular to ``q`` when some event has q-mass 1 and p-mass 0."""
    _same_space(p, q)
    e = q.support
    return Singularity(True, e) if not (p.support & e) else Singularity(False, None)


def radon_nikodym(p: FiniteMeasure, q: FiniteMeasure) -> dict:
    """Density ``f = dp/dq``: ``p(E) = sum_{omega in E} f(omega) q(omega)``."""
    if not is_absolutely_continuous(p, q):
        raise NoDensity("p is not absolutely continuous with respect to q")
    supp = q.support
    zero = Fraction(0) if p.exact and q.exact else 0.0
    return {a: (p.mass(a) / q.mass(a) if a in supp else zero) for a in p.space.atoms}


def reconstruct(density: Mapping[Atom, object], q: FiniteMeasure, event: Iterable[Atom]):
    event = q.space.event(event)
    return sum((density[a] * q.mass(a) for a in event), Fraction(0) if q.exact else 0.0)


# -- setting-indexed resolution ------------------------------------------------

@dataclass(frozen=True)
class SingularResolution:
    space: HiddenSpace
    measures: tuple     # P_1 .. P_4
    tables: tuple       # T_1 .. T_4
    photon_values: dict

    def omega_plus(self, i: int) -> EventSet:
        return product_event(self.tables[i - 1], 1)

    @property
    def sigma_plus(self) -> EventSet:
        return self.omega_plus(1) & self.omega_plus(2) & self.omega_plus(3)

    @property
    def omega4_minus(self) -> EventSet:
        return product_event(self.tables[3], -1)

    def summary(self) -> dict:
        p = self.measures
        return {
            "P_i(Omega_i+)": [event_probability(p[i], self.omega_plus(i + 1)) for i in range(3)],
            "P_4(Omega_4-)": event_probability(p[3], self.omega4_minus),
            "P_4(Sigma+)": event_probability(p[3], self.sigma_plus),
            "P_4(Omega_j+)": [event_probability(p[3], self.omega_plus(j)) for j in (1, 2, 3)],
            "pairwise_singular": all(
                is_singular(p[i], p[j]).singular for i in range(4) for j in range(4) if i != j
            ),
        }


def build_singular_resolution() -> SingularResolution:
    """Four pairwise-singular setting measures meeting every GHZ constraint.

    One atom per setting. P_i is the point mass on atom ``w{i}``. Atoms w1..w3
    satisfy their own setting's +1 constraint; w4 has every x-value +1 and
    every y-value -1, so all four products are -1: it sits in Omega_4^- and
    outside every Omega_j^+, j = 1..3.
    """
    values = {
        "w1": (1, 1, 1, 1, 1, 1),
        "w2": (1, -1, 1, 1, 1, 1),    # A_y = -1: setting 2 product +1
        "w3": (1, 1, 1, -1, 1, 1),    # B_y = -1: setting 3 product +1
        "w4": (1, -1, 1, -1, 1, -1),
    }
    space = HiddenSpace(tuple(values))
    tables = induce_tables(space, values)
    measures = tuple(FiniteMeasure.point(space, f"w{i}") for i in range(1, 5))
    return SingularResolution(space, measures, tables, values)


# -- CSV formats ---------------------------------------------------------------

def write_measure(path, p: FiniteMeasure) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom_id", "mass"])
        for atom, m in p.masses().items():
            w.writerow([atom, str(m) if p.exact else repr(m)])


def read_measure(path) -> FiniteMeasure:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    space = HiddenSpace(tuple(r["atom_id"] for r in rows))
    return FiniteMeasure(space, {r["atom_id"]: Fraction(r["mass"]) for r in rows})


def write_tables(path, tables: Sequence[ObservableTable]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom_id", "setting", "A", "B", "C"])
        for t in tables:
            for atom, (a, b, c) in t.values.items():
                w.writerow([atom, t.setting_id, a, b, c])


def read_tables(path) -> tuple:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    space = HiddenSpace(tuple(dict.fromkeys(r["atom_id"] for r in rows)))
    by_setting: dict[int, dict] = {}
    for r in rows:
        by_setting.setdefault(int(r["setting"]), {})[r["atom_id"]] = (int(r["A"]), int(r["B"]), int(r["C"]))
    return tuple(ObservableTable(i, space, by_setting[i]) for i in sorted(by_setting))
