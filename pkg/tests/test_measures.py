import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from kollektiv.errors import NoDensity, SpaceMismatch, StructureViolation, UnknownAtom
from kollektiv.measures import (
    FiniteMeasure,
    HiddenSpace,
    ObservableTable,
    all_assignments,
    assignment_space,
    build_singular_resolution,
    event_probability,
    ghz_pointwise_identity,
    induce_tables,
    is_absolutely_continuous,
    is_equivalent,
    is_singular,
    kolmogorov_contradiction,
    product_event,
    radon_nikodym,
    read_measure,
    read_tables,
    reconstruct,
    write_measure,
    write_tables,
)

S4 = HiddenSpace(("w1", "w2", "w3", "w4"))


def random_measure(space, rnd, support=None):
    support = list(space.atoms) if support is None else list(support)
    w = {a: rnd.randint(1, 50) for a in support}
    total = sum(w.values())
    return FiniteMeasure(space, {a: Fraction(v, total) for a, v in w.items()})


class TestEventProbability:
    def test_empty_and_full(self):
        p = FiniteMeasure.uniform(S4)
        assert event_probability(p, set()) == 0
        assert event_probability(p, S4.atoms) == 1

    def test_three_of_four(self):
        assert event_probability(FiniteMeasure.uniform(S4), {"w1", "w2", "w3"}) == Fraction(3, 4)

    def test_foreign_atom(self):
        with pytest.raises(UnknownAtom):
            event_probability(FiniteMeasure.uniform(S4), {"w9"})

    def test_masses_validated(self):
        with pytest.raises(ValueError):
            FiniteMeasure(S4, [Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 0])
        with pytest.raises(ValueError):
            FiniteMeasure(S4, [-1, 1, 1, 0])

    def test_float_masses(self):
        p = FiniteMeasure(S4, [0.5, 0.5, 1e-15, 0.0])
        assert not p.exact
        assert p.support == {"w1", "w2"}


class TestProductEvent:
    def test_constant_table(self):
        t = ObservableTable(1, S4, {a: (1, 1, 1) for a in S4})
        assert product_event(t, 1) == S4.full

    def test_single_atom(self):
        sp = HiddenSpace(("w",))
        assert product_event(ObservableTable(2, sp, {"w": (1, 1, -1)}), -1) == {"w"}

    def test_partition_on_random_table(self):
        rnd = random.Random(16)
        sp = HiddenSpace(tuple(f"w{i}" for i in range(16)))
        t = ObservableTable(3, sp, {a: tuple(rnd.choice((-1, 1)) for _ in range(3)) for a in sp})
        plus, minus = product_event(t, 1), product_event(t, -1)
        assert plus | minus == sp.full and not plus & minus
        for a in sp:
            assert (a in plus) == (np.prod(t.values[a]) == 1)


class TestPointwiseIdentity:
    def test_all_plus(self):
        sp = HiddenSpace(("w",))
        tables = induce_tables(sp, {"w": (1,) * 6})
        assert [t.product("w") for t in tables] == [1, 1, 1, 1]
        assert ghz_pointwise_identity(tables).inclusion_holds

    def test_a_y_minus(self):
        sp = HiddenSpace(("w",))
        tables = induce_tables(sp, {"w": (1, -1, 1, 1, 1, 1)})
        assert [t.product("w") for t in tables] == [-1, 1, 1, -1]
        rep = ghz_pointwise_identity(tables)
        assert rep.holds and "w" not in rep.sigma_plus

    def test_exhaustive(self):
        # independent oracle: multiply the raw per-photon values directly
        for ax, ay, bx, by, cx, cy in itertools.product((1, -1), repeat=6):
            assert (ay * bx * cx) * (ax * by * cx) * (ax * bx * cy) == ay * by * cy
        space, tables = assignment_space()
        rep = ghz_pointwise_identity(tables)
        assert rep.atoms_checked == 64 and rep.violations == ()
        assert rep.sigma_plus <= rep.omega4_plus

    def test_structure_violation(self):
        sp = HiddenSpace(("w",))
        t = list(induce_tables(sp, {"w": (1,) * 6}))
        t[3] = ObservableTable(4, sp, {"w": (-1, 1, 1)})  # A_y now disagrees with setting 1
        with pytest.raises(StructureViolation):
            ghz_pointwise_identity(t)
        with pytest.raises(StructureViolation):
            ghz_pointwise_identity(t[:3])


def lp_feasible(space, tables):
    """Is there any probability vector with P(Omega_i+) = 1 (i<=3) and P(Omega_4-) = 1?"""
    atoms = list(space.atoms)
    rows = [[1.0] * len(atoms)]
    rows += [[1.0 if a in product_event(t, 1) else 0.0 for a in atoms] for t in tables[:3]]
    rows += [[1.0 if a in product_event(tables[3], -1) else 0.0 for a in atoms]]
    res = linprog(np.zeros(len(atoms)), A_eq=np.array(rows), b_eq=np.ones(len(rows)), bounds=(0, None), method="highs")
    return res.status == 0


class TestKolmogorov:
    def test_k1_forces_sigma_one_and_kills_k3(self):
        space, tables = assignment_space()
        sigma = ghz_pointwise_identity(tables).sigma_plus
        rnd = random.Random(3)
        for _ in range(20):
            p = random_measure(space, rnd, rnd.sample(sorted(sigma), rnd.randint(1, len(sigma))))
            rep = kolmogorov_contradiction(p, tables)
            assert rep.k1_holds and rep.sigma_plus == 1
            assert rep.omega4_minus == 0 and not rep.k3_holds

    def test_uniform_meets_nothing(self):
        space, tables = assignment_space()
        rep = kolmogorov_contradiction(FiniteMeasure.uniform(space), tables)
        assert rep.omega_plus == (Fraction(1, 2),) * 3
        assert not rep.k1_holds and not rep.k3_holds and not rep.satisfied
        assert rep.globally_infeasible

    def test_single_atom_all_plus(self):
        sp = HiddenSpace(("w",))
        tables = induce_tables(sp, {"w": (1,) * 6})
        rep = kolmogorov_contradiction(FiniteMeasure.point(sp, "w"), tables)
        assert rep.k1_holds and rep.omega4_minus == 0 and not rep.k3_holds
        assert rep.forced_sigma_plus == (1,)

    def test_lp_oracle_agrees(self):
        space, tables = assignment_space()
        assert not lp_feasible(space, tables)
        # dropping the fourth constraint restores feasibility
        atoms = list(space.atoms)
        rows = [[1.0] * 64] + [[1.0 if a in product_event(t, 1) else 0.0 for a in atoms] for t in tables[:3]]
        assert linprog(np.zeros(64), A_eq=rows, b_eq=np.ones(4), bounds=(0, None), method="highs").status == 0

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.sampled_from(all_assignments()), min_size=1, max_size=12, unique=True), st.randoms())
    def test_infeasible_on_every_induced_space(self, values, rnd):
        space = HiddenSpace(tuple(f"w{i}" for i in range(len(values))))
        tables = induce_tables(space, dict(zip(space.atoms, values)))
        rep = kolmogorov_contradiction(random_measure(space, rnd), tables)
        assert rep.globally_infeasible and not rep.satisfied
        assert not lp_feasible(space, tables)


class TestContinuity:
    def test_equal(self):
        p = FiniteMeasure.uniform(S4)
        assert is_equivalent(p, p) and is_absolutely_continuous(p, p)

    def test_strict_inclusion(self):
        p = FiniteMeasure.uniform(S4, ["w1", "w2"])
        q = FiniteMeasure.uniform(S4, ["w1", "w2", "w3"])
        assert is_absolutely_continuous(p, q) and not is_absolutely_continuous(q, p)
        assert not is_equivalent(p, q)

    def test_disjoint(self):
        p, q = FiniteMeasure.point(S4, "w1"), FiniteMeasure.point(S4, "w2")
        assert not is_absolutely_continuous(p, q) and not is_absolutely_continuous(q, p)

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatch):
            is_equivalent(FiniteMeasure.uniform(S4), FiniteMeasure.uniform(HiddenSpace(("w1",))))

    def test_c5_biconditional_matches_support_equality(self):
        # equivalence means: P(E) = 0 <=> Q(E) = 0 for every event E
        rnd = random.Random(1)
        sp = HiddenSpace(tuple(f"w{i}" for i in range(6)))
        for _ in range(30):
            p = random_measure(sp, rnd, rnd.sample(sp.atoms, rnd.randint(1, 6)))
            q = random_measure(sp, rnd, rnd.sample(sp.atoms, rnd.randint(1, 6)))
            brute = all(
                (p(e) == 0) == (q(e) == 0)
                for k in range(7) for e in itertools.combinations(sp.atoms, k)
            )
            assert brute == is_equivalent(p, q)


class TestSingular:
    def test_disjoint_points(self):
        r = is_singular(FiniteMeasure.point(S4, "w1"), FiniteMeasure.point(S4, "w2"))
        assert r.singular and r.witness == {"w2"}

    def test_overlap(self):
        p = FiniteMeasure.uniform(S4, ["w1", "w2"])
        q = FiniteMeasure.uniform(S4, ["w2", "w3"])
        assert not is_singular(p, q).singular

    def test_self(self):
        p = FiniteMeasure.uniform(S4)
        assert not is_singular(p, p).singular

    def test_symmetric_and_literal(self):
        rnd = random.Random(2)
        sp = HiddenSpace(tuple(f"w{i}" for i in range(5)))
        for _ in range(40):
            p = random_measure(sp, rnd, rnd.sample(sp.atoms, rnd.randint(1, 3)))
            q = random_measure(sp, rnd, rnd.sample(sp.atoms, rnd.randint(1, 3)))
            literal = any(
                q(e) == 1 and p(e) == 0
                for k in range(6) for e in itertools.combinations(sp.atoms, k)
            )
            assert is_singular(p, q).singular == literal == is_singular(q, p).singular


class TestRadonNikodym:
    def test_self(self):
        p = FiniteMeasure.uniform(S4, ["w1", "w2"])
        f = radon_nikodym(p, p)
        assert f == {"w1": 1, "w2": 1, "w3": 0, "w4": 0}

    def test_division(self):
        sp = HiddenSpace(("w1", "w2"))
        f = radon_nikodym(FiniteMeasure(sp, [Fraction(3, 4), Fraction(1, 4)]), FiniteMeasure.uniform(sp))
        assert f == {"w1": Fraction(3, 2), "w2": Fraction(1, 2)}

    def test_no_density(self):
        with pytest.raises(NoDensity):
            radon_nikodym(FiniteMeasure.uniform(S4), FiniteMeasure.point(S4, "w1"))

    def test_reconstruction_exhaustive(self):
        rnd = random.Random(7)
        sp = HiddenSpace(tuple(f"w{i}" for i in range(10)))
        q = random_measure(sp, rnd, sp.atoms[:8])
        p = random_measure(sp, rnd, sp.atoms[1:6])
        f = radon_nikodym(p, q)
        for k in range(11):
            for e in itertools.combinations(sp.atoms, k):
                assert reconstruct(f, q, e) == p(e)


class TestResolution:
    def test_pairwise_singular(self):
        r = build_singular_resolution()
        for i, j in itertools.permutations(range(4), 2):
            assert is_singular(r.measures[i], r.measures[j]).singular

    def test_constraints_exact(self):
        r = build_singular_resolution()
        for i in (1, 2, 3):
            v = event_probability(r.measures[i - 1], r.omega_plus(i))
            assert v == 1 and isinstance(v, Fraction)
        assert event_probability(r.measures[3], r.omega4_minus) == 1
        assert event_probability(r.measures[3], product_event(r.tables[3], 1)) == 0
        assert event_probability(r.measures[3], r.sigma_plus) == 0

    def test_omega_j_plus_separates_p_j_from_p4(self):
        r = build_singular_resolution()
        for j in (1, 2, 3):
            e = r.omega_plus(j)
            assert r.measures[j - 1](e) == 1 and r.measures[3](e) == 0

    def test_tables_are_induced(self):
        r = build_singular_resolution()
        assert ghz_pointwise_identity(r.tables).holds
        assert len(r.space) == 4


def test_csv_roundtrip(tmp_path):
    r = build_singular_resolution()
    write_measure(tmp_path / "m.csv", FiniteMeasure(r.space, [Fraction(1, 3), Fraction(2, 3), 0, 0]))
    assert (tmp_path / "m.csv").read_text().splitlines()[:2] == ["atom_id,mass", "w1,1/3"]
    m = read_measure(tmp_path / "m.csv")
    assert m.mass("w2") == Fraction(2, 3)
    write_tables(tmp_path / "t.csv", r.tables)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "atom_id,setting,A,B,C"
    back = read_tables(tmp_path / "t.csv")
    assert [t.values for t in back] == [t.values for t in r.tables]
