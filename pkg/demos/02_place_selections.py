"""
Place selections
================

A selection chooses positions using only the labels before them. A random
collective keeps its frequencies under every selection in the family; the
periodic sequence a,b,a,b,... does not.
"""
from kollektiv.collectives import Collective, IIDGenerator
from kollektiv.randomness import (
    PlaceSelection,
    after_word,
    apply_selection,
    arithmetic_family,
    builtin_families,
    randomness_audit,
)

n = 100_000
periodic = Collective.from_labels(["a", "b"] * (n // 2))
v = randomness_audit(periodic, arithmetic_family((2,)))
print("periodic:", v.status, "max deviation", v.max_deviation)

iid = Collective.generate(IIDGenerator.uniform(("a", "b")), n, seed=3)
family = [s for fam in builtin_families(("a", "b")).values() for s in fam]
v = randomness_audit(iid, family)
print("iid uniform:", v.status)
for name, r in v.per_selection.items():
    print(f"  {name:<32} len={r.length:>6}  deviation={r.deviation:.4f}")

# a custom rule: select position j when the two previous labels agree
same = PlaceSelection("after_repeat", lambda j, past: j >= 2 and past[j - 1] == past[j - 2])
print("after_repeat picks", len(apply_selection(iid, same)), "elements")

# reading the label at j itself is not admissible
try:
    PlaceSelection("peek", lambda j, past: past[j] == "a")
except Exception as exc:
    print("rejected:", type(exc).__name__)

print("after 'ab':", len(apply_selection(iid, after_word(("a", "b")))))
