"""
Combining two collectives
=========================

Pair x and y positionwise, read off conditional frequencies, and decide
whether a joint distribution exists.
"""
from kollektiv.collectives import Collective, IIDGenerator, oscillating_generator
from kollektiv.combining import (
    combinability_audit,
    conditional_frequency,
    independence_audit,
    joint_frequency,
    pair,
)

n = 100_000
x = Collective.generate(IIDGenerator.uniform(("a", "b")), n, seed=1)
y = Collective.generate(IIDGenerator.uniform(("u", "v")), n, seed=2)
z = pair(x, y)

# the finite-N product rule is an identity of rationals
nu_cond = conditional_frequency(z, "u", "a", 500)
print("nu(u/a) =", nu_cond, " nu(a,u) =", joint_frequency(z, "a", "u", 500))

ind = independence_audit(z)
print("independent streams:", ind.status, f"max deviation {ind.max_deviation:.4f} <= {ind.tolerance:.4f}")
print("joint table:", {k: round(p, 4) for k, p in ind.combinability.joint.items()})

print("x against itself:", independence_audit(pair(x, x)).status)

# y follows x's label "b" through an oscillating stream: y(b) never settles
osc = oscillating_generator(("u", "v")).ensure(n)
pos_b = (x.codes == 1).nonzero()[0]
codes = y.codes.copy()
codes[pos_b] = osc.codes[: len(pos_b)]
bad = Collective(y.label_set, codes)
v = combinability_audit(pair(x, bad))
print("spliced:", v.status, "witness", v.witness)
