"""
Frequencies that settle, and frequencies that never do
======================================================

A seeded Bernoulli stream next to a block-oscillating sequence, both
audited at doubling checkpoints with tolerance 5/sqrt(N).
"""
from kollektiv import collectives as col

schedule = col.geometric_schedule(1000, 8)
tau = col.sqrt_tolerance(5.0)

# i.i.d. draws with p("1") = 0.25
gen = col.IIDGenerator(("0", "1"), (0.75, 0.25))
bern = col.Collective.generate(gen, schedule[-1], seed=7)
v = col.stabilization_audit(bern, schedule, tau)
print("bernoulli:", v.status)
for n, freqs in v.checkpoints:
    print(f"  N={n:>7}  nu(1)={freqs['1']:.4f}  tau={tau(n):.4f}")

# blocks of length 2^k alternating a/b: nu(a) swings between about 1/3 and 2/3
osc = col.oscillating_generator(("a", "b"), block_growth=2)
v = col.stabilization_audit(osc, schedule, tau)
print("oscillating:", v.status, "witness label", v.witness.label)
for n, freqs in v.checkpoints:
    print(f"  N={n:>7}  nu(a)={freqs['a']:.4f}")

# exact counts are available as fractions
print("nu_1000(1) =", col.relative_frequency(bern, "1", 1000))
