"""
One measure per setting
=======================

Give every setting its own measure on a four-point hidden space. The
requirements hold exactly, and the four measures are pairwise singular.
"""
from kollektiv.measures import (
    FiniteMeasure,
    build_singular_resolution,
    is_singular,
    radon_nikodym,
    reconstruct,
)

r = build_singular_resolution()
for key, value in r.summary().items():
    shown = [str(v) for v in value] if isinstance(value, list) else value
    print(f"{key:>20}: {shown}")

p1, p2 = r.measures[:2]
s = is_singular(p1, p2)
print("P1 vs P2 singular:", s.singular, "separating event", sorted(s.witness))

# densities exist only within a support; a mixture dominates every P_i
mix = FiniteMeasure.uniform(r.space)
f = radon_nikodym(p1, mix)
print("dP1/dmix =", {a: str(v) for a, v in f.items()})
print("reconstructed P1(w1, w2) =", reconstruct(f, mix, {"w1", "w2"}))
