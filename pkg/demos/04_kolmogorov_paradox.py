"""
One measure for four settings
=============================

Each deterministic assignment of the six photon values fixes all four
setting products. Three products of +1 force the fourth to +1, so no single
probability measure can give the first three +1 surely and the fourth -1
surely.
"""
from kollektiv.measures import (
    FiniteMeasure,
    assignment_space,
    ghz_pointwise_identity,
    kolmogorov_contradiction,
)

space, tables = assignment_space()
ident = ghz_pointwise_identity(tables)
print(f"{ident.atoms_checked} assignments, {len(ident.violations)} violations of p1*p2*p3 = p4")
print("assignments with p1 = p2 = p3 = +1:", len(ident.sigma_plus))

for name, p in [
    ("uniform", FiniteMeasure.uniform(space)),
    ("uniform on Sigma+", FiniteMeasure.uniform(space, sorted(ident.sigma_plus))),
]:
    r = kolmogorov_contradiction(p, tables)
    print(f"{name}: P(Omega_i+) = {[str(v) for v in r.omega_plus]}  P(Omega_4-) = {r.omega4_minus}"
          f"  all four hold: {r.satisfied}")

print("no measure can satisfy all four:", kolmogorov_contradiction(FiniteMeasure.uniform(space), tables).globally_infeasible)
