"""
Ruin before T with Hawkes-driven claims
=======================================

Surplus n x, claims at the events of a Hawkes process started from Z_0 = n.
The exponent hits zero at the time the fluid surplus runs out.
"""
from hawkes_ldp import (ClaimModel, HawkesParams, RuinSpec, lln_ruin_time, mc_ruin_probability,
                        ruin_exponent)

p = HawkesParams(1.0, 1.0)
x = 0.5
for claims in (ClaimModel("poisson", 1.0), ClaimModel("exponential", 1.0)):
    print(f"{claims.kind.value} claims, fluid ruin time {lln_ruin_time(p, claims, x):.3f}")
    for T in (0.1, 0.2, 0.3, 0.4, 0.45, 0.5):
        r = ruin_exponent(p, RuinSpec(x, T, claims))
        print(f"  T={T:4.2f}  I={r.value:.6f}  ({r.regime.value})")

# a rough look at the probabilities themselves
spec = RuinSpec(x, 0.2, ClaimModel("poisson", 1.0))
for n in (10, 20, 40):
    est, se = mc_ruin_probability(p, spec, n, trials=200_000)
    print(f"n={n:3d}  P(ruin)={est:.5f} +- {se:.5f}")
