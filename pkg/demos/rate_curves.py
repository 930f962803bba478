"""
Rate functions of Z_T/n and N_T/n
=================================

Both rates vanish at the fluid limit and grow convexly away from it.
"""
import numpy as np

from hawkes_ldp import HawkesParams, functional_I_N, optimal_path_N, rate_H, rate_J

p = HawkesParams(alpha=1.0, beta=1.0)
T = 5.0

# critical case: Z/n stays at 1 on average and N/n grows like T
print("x      J(x;5)     H(x;5)")
for x in np.linspace(0.5, 8.0, 16):
    print(f"{x:5.2f}  {rate_J(p, x, T).value:9.6f}  {rate_H(p, x, T).value:9.6f}")

# the cheapest way to reach N_T = 8n, and its cost along the path
h = optimal_path_N(p, 8.0, T)
print("\nmost likely N-path to 8 at T=5")
for t, v in zip(h.times[::256], h.values[::256]):
    print(f"  t={t:4.2f}  N/n={v:.4f}")
print(f"path cost {functional_I_N(p, h):.8f} vs H(8;5) {rate_H(p, 8.0, T).value:.8f}")
