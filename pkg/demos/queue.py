"""
Infinite-server queue fed by a Hawkes process
=============================================

Service time c = 1.  G(x;T) is zero up to the fluid peak of the queue.
"""
import numpy as np

from hawkes_ldp import HawkesParams, queue_loss_exponent
from hawkes_ldp.applications import lln_window_max

p = HawkesParams(1.0, 1.0)
print(f"fluid peak of Q/n over [0,5]: {lln_window_max(p, 5.0, 1.0):.3f}")

for x in np.linspace(0.5, 8.0, 16):
    r = queue_loss_exponent(p, x, 5.0, 1.0)
    where = "" if r.s_star is None else f"s*={r.s_star:.3f} y*={r.y_star:.3f}"
    print(f"x={x:4.1f}  G={r.value:.6f}  {r.branch.value:12s} {where}")

# a longer horizon never makes the overflow harder
print([round(queue_loss_exponent(p, 5.0, T, 1.0).value, 5) for T in (1, 2, 3, 4, 5)])
