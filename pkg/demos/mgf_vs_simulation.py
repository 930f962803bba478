"""
Log-MGFs: Riccati ODEs against exact simulation
===============================================
"""
from hawkes_ldp import HawkesParams, SimSpec, log_mgf_N, log_mgf_Z, mc_log_mgf_N, mc_log_mgf_Z
from hawkes_ldp.mgf import find_theta_c

p = HawkesParams(alpha=1.0, beta=2.0, mu=1.0)
spec = SimSpec(z0=1.0, horizon=1.0, seed=42)

for theta in (-0.5, 0.1, 0.2):
    est, se = mc_log_mgf_Z(p, spec, theta, 100_000)
    print(f"Z  theta={theta:+.1f}  ode={log_mgf_Z(p, 1.0, theta, 1.0):.5f}  mc={est:.5f} +- {se:.5f}")
    est, se = mc_log_mgf_N(p, spec, theta, 100_000)
    print(f"N  theta={theta:+.1f}  ode={log_mgf_N(p, 1.0, theta, 1.0):.5f}  mc={est:.5f} +- {se:.5f}")

# beyond the explosion boundary the MGF is infinite
b = find_theta_c(p, 1.0)
print(f"\ntheta_c(1) = {b.theta_c:.9f}")
print("just past it:", log_mgf_Z(p, 1.0, b.theta_c + 1e-6, 1.0))
