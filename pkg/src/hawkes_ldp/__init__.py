"""Large deviations for the exponential Hawkes process with a large initial intensity."""
from .applications import (ClaimKind, ClaimModel, QueueBranch, QueueResult, RuinRegime,
                           RuinResult, RuinSpec, claim_conjugate, lln_ruin_time, mc_ruin_probability,
                           queue_loss_exponent, ruin_exponent)
from .errors import BlowUpError, ConvergenceError
from .mgf import (Cumulant, ExplosionBoundary, OdeCurve, find_theta_c, find_theta_d,
                  log_mgf_N, log_mgf_Z, n_cumulant, sensitivity_gamma, sensitivity_r,
                  solve_A, solve_B, solve_C, solve_D, z_cumulant)
from .params import HawkesParams
from .rates import (Boundary, LegendreResult, PathKind, SampledPath, functional_I_N,
                    functional_I_Z, optimal_path_N, optimal_path_Z, rate_H, rate_J)
from .regimes import (DegenerateLimits, Regime, RegimeClass, classify, critical_lambda,
                      critical_rate_N, critical_rate_Z, decomposition_residual,
                      degenerate_limits, subcritical_rate, subcritical_rate_I0,
                      subcritical_rate_I1)
from .simulation import (EventPath, MCEstimate, SimSpec, count, integral_z, mc_log_mgf_N,
                         mc_log_mgf_Z, simulate, z_at)

__version__ = "0.1.0"
