"""Closed-form rates when both the initial intensity and the time are large.

Which formula applies depends on the sign of ``alpha - beta``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.optimize import brentq, minimize_scalar

from .params import HawkesParams

CLASS_RTOL = 1e-12


class Regime(str, enum.Enum):
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"
    SUBCRITICAL = "subcritical"


@dataclass(frozen=True)
class RegimeClass:
    classification: Regime
    tolerance: float

    @classmethod
    def of(cls, params: HawkesParams, rtol: float = CLASS_RTOL) -> "RegimeClass":
        tol = rtol * max(params.alpha, params.beta)
        d = params.alpha - params.beta
        if abs(d) <= tol:
            return cls(Regime.CRITICAL, tol)
        return cls(Regime.SUPERCRITICAL if d > 0 else Regime.SUBCRITICAL, tol)


def classify(params: HawkesParams, rtol: float = CLASS_RTOL) -> Regime:
    return RegimeClass.of(params, rtol).classification


# ---------------------------------------------------------------- critical

def critical_rate_Z(alpha: float, x: float, T: float) -> float:
    """``2 (sqrt(x) - 1)^2 / (alpha^2 T)`` for x >= 0, infinite otherwise."""
    _check_positive(alpha=alpha, T=T)
    if x < 0:
        return math.inf
    return 2.0 * (math.sqrt(x) - 1.0) ** 2 / (alpha * alpha * T)


def critical_pole(alpha: float, T: float) -> float:
    """theta at which the critical N-cumulant explodes."""
    return math.pi ** 2 / (2.0 * alpha * alpha * T * T)


def critical_lambda(alpha: float, theta: float, T: float) -> float:
    _check_positive(alpha=alpha, T=T)
    k = alpha * T / math.sqrt(2.0)
    if theta <= 0:
        s = math.sqrt(-theta)
        return -math.sqrt(2.0) * s / alpha * math.tanh(k * s)
    if theta >= critical_pole(alpha, T):
        return math.inf
    s = math.sqrt(theta)
    return math.sqrt(2.0) * s / alpha * math.tan(k * s)


def critical_lambda_slope(alpha: float, theta: float, T: float) -> float:
    """d/dtheta of :func:`critical_lambda`; equals T at theta = 0."""
    k = alpha * T / math.sqrt(2.0)
    if theta == 0:
        return T
    if theta < 0:
        s = math.sqrt(-theta)
        ks = k * s
        return math.tanh(ks) / (math.sqrt(2.0) * alpha * s) + 0.5 * T / math.cosh(ks) ** 2
    if theta >= critical_pole(alpha, T):
        return math.inf
    s = math.sqrt(theta)
    ks = k * s
    return math.tan(ks) / (math.sqrt(2.0) * alpha * s) + 0.5 * T / math.cos(ks) ** 2


def critical_rate_N(alpha: float, x: float, T: float) -> float:
    """Legendre transform of :func:`critical_lambda`, maximised over theta below the pole."""
    _check_positive(alpha=alpha, T=T)
    if x < 0:
        return math.inf
    if x == 0:
        # the cumulant decays like -sqrt(-2 theta)/alpha, so the supremum is unbounded
        return math.inf
    if x == T:
        return 0.0
    right = (1.0 - 1e-8) * critical_pole(alpha, T)

    def g(th):
        return critical_lambda_slope(alpha, th, T) - x

    if x > T:
        lo, hi = 0.0, right
        if g(hi) < 0:
            theta = hi
        else:
            theta = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    else:
        lo = -1.0
        while g(lo) > 0:
            lo *= 2.0
        theta = brentq(g, lo, 0.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    return max(theta * x - critical_lambda(alpha, theta, T), 0.0)


# ---------------------------------------------------------------- subcritical

def _xlogy_ratio(x, num, den):
    """x log(num/den) with the 0 log 0 = 0 convention."""
    if x == 0:
        return 0.0
    return x * math.log(num / den)


def subcritical_rate(params: HawkesParams, x: float, T: float) -> float:
    """Rate of ``N_{nT}/n`` for beta > alpha."""
    _require_subcritical(params)
    if x < 0:
        return math.inf
    a, b, mu = params.alpha, params.beta, params.mu
    k = 1.0 + mu * b * T
    return _xlogy_ratio(x, b * x, a * x + k) - x + (a * x + k) / b


def subcritical_rate_I0(params: HawkesParams, x: float) -> float:
    """Rate of the descendants of the initial intensity alone (mu = 0)."""
    _require_subcritical(params)
    if x < 0:
        return math.inf
    a, b = params.alpha, params.beta
    return _xlogy_ratio(x, b * x, a * x + 1.0) - x + (a * x + 1.0) / b


def subcritical_rate_I1(params: HawkesParams, x: float, T: float) -> float:
    """Rate of the immigrant-driven part over the horizon ``T`` (per unit of scale)."""
    _require_subcritical(params)
    if params.mu <= 0:
        raise ValueError("I1 needs mu > 0")
    if x < 0:
        return math.inf
    a, b, mu = params.alpha, params.beta, params.mu
    v = x / T
    return T * (_xlogy_ratio(v, v, mu + v * a / b) - v + v * a / b + mu)


def decomposition_residual(params: HawkesParams, x: float, T: float,
                           grid_size: int = 201) -> float:
    """``|inf_{0<=y<=x} {I0(x-y) + I1(y)} - I(x)|`` by grid scan plus golden refinement."""
    _require_subcritical(params)
    if params.mu <= 0:
        raise ValueError("the decomposition needs mu > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        conv = subcritical_rate_I0(params, 0.0) + subcritical_rate_I1(params, 0.0, T)
        return abs(conv - subcritical_rate(params, 0.0, T))

    def obj(y):
        return subcritical_rate_I0(params, x - y) + subcritical_rate_I1(params, y, T)

    step = x / (grid_size - 1)
    ys = [i * step for i in range(grid_size)]
    ys[-1] = x
    vals = [obj(y) for y in ys]
    i = min(range(grid_size), key=vals.__getitem__)
    lo, hi = ys[max(i - 1, 0)], ys[min(i + 1, grid_size - 1)]
    best = vals[i]
    if hi > lo:
        res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, x)})
        best = min(best, float(res.fun))
    return abs(best - subcritical_rate(params, x, T))


# ---------------------------------------------------------------- degenerate

@dataclass(frozen=True)
class DegenerateLimits:
    """Concentration constants for regimes whose rate is a point indicator.

    ``Z_{t_n T} / z_scale(n)`` tends to ``z_limit`` and, when given,
    ``N_{t_n T} / z_scale(n)`` tends to ``n_limit``, with ``t_n = log n / |alpha - beta|``.
    """

    regime: Regime
    T: float
    rate_gap: float
    z_limit: float
    n_limit: float | None
    z_exponent: float

    def t_n(self, n: float) -> float:
        return math.log(n) / self.rate_gap

    def z_scale(self, n: float) -> float:
        return n ** self.z_exponent


def degenerate_limits(params: HawkesParams, regime_class: Regime | RegimeClass | None,
                      T: float) -> DegenerateLimits:
    if isinstance(regime_class, RegimeClass):
        regime = regime_class.classification
    elif regime_class is None:
        regime = classify(params)
    else:
        regime = Regime(regime_class)
    if regime != classify(params):
        raise ValueError(f"{regime.value} does not match alpha={params.alpha}, beta={params.beta}")
    if not 0 < T < 1:
        raise ValueError(f"the degenerate limits need 0 < T < 1, got {T}")
    if regime is Regime.SUPERCRITICAL:
        gap = params.alpha - params.beta
        return DegenerateLimits(regime, T, gap, 1.0, 1.0 / gap, 1.0 + T)
    if regime is Regime.SUBCRITICAL:
        return DegenerateLimits(regime, T, params.beta - params.alpha, 1.0, None, 1.0 - T)
    raise ValueError("the critical regime has a nondegenerate rate; use critical_rate_Z/N")


def _check_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise ValueError(f"{name} must be > 0, got {v}")


def _require_subcritical(params):
    if not params.beta > params.alpha:
        raise ValueError("subcritical formulas need beta > alpha")
