"""Ruin and queue-loss exponents for systems driven by a Hawkes process with Z_0 = n.

Ruin: claims arrive at the events of N^n, claim sizes are i.i.d., the initial
surplus is n x, and the premium is O(1) so it drops out of the exponent.

Queue: an infinite-server queue with deterministic service time c, fed by N^n
and starting empty.  The queue length is the window count N_s - N_{s-c}, and
G(x; T) is the exponent of {max_{s<=T} Q_s >= n x}.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _kernels as K
from ._csv import write_csv
from .errors import ConvergenceError
from .mgf import (DEFAULT_TOL, Cumulant, find_theta_c, find_theta_d, n_cumulant,
                  z_cumulant)
from .params import HawkesParams
from .rates import LEFT_CLAMP, _solve_slope, rate_H, rate_J
from .simulation import MCEstimate

_XATOL = 1e-10


# ---------------------------------------------------------------- claims

class ClaimKind(str, enum.Enum):
    POISSON = "poisson"
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"


_KERNEL_KIND = {ClaimKind.POISSON: K.CLAIM_POISSON,
                ClaimKind.DETERMINISTIC: K.CLAIM_DETERMINISTIC,
                ClaimKind.EXPONENTIAL: K.CLAIM_EXPONENTIAL}


@dataclass(frozen=True)
class ClaimModel:
    """Claim size law: poisson(rate), deterministic(size) or exponential(mean)."""

    kind: ClaimKind
    param: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ClaimKind(self.kind))
        if not (self.param > 0 and math.isfinite(self.param)):
            raise ValueError(f"claim parameter must be finite and > 0, got {self.param}")

    @property
    def mean(self) -> float:
        return float(self.param)

    @property
    def theta_plus(self) -> float:
        if self.kind is ClaimKind.EXPONENTIAL:
            return 1.0 / self.param
        return math.inf

    def log_mgf(self, theta: float) -> float:
        p = self.param
        if self.kind is ClaimKind.POISSON:
            return p * math.expm1(theta)
        if self.kind is ClaimKind.DETERMINISTIC:
            return p * theta
        if theta >= 1.0 / p:
            return math.inf
        return -math.log1p(-p * theta)


def claim_conjugate(model: ClaimModel, v: float) -> float:
    """``sup_theta {theta v - log E e^{theta Y}}`` in closed form."""
    if v < 0:
        return math.inf
    p = model.param
    if model.kind is ClaimKind.POISSON:
        if v == 0:
            return p
        return v * math.log(v / p) - v + p
    if model.kind is ClaimKind.DETERMINISTIC:
        return 0.0 if v == p else math.inf
    if v == 0:
        return math.inf
    r = v / p
    return r - 1.0 - math.log(r)


def _upper_conjugate(model, v):
    # only large totals matter for ruin, so the conjugate is flat below the mean
    return claim_conjugate(model, max(v, model.mean))


def lln_ruin_time(params: HawkesParams, claims: ClaimModel, x: float) -> float:
    """Time at which the law-of-large-numbers surplus ``x - E[Y] psi(t)`` hits zero."""
    d = params.excess
    ratio = x / claims.mean
    if d == 0.0:
        return ratio
    arg = d * ratio + 1.0
    if arg <= 0:
        return math.inf
    return math.log(arg) / d


# ---------------------------------------------------------------- ruin

@dataclass(frozen=True)
class RuinSpec:
    x: float
    T: float
    claims: ClaimModel

    def __post_init__(self):
        if not (self.x > 0 and math.isfinite(self.x)):
            raise ValueError(f"x must be finite and > 0, got {self.x}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be finite and > 0, got {self.T}")


class RuinRegime(str, enum.Enum):
    LARGE_DEVIATION = "large_deviation"
    LLN_RUIN = "lln_ruin"


@dataclass(frozen=True)
class RuinResult:
    value: float
    y_star: float | None
    z_star: float
    regime: RuinRegime

    def __float__(self):
        return self.value


def _minimize_convex(f, lo, hi, xatol):
    """Bounded Brent on a convex function, also checking both endpoints."""
    cands = [(f(lo), lo), (f(hi), hi)]
    if hi - lo > xatol:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": xatol, "maxiter": 500})
        if not res.success:
            raise ConvergenceError(f"bounded minimization failed: {res.message}",
                                   bracket=(lo, hi), iterations=int(res.nit))
        cands.append((float(res.fun), float(res.x)))
    return min(cands)


def _ruin_inner(params, model, w, T, tol):
    """inf over y > 0 of H(y; T) + y conj(w / y): returns (value, y)."""
    lln = params.psi(T)
    if w <= model.mean * lln:
        return 0.0, lln
    if model.kind is ClaimKind.DETERMINISTIC:
        y = w / model.param
        return rate_H(params, y, T, tol).value, y
    # H increases above psi(T); y conj(w/y) decreases below w/E[Y]
    hi = w / model.mean

    def obj(y):
        return rate_H(params, y, T, tol).value + y * _upper_conjugate(model, w / y)

    val, y = _minimize_convex(obj, lln, hi, _XATOL * max(1.0, hi))
    return val, y


def ruin_exponent(params: HawkesParams, spec: RuinSpec,
                  tol: float = DEFAULT_TOL) -> RuinResult:
    """Exponent of P(ruin before T) with initial surplus n x and Z_0 = n.

    ``inf_{y>0, 0<=z<=x} {H(y;T) + y conj((x - z)/y) + theta_plus z}``; z is the
    part of the surplus eaten by a single huge claim and is pinned to 0 when
    claim sizes have all exponential moments.
    """
    model = spec.claims
    x, T = spec.x, spec.T
    if T >= lln_ruin_time(params, model, x):
        return RuinResult(0.0, None, 0.0, RuinRegime.LLN_RUIN)
    tp = model.theta_plus
    if math.isinf(tp):
        val, y = _ruin_inner(params, model, x, T, tol)
        return RuinResult(val, y, 0.0, RuinRegime.LARGE_DEVIATION)

    # nested convex search: the inner infimum is convex in the remaining surplus
    def outer(z):
        return _ruin_inner(params, model, x - z, T, tol)[0] + tp * z

    val, z = _minimize_convex(outer, 0.0, x, _XATOL * max(1.0, x))
    inner, y = _ruin_inner(params, model, x - z, T, tol)
    return RuinResult(inner + tp * z, y, z, RuinRegime.LARGE_DEVIATION)


def mc_ruin_probability(params: HawkesParams, spec: RuinSpec, n: float,
                        premium_rate: float = 0.0, trials: int = 100_000,
                        seed: int = 42, start: int = 0) -> MCEstimate:
    """Fraction of trials ruined before T, with Z_0 = n and surplus n x.

    The surplus only drops at claims, so it is checked at claim epochs.
    """
    if premium_rate < 0:
        raise ValueError("premium_rate must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = spec.claims
    hits = K.sample_ruin(params.alpha, params.beta, params.mu, float(n), float(spec.T),
                         float(n * spec.x), float(premium_rate), _KERNEL_KIND[m.kind],
                         float(m.param), np.uint64(seed), int(start), int(trials))
    p = float(hits.mean())
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / trials))


# ---------------------------------------------------------------- queue

class QueueBranch(str, enum.Enum):
    FIRST_WINDOW = "first_window"     # the maximum is reached by time c
    SLIDING = "sliding"               # a later window [s - c, s]
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class QueueResult:
    value: float
    s_star: float | None
    y_star: float | None
    branch: QueueBranch
    degenerate: bool = False

    def __float__(self):
        return self.value


def lln_window_max(params: HawkesParams, T: float, c: float) -> float:
    """max over s <= T of the law-of-large-numbers window count psi(s) - psi(s - c)."""
    first = params.psi(min(c, T))
    if T <= c:
        return first
    return first * max(1.0, params.lln_z(T - c))


def _window_cumulant(params, u, c, tol):
    """theta -> A(u; C(c; theta/alpha) - theta/alpha): log-MGF of the window count."""
    def cum(theta):
        inner = n_cumulant(params, theta, c, tol)
        if not inner.finite:
            return inner
        outer = z_cumulant(params, inner.value, u, tol)
        if not outer.finite:
            return outer
        return Cumulant(theta, outer.value, outer.slope * inner.slope,
                        outer.curvature * inner.slope ** 2 + outer.slope * inner.curvature)
    return cum


def window_rate(params: HawkesParams, x: float, s: float, c: float,
                tol: float = DEFAULT_TOL):
    """``inf_y {y H(x/y; c) + J(y; s - c)}`` for s >= c, via its convex dual.

    The two terms are the rates of N over the last window given Z_{s-c} = n y
    and of Z_{s-c}, so by minimax the infimum equals the Legendre transform of
    the window count's cumulant.  Returns (value, y_star).
    """
    u = s - c
    if u <= 0:
        return rate_H(params, x, c, tol).value, 1.0
    if x <= params.psi(c) * params.lln_z(u):
        return 0.0, params.lln_z(u)
    cum = _window_cumulant(params, u, c, tol)
    bnd_d = find_theta_d(params, c, tol)
    bnd_c = find_theta_c(params, u, tol)
    hi = bnd_d.theta_c - 0.5 * bnd_d.bracket_width
    eta_max = bnd_c.theta_c - bnd_c.bracket_width
    lam_hi = n_cumulant(params, hi, c, tol)
    if not lam_hi.finite or lam_hi.value >= eta_max:
        hi = brentq(lambda th: n_cumulant(params, th, c, tol).value - eta_max,
                    0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    theta, cval, _, _ = _solve_slope(cum, x, hi, LEFT_CLAMP / params.alpha, "window_rate")
    value = max(theta * x - cval.value, 0.0)
    # the optimal Z_{s-c}/n is the tilted mean of Z_u
    y_star = z_cumulant(params, n_cumulant(params, theta, c, tol).value, u, tol).slope
    return value, y_star


def window_rate_primal(params: HawkesParams, x: float, s: float, c: float,
                       tol: float = DEFAULT_TOL, golden: bool = False):
    """Same as :func:`window_rate` by direct minimization over y.

    y lies between the fluid value of Z_{s-c}/n (where J vanishes) and
    x / psi(c) (where the window term vanishes).  By default the first-order
    condition ``J'(y) = Lambda_c(theta_H*(x/y))`` is solved with Brent's root
    finder, both sides being read off the Legendre maximisers; ``golden=True``
    minimises the objective directly instead.
    """
    u = s - c
    if u <= 0:
        return rate_H(params, x, c, tol).value, 1.0
    lo = params.lln_z(u)
    hi = x / params.psi(c)
    if hi <= lo:
        return 0.0, lo

    def parts(y):
        h = rate_H(params, x / y, c, tol)
        j = rate_J(params, y, u, tol)
        return h, j

    def obj(y):
        h, j = parts(y)
        return y * h.value + j.value

    if golden:
        return _minimize_convex(obj, lo, hi, _XATOL * max(1.0, hi))

    def slope(y):
        h, j = parts(y)
        v = x / y
        # d/dy [y H(x/y)] = H(v) - v H'(v) = -Lambda_c(theta_H*)
        return (j.theta_star or 0.0) + h.value - v * (h.theta_star or 0.0)

    f_lo, f_hi = slope(lo), slope(hi)
    if f_lo >= 0:
        return obj(lo), lo
    if f_hi <= 0:
        return obj(hi), hi
    y = brentq(slope, lo, hi, xtol=_XATOL * max(1.0, hi), rtol=1e-15, maxiter=500)
    return obj(y), y


def _first_window(params, x, top, tol, checks=8):
    """inf over 0 < s <= top of H(x; s); the endpoint unless H(x; .) misbehaves."""
    ss = np.linspace(top / checks, top, checks)
    vals = [rate_H(params, x, float(s), tol).value for s in ss]
    if all(b <= a for a, b in zip(vals, vals[1:])):
        return vals[-1], top
    i = int(np.argmin(vals))
    return vals[i], float(ss[i])


def queue_loss_exponent(params: HawkesParams, x: float, T: float, c: float,
                        tol: float = DEFAULT_TOL, grid: int = 64, refinements: int = 2,
                        method: str = "primal") -> QueueResult:
    """G(x; T): exponent of the event that the queue length reaches n x by time T.

    The sliding-window branch is minimised over s on a grid of ``grid`` points,
    then refined ``refinements`` times by a factor 4 around the incumbent.
    ``method`` picks how the inner infimum over y is computed.
    """
    for name, v in (("x", x), ("T", T), ("c", c)):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be finite and > 0, got {v}")
    inner = {"dual": window_rate, "primal": window_rate_primal}[method]
    if x <= lln_window_max(params, T, c):
        return QueueResult(0.0, None, None, QueueBranch.DEGENERATE, degenerate=True)

    v1, s1 = _first_window(params, x, min(T, c), tol)
    best = QueueResult(v1, s1, 1.0, QueueBranch.FIRST_WINDOW)
    if T <= c:
        return best

    cache = {}

    def k(s):
        if s not in cache:
            cache[s] = inner(params, x, s, c, tol)
        return cache[s]

    ss = np.linspace(c, T, grid)
    step = ss[1] - ss[0]
    s_best = min(ss, key=lambda s: k(float(s))[0])
    for _ in range(refinements):
        lo, hi = max(c, s_best - step), min(T, s_best + step)
        step /= 4.0
        pts = np.arange(lo, hi + 0.5 * step, step)
        pts = np.clip(pts, c, T)
        s_best = min(list(pts) + [s_best], key=lambda s: k(float(s))[0])
    val, y = k(float(s_best))
    if val < best.value:
        best = QueueResult(val, float(s_best), y, QueueBranch.SLIDING)
    return best


# ---------------------------------------------------------------- sweeps

def ruin_sweep_T(params, claims, x, Ts, tol=DEFAULT_TOL):
    return [(float(T), ruin_exponent(params, RuinSpec(x, float(T), claims), tol).value)
            for T in Ts]


def ruin_sweep_x(params, claims, xs, T, tol=DEFAULT_TOL):
    return [(float(x), ruin_exponent(params, RuinSpec(float(x), T, claims), tol).value)
            for x in xs]


def queue_sweep_x(params, xs, T, c, tol=DEFAULT_TOL):
    return [(float(x), queue_loss_exponent(params, float(x), T, c, tol).value) for x in xs]


def queue_sweep_T(params, x, Ts, c, tol=DEFAULT_TOL):
    return [(float(T), queue_loss_exponent(params, x, float(T), c, tol).value) for T in Ts]


def write_sweep(target, header, rows):
    """CSV with a two-column header such as ``T,I_tau`` or ``x,G``."""
    write_csv(target, list(header), rows)
