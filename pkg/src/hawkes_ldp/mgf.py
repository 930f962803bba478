"""Affine moment generating functions of Z_T and N_T.

``E[exp(theta Z_T) | Z_0 = z] = exp(A(T; theta) z + B(T; theta))`` and
``E[exp(theta N_T) | Z_0 = z] = exp((C(T; theta/alpha) - theta/alpha) z + D(T; theta/alpha))``,
where A and C solve Riccati-type equations that explode in finite time once
theta is large enough.  All flows are integrated by the compiled
Dormand-Prince kernel together with their parameter sensitivities.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from . import _kernels as K
from ._csv import write_csv
from .errors import BlowUpError
from .params import HawkesParams

DEFAULT_TOL = 1e-10
BOUNDARY_WIDTH = 1e-9


def blowup_cap(alpha: float) -> float:
    """Level past which a flow is declared exploded."""
    return (50.0 + abs(math.log(alpha))) / alpha


@dataclass(frozen=True, eq=False)
class OdeCurve:
    """A solved initial value problem sampled on the solver's accepted steps.

    Calling the curve evaluates the cubic Hermite interpolant built from the
    stored values and slopes.
    """

    theta0: float
    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray = field(repr=False)
    blown_up: bool = False
    blowup_time: float | None = None

    def __post_init__(self):
        for arr in (self.grid, self.values, self.slopes):
            arr.setflags(write=False)
        if self.grid.size == 0 or self.grid[0] != 0.0:
            raise ValueError("curve grid must start at 0")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("curve grid must be strictly increasing")
        if self.blown_up != (self.blowup_time is not None):
            raise ValueError("blowup_time is set exactly when the curve blew up")

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def __call__(self, t):
        return hermite(self.grid, self.values, self.slopes, t)

    def to_csv(self, target):
        write_csv(target, ["t", "value"],
                  zip(self.grid.tolist(), self.values.tolist()))


def hermite(ts, ys, fs, t):
    """Piecewise cubic Hermite interpolation of (ts, ys, fs) at ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < ts[0] - 1e-12 * max(1.0, abs(ts[-1]))) or np.any(
            t_arr > ts[-1] + 1e-12 * max(1.0, abs(ts[-1]))):
        raise ValueError("evaluation time outside the solved range")
    if ts.size == 1:
        out = np.full(t_arr.shape, ys[0])
        return out if out.ndim else float(out)
    i = np.clip(np.searchsorted(ts, t_arr, side="right") - 1, 0, ts.size - 2)
    h = ts[i + 1] - ts[i]
    s = (t_arr - ts[i]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    out = h00 * ys[i] + h10 * h * fs[i] + h01 * ys[i + 1] + h11 * h * fs[i + 1]
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- raw flows

def _setup(params: HawkesParams, kind: str, theta: float):
    a, b = params.alpha, params.beta
    if kind == "A":
        return theta, 0.0, 0.0
    if kind == "C":
        return theta / a, b * theta / a, 1.0
    raise ValueError(f"unknown flow kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Flow:
    """Full augmented solution of one A- or C-flow (internal)."""

    kind: str
    theta: float
    status: int
    t_end: float
    state: np.ndarray
    ts: np.ndarray | None = None
    ys: np.ndarray | None = None
    fs: np.ndarray | None = None

    @property
    def blown_up(self):
        return self.status == K.BLOWN_UP


@lru_cache(maxsize=4096)
def _flow_cached(params, kind, theta, T, tol, store):
    x0, shift, src = _setup(params, kind, theta)
    status, t_end, y, ts, ys, fs, n = K.flow(
        params.alpha, params.beta, params.mu, x0, shift, src,
        float(T), float(tol), blowup_cap(params.alpha), store)
    if status == K.FAILED:
        raise ArithmeticError(
            f"{kind}-flow integration failed at t={t_end} (theta={theta})")
    y = y.copy()
    y.setflags(write=False)
    if store:
        ts, ys, fs = ts[:n].copy(), ys[:n].copy(), fs[:n].copy()
        for arr in (ts, ys, fs):
            arr.setflags(write=False)
        return Flow(kind, theta, status, t_end, y, ts, ys, fs)
    return Flow(kind, theta, status, t_end, y)


def run_flow(params: HawkesParams, kind: str, theta: float, T: float,
             tol: float = DEFAULT_TOL, store: bool = False) -> Flow:
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T}")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    return _flow_cached(params, kind, float(theta), float(T), float(tol), bool(store))


def _curve(params, kind, theta, T, tol, component):
    fl = run_flow(params, kind, theta, T, tol, store=True)
    # steps near a blow-up can be shorter than the float spacing of t
    keep = np.concatenate([[True], np.diff(fl.ts) > 0])
    grid = fl.ts[keep]
    values = fl.ys[keep, component]
    slopes = fl.fs[keep, component]
    return OdeCurve(theta0=float(theta), grid=grid.copy(), values=values.copy(),
                    slopes=slopes.copy(), blown_up=fl.blown_up,
                    blowup_time=fl.t_end if fl.blown_up else None)


def solve_A(params: HawkesParams, theta: float, T: float, tol: float = DEFAULT_TOL) -> OdeCurve:
    """A' = -beta A + e^{alpha A} - 1, A(0) = theta."""
    return _curve(params, "A", theta, T, tol, K.IX)


def solve_B(params: HawkesParams, theta: float, T: float, tol: float = DEFAULT_TOL) -> OdeCurve:
    """B' = mu (e^{alpha A} - 1), B(0) = 0, on the grid of the A-flow."""
    return _curve(params, "A", theta, T, tol, K.IB)


def solve_C(params: HawkesParams, theta: float, T: float, tol: float = DEFAULT_TOL) -> OdeCurve:
    """C' = -beta C + e^{alpha C} - 1 + beta theta/alpha, C(0) = theta/alpha.

    ``theta`` is the parameter of the N-transform, not the initial value.
    """
    return _curve(params, "C", theta, T, tol, K.IX)


def solve_D(params: HawkesParams, theta: float, T: float, tol: float = DEFAULT_TOL) -> OdeCurve:
    """D' = mu (e^{alpha C} - 1), D(0) = 0."""
    return _curve(params, "C", theta, T, tol, K.IB)


def _survivor(params, kind, theta, T, tol):
    fl = run_flow(params, kind, theta, T, tol)
    if fl.blown_up:
        raise BlowUpError(
            f"{kind}-flow with theta={theta} explodes at t={fl.t_end} < T={T}",
            blowup_time=fl.t_end)
    return fl


def sensitivity_gamma(params: HawkesParams, theta: float, T: float,
                      tol: float = DEFAULT_TOL) -> float:
    """dA(T; theta)/dtheta, integrated alongside A."""
    return float(_survivor(params, "A", theta, T, tol).state[K.IS1])


def sensitivity_r(params: HawkesParams, theta: float, T: float,
                  tol: float = DEFAULT_TOL) -> float:
    """d/dtheta [C(T; theta/alpha) - theta/alpha]."""
    return float(_survivor(params, "C", theta, T, tol).state[K.IS1])


# ---------------------------------------------------------------- cumulants

@dataclass(frozen=True)
class Cumulant:
    """Scaled log-MGF at one theta with its first two theta-derivatives."""

    theta: float
    value: float
    slope: float
    curvature: float
    finite: bool = True


def z_cumulant(params: HawkesParams, theta: float, T: float,
               tol: float = DEFAULT_TOL) -> Cumulant:
    """``A(T; theta)`` and its derivatives; ``finite=False`` past the boundary."""
    fl = run_flow(params, "A", theta, T, tol)
    if fl.blown_up:
        return Cumulant(theta, math.inf, math.inf, math.inf, finite=False)
    s = fl.state
    return Cumulant(theta, float(s[K.IX]), float(s[K.IS1]), float(s[K.IS2]))


def n_cumulant(params: HawkesParams, theta: float, T: float,
               tol: float = DEFAULT_TOL) -> Cumulant:
    """``C(T; theta/alpha) - theta/alpha`` and its derivatives."""
    fl = run_flow(params, "C", theta, T, tol)
    if fl.blown_up:
        return Cumulant(theta, math.inf, math.inf, math.inf, finite=False)
    s = fl.state
    return Cumulant(theta, float(s[K.IX] - theta / params.alpha),
                    float(s[K.IS1]), float(s[K.IS2]))


def log_mgf_Z(params: HawkesParams, z0: float, theta: float, T: float,
              tol: float = DEFAULT_TOL) -> float:
    """``log E[exp(theta Z_T) | Z_0 = z0]``; ``math.inf`` at or past the boundary."""
    fl = run_flow(params, "A", theta, T, tol)
    if fl.blown_up:
        return math.inf
    return float(fl.state[K.IX] * z0 + fl.state[K.IB])


def log_mgf_N(params: HawkesParams, z0: float, theta: float, T: float,
              tol: float = DEFAULT_TOL) -> float:
    """``log E[exp(theta N_T) | Z_0 = z0]``; ``math.inf`` at or past the boundary."""
    fl = run_flow(params, "C", theta, T, tol)
    if fl.blown_up:
        return math.inf
    return float((fl.state[K.IX] - theta / params.alpha) * z0 + fl.state[K.IB])


# ---------------------------------------------------------------- boundaries

def _survives(params, kind, theta, T, tol):
    return not run_flow(params, kind, theta, T, tol).blown_up


@dataclass(frozen=True)
class ExplosionBoundary:
    """Largest theta for which the A-flow (kind "A") or C-flow (kind "C") reaches T.

    Construction re-checks that the flow survives at ``theta_c - bracket_width``
    and explodes at ``theta_c + bracket_width``.
    """

    theta_c: float
    T: float
    bracket_width: float
    params: HawkesParams = field(repr=False)
    kind: str = "A"
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        lo = self.theta_c - self.bracket_width
        hi = self.theta_c + self.bracket_width
        if not _survives(self.params, self.kind, lo, self.T, self.tol):
            raise ValueError(f"flow explodes below the claimed boundary {self.theta_c}")
        if _survives(self.params, self.kind, hi, self.T, self.tol):
            raise ValueError(f"flow survives above the claimed boundary {self.theta_c}")


def blowup_time(params: HawkesParams, kind: str, theta: float) -> float:
    """Explosion time of the A- or C-flow started from theta; ``math.inf`` if it never explodes.

    Both equations are autonomous, ``x' = f(x)`` with f convex, so the flow
    explodes exactly when f stays positive on [x0, inf), after time
    ``int_{x0}^inf dx / f(x)``.
    """
    a, b = params.alpha, params.beta
    if kind == "A":
        x0, shift = theta, 0.0
    else:
        x0, shift = theta / a, b * theta / a

    def f(x):
        return math.expm1(a * x) - b * x + shift

    x_min = math.log(b / a) / a
    if f(max(x0, x_min)) <= 0.0:
        return math.inf
    def inv_f(w):
        x = x0 + w
        if a * x < 30.0:
            return 1.0 / f(x)
        e = math.exp(-a * x)
        return e / (1.0 - (1.0 + b * x - shift) * e)

    with warnings.catch_warnings():
        # roundoff warnings near the tolerance floor; callers verify with the integrator
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(inv_f, 0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def _bisect_boundary(params, kind, T, tol, width):
    lo, hi = 0.0, 1.0
    while _survives(params, kind, hi, T, tol):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ArithmeticError(f"no explosion found for {kind}-flow up to theta={hi}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _survives(params, kind, mid, T, tol):
            lo = mid
        else:
            hi = mid
    return ExplosionBoundary(0.5 * (lo + hi), T, hi - lo, params, kind, tol)


@lru_cache(maxsize=4096)
def _boundary(params, kind, T, tol, width):
    # root of 1/tau(theta) = 1/T from the explosion-time quadrature, checked
    # against the integrator; plain bisection on the integrator as a fallback
    def g(th):
        return 1.0 / blowup_time(params, kind, th) - 1.0 / T

    try:
        hi = 1.0
        while g(hi) <= 0.0:
            hi *= 2.0
            if hi > 1e6:
                raise ArithmeticError
        lo = 0.5 * hi
        while g(lo) > 0.0 and lo > 1e-300:
            lo *= 0.5
        theta = brentq(g, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=500)
        return ExplosionBoundary(theta, T, width, params, kind, tol)
    except (ArithmeticError, ValueError):
        return _bisect_boundary(params, kind, T, tol, width)


def find_theta_c(params: HawkesParams, T: float, tol: float = DEFAULT_TOL,
                 width: float = BOUNDARY_WIDTH) -> ExplosionBoundary:
    """Explosion boundary of the Z-transform at horizon T."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T}")
    return _boundary(params, "A", float(T), float(tol), float(width))


def find_theta_d(params: HawkesParams, T: float, tol: float = DEFAULT_TOL,
                 width: float = BOUNDARY_WIDTH) -> ExplosionBoundary:
    """Explosion boundary of the N-transform at horizon T."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T}")
    return _boundary(params, "C", float(T), float(tol), float(width))
