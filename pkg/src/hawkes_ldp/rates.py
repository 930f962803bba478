"""Rate functions for Z_T/n and N_T/n when Z_0 = n, and their most likely paths.

The scalar rates are Legendre transforms of the A- and C-cumulants at the
horizon.  The maximiser solves ``slope(theta) = x``; the slope is strictly
increasing in theta, so a Newton iteration on ``log slope(theta) - log x``
safeguarded by a bracket is enough.  The sample-path functionals are
evaluated exactly on piecewise-exponential (Z) or piecewise-linear (N)
interpolants of a sampled path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._csv import write_csv
from .errors import ConvergenceError
from .mgf import (DEFAULT_TOL, find_theta_c, find_theta_d, hermite, n_cumulant,
                  run_flow, z_cumulant)
from .params import HawkesParams

LEFT_CLAMP = -1e6      # times 1/alpha: most negative theta tried before giving up
MAX_ITER = 200


class Boundary(str, enum.Enum):
    INTERIOR = "interior"
    LLN_ZERO = "lln_zero"
    DOMAIN_EDGE = "domain_edge"
    INFINITE = "infinite"


@dataclass(frozen=True)
class LegendreResult:
    value: float
    theta_star: float | None
    boundary: Boundary
    iterations: int = 0

    def __float__(self):
        return self.value


def _solve_slope(cumulant, x, theta_hi, theta_left, what):
    """theta with ``cumulant(theta).slope == x`` on (theta_left, theta_hi).

    Returns (theta, cumulant at theta, iterations, hit_left_clamp).
    """
    logx = math.log(x)
    c0 = cumulant(0.0)
    if c0.slope < x:
        lo, hi = 0.0, theta_hi
        c_hi = cumulant(hi)
        if not c_hi.finite or c_hi.slope <= x:
            raise ConvergenceError(
                f"{what}: slope at the explosion boundary does not exceed x={x}",
                bracket=(lo, hi))
        theta, c = 0.0, c0
    else:
        hi, theta, c = 0.0, 0.0, c0
        lo = -1.0
        c_lo = cumulant(lo)
        while c_lo.slope > x:
            hi = lo
            theta, c = lo, c_lo
            lo *= 2.0
            if lo < theta_left:
                return hi, c, 0, True
            c_lo = cumulant(lo)
        if c_lo.slope == x:
            return lo, c_lo, 0, False
    # safeguarded Newton on F(theta) = log slope - log x
    for it in range(1, MAX_ITER + 1):
        f = math.log(c.slope) - logx
        if abs(f) < 1e-13:
            return theta, c, it, False
        if f > 0:
            hi = theta
        else:
            lo = theta
        dfdth = c.curvature / c.slope
        step_ok = dfdth > 0 and math.isfinite(dfdth)
        cand = theta - f / dfdth if step_ok else math.nan
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, abs(theta)):
            return theta, c, it, False
        theta = cand
        c = cumulant(theta)
        while not c.finite:
            # overshoot into the exploded region: pull back toward the bracket
            hi = theta
            theta = 0.5 * (lo + hi)
            c = cumulant(theta)
    f = math.log(c.slope) - logx
    if abs(f) < 1e-9:
        return theta, c, MAX_ITER, False
    raise ConvergenceError(f"{what}: Newton iteration did not converge for x={x}",
                           bracket=(lo, hi), iterations=MAX_ITER)


def rate_J(params: HawkesParams, x: float, T: float,
           tol: float = DEFAULT_TOL) -> LegendreResult:
    """Rate function of ``Z_T / n``: ``sup_theta {theta x - A(T; theta)}``."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T}")
    floor = math.exp(-params.beta * T)
    edge = -math.expm1(-params.beta * T) / params.beta
    if x < floor * (1 - 1e-12):
        return LegendreResult(math.inf, None, Boundary.INFINITE)
    if x <= floor * (1 + 1e-12):
        return LegendreResult(edge, None, Boundary.DOMAIN_EDGE)
    lln = params.lln_z(T)
    if abs(x - lln) <= 1e-14 * lln:
        return LegendreResult(0.0, 0.0, Boundary.LLN_ZERO)

    def cumulant(theta):
        return z_cumulant(params, theta, T, tol)

    bnd = find_theta_c(params, T, tol)
    theta_hi = bnd.theta_c - 0.5 * bnd.bracket_width
    theta, c, its, clamped = _solve_slope(
        cumulant, x, theta_hi, LEFT_CLAMP / params.alpha, "rate_J")
    value = max(theta * x - c.value, 0.0)
    if clamped:
        return LegendreResult(value, theta, Boundary.DOMAIN_EDGE, its)
    return LegendreResult(value, theta, Boundary.INTERIOR, its)


def rate_H(params: HawkesParams, x: float, T: float,
           tol: float = DEFAULT_TOL) -> LegendreResult:
    """Rate function of ``N_T / n``: ``sup_theta {theta x - C(T; theta/alpha) + theta/alpha}``."""
    if not T > 0:
        raise ValueError(f"horizon must be > 0, got {T}")
    if x < 0:
        return LegendreResult(math.inf, None, Boundary.INFINITE)
    if x == 0:
        return LegendreResult(-math.expm1(-params.beta * T) / params.beta, None,
                              Boundary.DOMAIN_EDGE)
    lln = params.psi(T)
    if abs(x - lln) <= 1e-14 * lln:
        return LegendreResult(0.0, 0.0, Boundary.LLN_ZERO)

    def cumulant(theta):
        return n_cumulant(params, theta, T, tol)

    bnd = find_theta_d(params, T, tol)
    theta_hi = bnd.theta_c - 0.5 * bnd.bracket_width
    theta, c, its, clamped = _solve_slope(
        cumulant, x, theta_hi, LEFT_CLAMP / params.alpha, "rate_H")
    value = max(theta * x - c.value, 0.0)
    if clamped:
        return LegendreResult(value, theta, Boundary.DOMAIN_EDGE, its)
    return LegendreResult(value, theta, Boundary.INTERIOR, its)


def rate_sweep(kind: str, params: HawkesParams, T: float, xs) -> list:
    """``[(x, LegendreResult or exception)]`` for ``kind`` in {"z", "n"}."""
    fn = {"z": rate_J, "n": rate_H}[kind]
    rows = []
    for x in xs:
        try:
            rows.append((float(x), fn(params, float(x), T)))
        except (ConvergenceError, ArithmeticError) as exc:
            rows.append((float(x), exc))
    return rows


def write_rate_sweep(target, rows, with_boundary=False):
    header = ["x", "rate", "theta_star"] + (["boundary"] if with_boundary else [])
    out = []
    for x, res in rows:
        if isinstance(res, LegendreResult):
            row = [x, res.value, res.theta_star]
            if with_boundary:
                row.append(res.boundary.value)
        else:
            row = [x, math.nan, None] + ([f"failed: {res}"] if with_boundary else [])
        out.append(row)
    write_csv(target, header, out)


# ---------------------------------------------------------------- paths

class PathKind(str, enum.Enum):
    Z = "Z"
    N = "N"


@dataclass(frozen=True, eq=False)
class SampledPath:
    """A path on [0, T] given by its values on an increasing grid.

    Z-paths start at 1; N-paths start at 0 and are nondecreasing.
    """

    times: np.ndarray
    values: np.ndarray
    kind: PathKind

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", PathKind(self.kind))
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("grid must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        if self.kind is PathKind.Z:
            if abs(v[0] - 1.0) > 1e-12:
                raise ValueError(f"Z-paths start at 1, got {v[0]}")
            if np.any(v < 0):
                raise ValueError("Z-paths are nonnegative")
        else:
            if abs(v[0]) > 1e-12:
                raise ValueError(f"N-paths start at 0, got {v[0]}")
            if np.any(np.diff(v) < -1e-12 * max(1.0, float(np.max(np.abs(v))))):
                raise ValueError("N-paths must be nondecreasing")
        t.setflags(write=False)
        v.setflags(write=False)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def to_csv(self, target):
        write_csv(target, ["t", "value"], zip(self.times.tolist(), self.values.tolist()))


def _relu_entropy(u):
    """u log u - u + 1 with the 0 log 0 = 0 convention."""
    u = np.asarray(u, dtype=float)
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, u * np.log(safe) - u + 1.0, 1.0)


def functional_I_Z(params: HawkesParams, g: SampledPath) -> float:
    """Sample-path rate of ``Z/n`` on the piecewise-exponential interpolant of ``g``.

    On each segment ``g'/g`` is constant, so the integrand is ``g`` times a
    constant and integrates in closed form.
    """
    if g.kind is not PathKind.Z:
        raise ValueError("functional_I_Z needs a Z-path")
    a, b = params.alpha, params.beta
    v = g.values
    if np.any(v <= 0):
        return math.inf
    dt = np.diff(g.times)
    kappa = np.diff(np.log(v)) / dt
    slack = 1e-10 * (1.0 + b)
    if np.any(kappa < -b - slack):
        return math.inf
    u = np.maximum((b + kappa) / a, 0.0)
    z = kappa * dt
    small = np.abs(z) < 1e-9
    ratio = np.where(small, 1.0 + 0.5 * z, np.expm1(np.where(small, 1.0, z)) / np.where(small, 1.0, z))
    integral_g = v[:-1] * dt * ratio
    return float(np.sum(_relu_entropy(u) * integral_g))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def functional_I_N(params: HawkesParams, h: SampledPath) -> float:
    """Sample-path rate of ``N/n`` on the piecewise-linear interpolant of ``h``.

    The intensity term ``y(t) = e^{-bt}(1 + int_0^t a e^{bs} h'(s) ds)`` solves
    ``y' = -b y + a h'`` and is carried exactly across segments; the only
    numerical step is an 8-point Gauss rule for ``int log y``.
    """
    if h.kind is not PathKind.N:
        raise ValueError("functional_I_N needs an N-path")
    a, b = params.alpha, params.beta
    dt = np.diff(h.times)
    m = np.diff(h.values) / dt
    if np.any(m < 0):
        # within construction noise: flat
        m = np.maximum(m, 0.0)
    c = a * m / b
    decay = np.exp(-b * dt)
    y0 = np.empty_like(dt)
    y = 1.0
    for k in range(dt.size):
        y0[k] = y
        y = c[k] + (y - c[k]) * decay[k]
    int_y = c * dt + (y0 - c) * (-np.expm1(-b * dt)) / b
    # Gauss nodes on each segment for the log term
    s = 0.5 * (_GL_X[None, :] + 1.0) * dt[:, None]
    y_nodes = c[:, None] + (y0 - c)[:, None] * np.exp(-b * s)
    int_log_y = 0.5 * dt * (np.log(y_nodes) @ _GL_W)
    mlogm = np.where(m > 0, m * np.log(np.where(m > 0, m, 1.0)), 0.0)
    total = mlogm * dt - m * int_log_y - m * dt + int_y
    return float(np.sum(total))


def _uniform(T, grid_size):
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    t = np.linspace(0.0, T, grid_size)
    t[-1] = T
    return t


def _require_optimizer(res, what):
    if res.boundary in (Boundary.INTERIOR, Boundary.LLN_ZERO):
        return res.theta_star
    raise ValueError(f"{what}: no interior optimiser (boundary={res.boundary.value}, "
                     f"value={res.value})")


def optimal_path_Z(params: HawkesParams, x: float, T: float, grid_size: int = 2048,
                   tol: float = DEFAULT_TOL) -> SampledPath:
    """Most likely path of ``Z/n`` to ``Z_T/n = x``.

    With ``phi(t) = log dA(t;theta*)/dtheta`` the optimal path is
    ``g(t) = exp(phi(T) - phi(T - t))``.
    """
    theta = _require_optimizer(rate_J(params, x, T, tol), "optimal_path_Z")
    fl = run_flow(params, "A", theta, T, tol, store=True)
    t = _uniform(T, grid_size)
    phi = hermite(fl.ts, fl.ys[:, K.IPHI], fl.fs[:, K.IPHI], T - t)
    values = np.exp(fl.state[K.IPHI] - phi)
    values[0] = 1.0
    return SampledPath(t, values, PathKind.Z)


def optimal_path_N(params: HawkesParams, x: float, T: float, grid_size: int = 2048,
                   tol: float = DEFAULT_TOL) -> SampledPath:
    """Most likely path of ``N/n`` to ``N_T/n = x``.

    With ``Phi`` and ``rho`` carried by the C-flow at theta*,
    ``h(t) = e^{Phi(T)} (rho(T) - rho(T - t))``.
    """
    theta = _require_optimizer(rate_H(params, x, T, tol), "optimal_path_N")
    fl = run_flow(params, "C", theta, T, tol, store=True)
    t = _uniform(T, grid_size)
    rho = hermite(fl.ts, fl.ys[:, K.IRHO], fl.fs[:, K.IRHO], T - t)
    values = math.exp(fl.state[K.IPHI]) * (fl.state[K.IRHO] - rho)
    values[0] = 0.0
    values = np.maximum.accumulate(values)
    return SampledPath(t, values, PathKind.N)
