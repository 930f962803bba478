"""Exact simulation of the exponential Hawkes process and Monte Carlo estimators.

Paths are sampled by thinning: between events the intensity ``mu + Z`` only
decays, so its value at the current candidate dominates the rest of the
inter-event interval.  Every trajectory draws from its own stream keyed by
``(seed, trial_index)``, so splitting a batch of trials into chunks
reproduces the serial result exactly.

There is no jump at time zero: ``Z_0 = Z_{0-} = z0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from ._csv import write_csv
from .params import HawkesParams

_SEED_MAX = 2 ** 64


@dataclass(frozen=True)
class SimSpec:
    z0: float
    horizon: float
    seed: int = 42

    def __post_init__(self):
        if not (self.z0 >= 0 and math.isfinite(self.z0)):
            raise ValueError(f"z0 must be finite and >= 0, got {self.z0}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be finite and > 0, got {self.horizon}")
        if not 0 <= int(self.seed) < _SEED_MAX:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True, eq=False)
class EventPath:
    """Event times of one trajectory; Z and N are derived on demand."""

    event_times: np.ndarray
    params: HawkesParams
    z0: float
    horizon: float

    def __post_init__(self):
        t = np.asarray(self.event_times, dtype=float)
        if t.ndim != 1:
            raise ValueError("event_times must be one-dimensional")
        if t.size and (t[0] <= 0 or t[-1] > self.horizon or np.any(np.diff(t) <= 0)):
            raise ValueError("event times must be strictly increasing in (0, horizon]")
        t.setflags(write=False)
        object.__setattr__(self, "event_times", t)

    def __len__(self):
        return self.event_times.size

    def to_csv(self, target):
        """Dump as ``t,event_index`` with the running count as index."""
        write_csv(target, ["t", "event_index"],
                  ((t, i + 1) for i, t in enumerate(self.event_times.tolist())))


def simulate(params: HawkesParams, spec: SimSpec, trial: int = 0) -> EventPath:
    """Sample one trajectory on [0, horizon]; deterministic in (params, spec, trial)."""
    times = K.sample_times(params.alpha, params.beta, params.mu, float(spec.z0),
                           float(spec.horizon), np.uint64(spec.seed), trial)
    return EventPath(times, params, float(spec.z0), float(spec.horizon))


def _check_time(path: EventPath, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > path.horizon):
        raise ValueError(f"t must lie in [0, {path.horizon}]")
    return t


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def z_at(path: EventPath, t):
    """``Z_t = z0 e^{-beta t} + sum_{tau_i <= t} alpha e^{-beta (t - tau_i)}`` (right-continuous)."""
    t = _check_time(path, t)
    b, a = path.params.beta, path.params.alpha
    ev = path.event_times
    tt = np.atleast_1d(t)
    out = path.z0 * np.exp(-b * tt)
    if ev.size:
        lag = tt[:, None] - ev[None, :]
        out = out + a * np.where(lag >= 0, np.exp(-b * np.maximum(lag, 0.0)), 0.0).sum(axis=1)
    return _scalar(out.reshape(t.shape))


def count(path: EventPath, t):
    """``N_t``: the number of events in (0, t]."""
    t = _check_time(path, t)
    out = np.searchsorted(path.event_times, t, side="right")
    return int(out) if np.ndim(out) == 0 else out


def integral_z(path: EventPath, t):
    """``int_0^t Z_s ds`` in closed form (Z is piecewise exponential)."""
    t = _check_time(path, t)
    b, a = path.params.beta, path.params.alpha
    ev = path.event_times
    tt = np.atleast_1d(t)
    out = path.z0 * (-np.expm1(-b * tt)) / b
    if ev.size:
        lag = tt[:, None] - ev[None, :]
        out = out + (a / b) * np.where(lag >= 0, -np.expm1(-b * np.maximum(lag, 0.0)), 0.0).sum(axis=1)
    return _scalar(out.reshape(t.shape))


# ---------------------------------------------------------------- Monte Carlo

class MCEstimate(NamedTuple):
    estimate: float
    standard_error: float


def sample_terminal(params: HawkesParams, spec: SimSpec, trials: int, start: int = 0):
    """Arrays ``(Z_T, N_T)`` for trials ``start .. start + trials - 1``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return K.sample_terminal(params.alpha, params.beta, params.mu, float(spec.z0),
                             float(spec.horizon), np.uint64(spec.seed), int(start), int(trials))


def log_mean_exp(values) -> MCEstimate:
    """Log of a sample mean of ``exp(values)`` with its delta-method standard error."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        warnings.warn("non-finite exponent in Monte Carlo MGF; estimator failed",
                      RuntimeWarning, stacklevel=3)
        return MCEstimate(math.nan, math.nan)
    top = float(v.max())
    w = np.exp(v - top)
    mean = float(w.mean())
    if v.size > 1:
        se = float(w.std(ddof=1)) / math.sqrt(v.size) / mean
    else:
        se = math.inf
    return MCEstimate(top + math.log(mean), se)


def mc_log_mgf_Z(params: HawkesParams, spec: SimSpec, theta: float, trials: int) -> MCEstimate:
    """``log E[exp(theta Z_T)]`` from ``trials`` seeded replications.

    The estimator's variance is finite only for theta comfortably below half
    the explosion boundary (``2 theta < theta_c(T)`` after scaling by z0);
    beyond that the standard error is unreliable.
    """
    if theta == 0:
        return MCEstimate(0.0, 0.0)
    zs, _ = sample_terminal(params, spec, trials)
    return log_mean_exp(theta * zs)


def mc_log_mgf_N(params: HawkesParams, spec: SimSpec, theta: float, trials: int) -> MCEstimate:
    """``log E[exp(theta N_T)]`` from ``trials`` seeded replications."""
    if theta == 0:
        return MCEstimate(0.0, 0.0)
    _, ns = sample_terminal(params, spec, trials)
    return log_mean_exp(theta * ns.astype(float))
