"""Compiled inner loops: the Riccati flow integrator and the thinning samplers.

Everything here works on plain floats and arrays; the public modules wrap
these with validation and result types.
"""
import math

import numpy as np
from numba import njit

# flow status codes
OK = 0
BLOWN_UP = 1
FAILED = 2

# state layout of the augmented flow
IX, IB, IS1, IS2, IPHI, IRHO = 0, 1, 2, 3, 4, 5
NSTATE = 6

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


@njit(cache=True)
def _rhs(y, alpha, beta, mu, shift, src, out):
    x = y[IX]
    e = math.exp(alpha * x)
    lin = -beta + alpha * e
    c1 = y[IS1] + src / alpha
    out[IX] = -beta * x + e - 1.0 + shift
    out[IB] = mu * (e - 1.0)
    out[IS1] = lin * y[IS1] + src * e
    out[IS2] = lin * y[IS2] + alpha * alpha * e * c1 * c1
    out[IPHI] = lin
    out[IRHO] = math.exp(alpha * x - y[IPHI])


@njit(cache=True)
def flow(alpha, beta, mu, x0, shift, src, T, tol, cap, store):
    """Integrate the augmented Riccati system on [0, T].

    x' = -beta x + e^{alpha x} - 1 + shift     (A- or C-equation)
    b' = mu (e^{alpha x} - 1)                  (B or D)
    s1' = (-beta + alpha e^{alpha x}) s1 + src e^{alpha x}
    s2' = (-beta + alpha e^{alpha x}) s2 + alpha^2 e^{alpha x} (s1 + src/alpha)^2
    phi' = alpha e^{alpha x} - beta
    rho' = e^{alpha x - phi}

    With src = 0, s1(0) = 1 this carries dA/dtheta and d2A/dtheta2; with
    src = 1, s1(0) = 0 it carries the derivatives of C(t; theta/alpha) - theta/alpha.

    Returns (status, t_end, y_end, ts, ys, fs, n_stored).  Blow-up is declared
    when x exceeds ``cap``; t_end is then the time of the first excursion.
    """
    y = np.zeros(NSTATE)
    y[IX] = x0
    y[IS1] = 1.0 - src
    cap_n = 256 if store else 1
    ts = np.empty(cap_n)
    ys = np.empty((cap_n, NSTATE))
    fs = np.empty((cap_n, NSTATE))
    k1 = np.empty(NSTATE)
    k2 = np.empty(NSTATE)
    k3 = np.empty(NSTATE)
    k4 = np.empty(NSTATE)
    k5 = np.empty(NSTATE)
    k6 = np.empty(NSTATE)
    k7 = np.empty(NSTATE)
    tmp = np.empty(NSTATE)
    ynew = np.empty(NSTATE)

    _rhs(y, alpha, beta, mu, shift, src, k1)
    n = 0
    if store:
        ts[0] = 0.0
        ys[0, :] = y
        fs[0, :] = k1
        n = 1

    t = 0.0
    if T <= 0.0:
        return OK, t, y, ts, ys, fs, n
    h = min(T, 0.1 * tol ** 0.2)
    hmin = 1e-15 * max(1.0, T)
    steps = 0
    while t < T:
        steps += 1
        if steps > 2000000:
            return FAILED, t, y, ts, ys, fs, n
        last = False
        if t + h >= T:
            h = T - t
            last = True

        for i in range(NSTATE):
            tmp[i] = y[i] + h * _A21 * k1[i]
        _rhs(tmp, alpha, beta, mu, shift, src, k2)
        for i in range(NSTATE):
            tmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(tmp, alpha, beta, mu, shift, src, k3)
        for i in range(NSTATE):
            tmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(tmp, alpha, beta, mu, shift, src, k4)
        for i in range(NSTATE):
            tmp[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                 + _A54 * k4[i])
        _rhs(tmp, alpha, beta, mu, shift, src, k5)
        for i in range(NSTATE):
            tmp[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                 + _A64 * k4[i] + _A65 * k5[i])
        _rhs(tmp, alpha, beta, mu, shift, src, k6)
        for i in range(NSTATE):
            ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                  + _B5 * k5[i] + _B6 * k6[i])
        _rhs(ynew, alpha, beta, mu, shift, src, k7)

        err = 0.0
        finite = True
        for i in range(NSTATE):
            if not (math.isfinite(ynew[i]) and math.isfinite(k7[i])):
                finite = False
                break
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                     + _E6 * k6[i] + _E7 * k7[i])
            sc = tol + tol * max(abs(y[i]), abs(ynew[i]))
            r = abs(e) / sc
            if r > err:
                err = r
        if not finite:
            # stages ran past the overflow threshold: only possible near blow-up
            h *= 0.25
            if h < hmin:
                if y[IX] > 0.0:
                    return BLOWN_UP, t, y, ts, ys, fs, n
                return FAILED, t, y, ts, ys, fs, n
            continue

        if err <= 1.0:
            t = T if last else t + h
            if ynew[IX] > cap:
                return BLOWN_UP, t, y, ts, ys, fs, n
            for i in range(NSTATE):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if store:
                if n == ts.shape[0]:
                    m = 2 * n
                    ts2 = np.empty(m)
                    ys2 = np.empty((m, NSTATE))
                    fs2 = np.empty((m, NSTATE))
                    ts2[:n] = ts
                    ys2[:n, :] = ys
                    fs2[:n, :] = fs
                    ts, ys, fs = ts2, ys2, fs2
                ts[n] = t
                ys[n, :] = y
                fs[n, :] = k1
                n += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < hmin:
                if y[IX] > 0.0:
                    return BLOWN_UP, t, y, ts, ys, fs, n
                return FAILED, t, y, ts, ys, fs, n
    return OK, t, y, ts, ys, fs, n


# ---------------------------------------------------------------- sampling

@njit(cache=True)
def mix_seed(seed, index):
    """splitmix64 finaliser of (seed, index), folded to 32 bits for MT seeding."""
    z = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(index) + np.uint64(1)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return np.uint32(z & np.uint64(0xFFFFFFFF))


@njit(cache=True)
def sample_times(alpha, beta, mu, z0, T, seed, index):
    """Event times of one trajectory on (0, T] by thinning."""
    np.random.seed(mix_seed(seed, index))
    out = np.empty(16)
    n = 0
    t = 0.0
    z = z0
    while True:
        bound = mu + z
        if bound <= 0.0:
            break
        t_c = t - math.log(1.0 - np.random.random()) / bound
        if t_c > T:
            break
        z = z * math.exp(-beta * (t_c - t))
        t = t_c
        if np.random.random() * bound <= mu + z:
            z += alpha
            if n == out.shape[0]:
                bigger = np.empty(2 * n)
                bigger[:n] = out
                out = bigger
            out[n] = t
            n += 1
    return out[:n].copy()


@njit(cache=True)
def _terminal_one(alpha, beta, mu, z0, T):
    n = 0
    t = 0.0
    z = z0
    while True:
        bound = mu + z
        if bound <= 0.0:
            break
        t_c = t - math.log(1.0 - np.random.random()) / bound
        if t_c > T:
            break
        z = z * math.exp(-beta * (t_c - t))
        t = t_c
        if np.random.random() * bound <= mu + z:
            z += alpha
            n += 1
    return z * math.exp(-beta * (T - t)), n


@njit(cache=True)
def sample_terminal(alpha, beta, mu, z0, T, seed, start, trials):
    """(Z_T, N_T) for trials start .. start+trials-1 of the seeded family."""
    zs = np.empty(trials)
    ns = np.empty(trials, dtype=np.int64)
    for k in range(trials):
        np.random.seed(mix_seed(seed, start + k))
        zs[k], ns[k] = _terminal_one(alpha, beta, mu, z0, T)
    return zs, ns


# claim kinds for the ruin sampler
CLAIM_POISSON = 0
CLAIM_DETERMINISTIC = 1
CLAIM_EXPONENTIAL = 2


@njit(cache=True)
def sample_ruin(alpha, beta, mu, z0, T, surplus, premium, kind, param,
                seed, start, trials):
    """Ruin indicators: surplus + premium*t - sum of claims <= 0 at some claim epoch."""
    ruined = np.zeros(trials, dtype=np.bool_)
    for k in range(trials):
        np.random.seed(mix_seed(seed, start + k))
        if surplus <= 0.0:
            ruined[k] = True
            continue
        t = 0.0
        z = z0
        paid = 0.0
        while True:
            bound = mu + z
            if bound <= 0.0:
                break
            t_c = t - math.log(1.0 - np.random.random()) / bound
            if t_c > T:
                break
            z = z * math.exp(-beta * (t_c - t))
            t = t_c
            if np.random.random() * bound <= mu + z:
                z += alpha
                if kind == CLAIM_POISSON:
                    paid += np.random.poisson(param)
                elif kind == CLAIM_DETERMINISTIC:
                    paid += param
                else:
                    paid += np.random.exponential(param)
                if surplus + premium * t - paid <= 0.0:
                    ruined[k] = True
                    break
    return ruined
