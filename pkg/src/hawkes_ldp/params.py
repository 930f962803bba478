"""Parameters of the linear Markovian Hawkes process with exponential kernel."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class HawkesParams:
    """Kernel ``alpha * exp(-beta * t)`` and base intensity ``mu``.

    The intensity is ``mu + Z_{t-}`` where ``dZ = -beta Z dt + alpha dN``.
    """

    alpha: float
    beta: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")

    @property
    def excess(self) -> float:
        """``alpha - beta``: the growth rate of the mean of Z."""
        return self.alpha - self.beta

    def lln_z(self, t: float) -> float:
        """Fluid limit of ``Z_t / n`` when ``Z_0 = n``."""
        return math.exp((self.alpha - self.beta) * t)

    def psi(self, t: float) -> float:
        """Fluid limit of ``N_t / n``: ``(e^{(a-b)t} - 1)/(a-b)``, or ``t`` when critical."""
        d = self.alpha - self.beta
        if d == 0.0:
            return t
        return math.expm1(d * t) / d
