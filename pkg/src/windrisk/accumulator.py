"""Accumulated risk index driven by Gaussian tail probabilities.

The instantaneous risk stream is treated as normally distributed over a short
history window. The probability of the next value exceeding a high threshold
raises the accumulated index, the probability of it falling below a low
threshold decays it:

    delta = k_i * p_high - k_d * p_low

with the result clamped into [0, 100].
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, InputError, InsufficientDataError

# Rational approximation constants (max abs error below 1.5e-7).
_A1 = 0.254829592
_A2 = -0.284496736
_A3 = 1.421413741
_A4 = -1.453152027
_A5 = 1.061405429
_P = 0.3275911


def erf(x: float) -> float:
    """Error function, odd-extended rational approximation."""
    if not math.isfinite(x):
        raise InputError(f"non-finite erf argument {x!r}")
    sign = 1.0 if x >= 0 else -1.0
    x = abs(x)
    t = 1.0 / (1.0 + _P * x)
    y = 1.0 - (((((_A5 * t + _A4) * t) + _A3) * t + _A2) * t + _A1) * t * math.exp(-x * x)
    return sign * y


def normal_cdf(x: float, mu: float, sigma: float) -> float:
    """P(X <= x) for X ~ Normal(mu, sigma).

    A zero sigma degenerates to a right-continuous step: 0 below mu, 1 at and
    above it. This happens in practice whenever the risk window is constant,
    e.g. during calm hover.
    """
    if sigma < 0:
        raise InputError(f"negative sigma {sigma!r}")
    if sigma == 0:
        return 1.0 if x >= mu else 0.0
    z = (x - mu) / sigma
    return 0.5 * (1.0 + erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class AccumulatorParams:
    """Window length, thresholds (%), and per-step gains of the accumulator."""

    window: int = 50
    x_high: float = 75.0
    x_low: float = 25.0
    k_i: float = 2.0
    k_d: float = 1.0

    def __post_init__(self):
        if self.window < 2:
            raise ConfigError("accumulator window must hold at least 2 samples")
        if not (0 <= self.x_low < self.x_high <= 100):
            raise ConfigError(
                f"thresholds must satisfy 0 <= x_low < x_high <= 100, "
                f"got ({self.x_low}, {self.x_high})"
            )
        if self.k_i < 0 or self.k_d < 0:
            raise ConfigError("gains must be non-negative")


@dataclass
class RiskState:
    """Mutable per-stream accumulator state."""

    params: AccumulatorParams = field(default_factory=AccumulatorParams)
    r_acc: float = 0.0
    p_high: float = 0.0
    p_low: float = 0.0

    def __post_init__(self):
        self.window: deque = deque(maxlen=self.params.window)


def tail_probabilities(state: RiskState) -> tuple:
    """(p_high, p_low) for the next step, from the current window."""
    if not state.window:
        raise InsufficientDataError("risk window is empty")
    n = len(state.window)
    mu = math.fsum(state.window) / n
    sigma = math.sqrt(math.fsum((v - mu) ** 2 for v in state.window) / n)
    p_high = 1.0 - normal_cdf(state.params.x_high, mu, sigma)
    p_low = normal_cdf(state.params.x_low, mu, sigma)
    return p_high, p_low


def accumulate_step(state: RiskState, r_inst: float) -> RiskState:
    """Push one instantaneous risk value and update the accumulated index."""
    if not math.isfinite(r_inst):
        raise InputError(f"non-finite instantaneous risk {r_inst!r}")
    if r_inst < 0.0 or r_inst > 100.0:
        warnings.warn(
            f"instantaneous risk {r_inst} outside [0, 100], clamping",
            stacklevel=2,
        )
        r_inst = min(max(r_inst, 0.0), 100.0)
    state.window.append(r_inst)
    state.p_high, state.p_low = tail_probabilities(state)
    delta = state.params.k_i * state.p_high - state.params.k_d * state.p_low
    state.r_acc = min(max(state.r_acc + delta, 0.0), 100.0)
    return state
