"""Motor saturation margins and windowed margin statistics.

Raw ESC commands (nominally 1000 to 2000 counts) are normalized into [0, 1],
folded into a saturation margin min(c, 1 - c), reduced to the per-frame worst
motor, and summarized as mean / standard deviation over a sliding time window.
Those two numbers are the inputs of the fuzzy risk estimator.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import ConfigError, InputError, InsufficientDataError

DEFAULT_WINDOW_S = 2.0


class NormalizationMode(Enum):
    """How a raw command is scaled into the normalized range.

    LINEAR divides by the span (t_high - t_low) so a saturated motor has zero
    margin. SQRT_SQUARE_SPAN divides by sqrt(t_high^2 - t_low^2) instead; it is
    kept for fidelity experiments, but note a fully saturated motor then
    retains a margin of about 0.42.
    """

    LINEAR = "linear"
    SQRT_SQUARE_SPAN = "sqrt_square_span"


@dataclass(frozen=True)
class SaturationLimits:
    """ESC saturation limits in counts, plus the normalization mode."""

    t_low: float = 1000.0
    t_high: float = 2000.0
    mode: NormalizationMode = NormalizationMode.LINEAR

    def __post_init__(self):
        if not (math.isfinite(self.t_low) and math.isfinite(self.t_high)):
            raise ConfigError("saturation limits must be finite")
        if self.t_low <= 0 or self.t_high <= 0:
            raise ConfigError("saturation limits must be positive")
        if self.t_low >= self.t_high:
            raise ConfigError(
                f"t_low ({self.t_low}) must be below t_high ({self.t_high})"
            )


DEFAULT_LIMITS = SaturationLimits()


@dataclass(frozen=True)
class Attitude:
    """Desired and actual roll / pitch angles in degrees."""

    roll_des: float
    roll: float
    pitch_des: float
    pitch: float


@dataclass(frozen=True)
class MotorFrame:
    """One timestamped sample of N raw motor commands."""

    t: float
    commands: tuple
    attitude: Optional[Attitude] = None

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        if not self.commands:
            raise InputError("frame has no motor commands")
        if not math.isfinite(self.t):
            raise InputError("frame timestamp must be finite")
        for c in self.commands:
            if not math.isfinite(c):
                raise InputError(f"non-finite motor command at t={self.t}")


@dataclass(frozen=True)
class MarginStats:
    """Windowed mean and population standard deviation of the frame margin."""

    mean: float
    std: float
    window_start: float
    window_end: float


def normalize_command(c: float, limits: SaturationLimits = DEFAULT_LIMITS) -> float:
    """Scale a raw command into the normalized range, clamping into the limits first."""
    if not math.isfinite(c):
        raise InputError(f"non-finite command {c!r}")
    c = min(max(c, limits.t_low), limits.t_high)
    if limits.mode is NormalizationMode.LINEAR:
        return (c - limits.t_low) / (limits.t_high - limits.t_low)
    return (c - limits.t_low) / math.sqrt(limits.t_high**2 - limits.t_low**2)


def motor_margin(c_norm: float) -> float:
    """Distance of a normalized command from its nearest saturation limit."""
    return min(c_norm, 1.0 - c_norm)


def frame_margin(frame: MotorFrame, limits: SaturationLimits = DEFAULT_LIMITS) -> float:
    """Margin of the worst (binding) motor in the frame."""
    return min(motor_margin(normalize_command(c, limits)) for c in frame.commands)


def window_stats(
    samples: Sequence[tuple], window: float, t_now: float
) -> MarginStats:
    """Mean and population std of margin samples inside [t_now - window, t_now].

    ``samples`` is a time-ordered sequence of (t, margin) pairs. Raises
    InsufficientDataError when the window holds no samples; the caller is
    expected to skip that timestep.
    """
    t_start = t_now - window
    values = [m for (t, m) in samples if t_start <= t <= t_now]
    if not values:
        raise InsufficientDataError(
            f"no margin samples in [{t_start}, {t_now}]"
        )
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return MarginStats(mean=mean, std=math.sqrt(var), window_start=t_start, window_end=t_now)


class MarginWindow:
    """Sliding time window of (t, margin) samples for one log stream.

    Single-owner state: push frames in time order, read stats after each push.
    """

    def __init__(self, window: float = DEFAULT_WINDOW_S):
        if window <= 0:
            raise ConfigError("window length must be positive")
        self.window = window
        self._samples: deque = deque()

    def push(self, t: float, margin: float) -> None:
        if self._samples and t < self._samples[-1][0]:
            raise InputError(f"timestamps must be non-decreasing (got {t})")
        self._samples.append((t, margin))
        t_start = t - self.window
        while self._samples and self._samples[0][0] < t_start:
            self._samples.popleft()

    def __len__(self):
        return len(self._samples)

    def stats(self) -> MarginStats:
        if not self._samples:
            raise InsufficientDataError("window is empty")
        t_now = self._samples[-1][0]
        return window_stats(self._samples, self.window, t_now)


def attitude_rmse(frames: Sequence[MotorFrame], strict: bool = False) -> float:
    """Root-mean-square combined roll / pitch tracking error over a frame window.

    Per frame the squared error is (roll_des - roll)^2 + (pitch_des - pitch)^2;
    the window value is the root of the mean squared error. With ``strict=True``
    the squared terms are differenced instead of summed, and the value is only
    defined while the radicand stays non-negative.
    """
    if not frames:
        raise InsufficientDataError("no frames for attitude error")
    sq = []
    for f in frames:
        if f.attitude is None:
            raise InputError("attitude unavailable")
        a = f.attitude
        droll = a.roll_des - a.roll
        dpitch = a.pitch_des - a.pitch
        if strict:
            sq.append(droll**2 - dpitch**2)
        else:
            sq.append(droll**2 + dpitch**2)
    mean_sq = math.fsum(sq) / len(sq)
    if mean_sq < 0:
        raise InputError("negative radicand in strict attitude error")
    return math.sqrt(mean_sq)
