"""Synthetic flight and dataset generation.

A desk-scale stand-in for a full simulation campaign. The model is a
calibrated statistical surrogate, not a physics simulation: per step the wind
is sampled from the scenario's normal distribution (clipped at zero, plus any
scheduled gusts), motor commands respond linearly to wind with alternating
directional weights, and attitude tracking error integrates the saturation
deficit. Its only job is to reproduce the qualitative coupling between margin
loss and attitude error so the learning pipeline has something real to chew
on.

All randomness is drawn from a per-scenario seeded generator, so regeneration
is bit-stable and scenario order never matters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, InputError, ParseError
from .margin import (
    Attitude,
    DEFAULT_LIMITS,
    MotorFrame,
    SaturationLimits,
    attitude_rmse,
    frame_margin,
)
from .rules import DataPair

DEFAULT_RATE_HZ = 10.0
DEFAULT_DURATION_S = 60.0

RISK_PER_RMSE_DEG = 15.0


@dataclass(frozen=True)
class WindScenario:
    """One wind condition: stationary statistics plus optional gust bursts.

    gusts is a sequence of (t_start, t_end, extra_mps) triples added on top
    of the sampled wind while active.
    """

    wind_mean: float
    wind_var: float
    duration: float = DEFAULT_DURATION_S
    seed: int = 0
    gusts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gusts", tuple(tuple(g) for g in self.gusts))
        if not (0.0 <= self.wind_mean <= 20.0):
            raise ConfigError(f"wind_mean {self.wind_mean!r} outside [0, 20] m/s")
        if not (0.0 <= self.wind_var <= 40.0):
            raise ConfigError(f"wind_var {self.wind_var!r} outside [0, 40] m^2/s^2")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigError(f"duration must be positive, got {self.duration!r}")
        for g in self.gusts:
            if len(g) != 3:
                raise ConfigError(f"gust entry {g!r} is not (t_start, t_end, extra)")
            t0, t1, extra = g
            if not (math.isfinite(t0) and math.isfinite(t1) and t0 < t1):
                raise ConfigError(f"gust window ({t0!r}, {t1!r}) is empty")
            if not math.isfinite(extra):
                raise ConfigError(f"gust strength {extra!r} must be finite")


@dataclass(frozen=True)
class DroneParams:
    """Response model of the simulated vehicle.

    hover is the command fraction needed to hold altitude (0.6 matches a
    thrust-to-weight ratio of about 1.7). disturbance_gain converts wind speed
    to command fraction; with the default 0.04 the upwind motors saturate at
    10 m/s and a hover of 0.6. attitude_gain converts sustained saturation
    deficit into degrees of tracking error per second, fought by error_decay.
    """

    n_motors: int = 4
    hover: float = 0.6
    disturbance_gain: float = 0.04
    attitude_gain: float = 160.0
    differential: float = 0.5
    noise_std: float = 0.004
    attitude_noise: float = 0.1
    error_decay: float = 0.8
    error_cap: float = 45.0

    def __post_init__(self):
        if self.n_motors < 1:
            raise ConfigError("need at least one motor")
        if not (0.0 < self.hover < 1.0):
            raise ConfigError(f"hover fraction {self.hover!r} outside (0, 1)")
        for name in (
            "disturbance_gain",
            "attitude_gain",
            "differential",
            "noise_std",
            "attitude_noise",
            "error_decay",
        ):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if not (math.isfinite(self.error_cap) and self.error_cap > 0.0):
            raise ConfigError(f"error_cap must be positive, got {self.error_cap!r}")

    def weights(self) -> np.ndarray:
        """Directional response per motor: upwind half rises with the wind,
        downwind half drops by the differential fraction, so the net command
        rises (drag compensation) while the vehicle fights the moment."""
        w = np.empty(self.n_motors)
        w[0::2] = 1.0
        w[1::2] = -self.differential
        return w


def simulate_flight(
    scenario: WindScenario,
    drone: Optional[DroneParams] = None,
    rate: float = DEFAULT_RATE_HZ,
    limits: SaturationLimits = DEFAULT_LIMITS,
) -> list:
    """Generate one flight log as a list of MotorFrame.

    Deterministic for a given (scenario, drone, rate, limits): all noise
    comes from a generator seeded with scenario.seed.
    """
    drone = drone or DroneParams()
    if not (math.isfinite(rate) and rate > 0):
        raise ConfigError(f"sample rate must be positive, got {rate!r}")
    rng = np.random.default_rng(scenario.seed)
    n = max(1, int(round(scenario.duration * rate)))
    dt = 1.0 / rate
    ts = np.arange(n) * dt

    wind = np.clip(rng.normal(scenario.wind_mean, math.sqrt(scenario.wind_var), n), 0.0, None)
    for t0, t1, extra in scenario.gusts:
        wind[(ts >= t0) & (ts < t1)] += extra
    wind = np.clip(wind, 0.0, None)

    weights = drone.weights()
    cmd_noise = rng.normal(0.0, drone.noise_std, (n, drone.n_motors))
    att_noise = rng.normal(0.0, drone.attitude_noise, (n, 2))

    frac = drone.hover + drone.disturbance_gain * wind[:, None] * weights[None, :] + cmd_noise
    deficit = np.maximum(frac - 1.0, np.maximum(-frac, 0.0)).max(axis=1)
    counts = limits.t_low + np.clip(frac, 0.0, 1.0) * (limits.t_high - limits.t_low)

    frames = []
    err = 0.0
    half = 1.0 / math.sqrt(2.0)
    for k in range(n):
        err += (drone.attitude_gain * deficit[k] - drone.error_decay * err) * dt
        err = min(max(err, 0.0), drone.error_cap)
        att = Attitude(
            roll_des=0.0,
            roll=err * half + att_noise[k, 0],
            pitch_des=0.0,
            pitch=err * half + att_noise[k, 1],
        )
        frames.append(MotorFrame(t=ts[k], commands=tuple(counts[k]), attitude=att))
    return frames


def risk_from_rmse(rmse: float, scale: float = RISK_PER_RMSE_DEG, cap: float = 100.0) -> float:
    """Linear risk labeling: 5 degrees RMSE (a critical attitude error)
    lands on 75%, the peak of the HIGH risk set; 100% from 6.67 degrees up."""
    if not (math.isfinite(rmse) and rmse >= 0.0):
        raise InputError(f"RMSE must be finite and >= 0, got {rmse!r}")
    return min(cap, scale * rmse)


def flight_pair(
    frames: Sequence[MotorFrame],
    limits: SaturationLimits = DEFAULT_LIMITS,
) -> DataPair:
    """Whole-flight margin statistics plus the RMSE-derived risk label."""
    if not frames:
        raise InputError("empty flight log")
    margins = [frame_margin(f, limits) for f in frames]
    mean = math.fsum(margins) / len(margins)
    var = math.fsum((m - mean) ** 2 for m in margins) / len(margins)
    risk = risk_from_rmse(attitude_rmse(frames))
    return DataPair(margin_mean=mean, margin_std=math.sqrt(var), risk=risk)


def gen_dataset(
    scenarios: Iterable[WindScenario],
    drone: Optional[DroneParams] = None,
    rate: float = DEFAULT_RATE_HZ,
    limits: SaturationLimits = DEFAULT_LIMITS,
) -> list:
    """One DataPair per scenario: simulate, summarize, label."""
    drone = drone or DroneParams()
    scenarios = list(scenarios)
    if not scenarios:
        raise InputError("need at least one scenario")
    return [
        flight_pair(simulate_flight(sc, drone, rate, limits), limits) for sc in scenarios
    ]


def scenario_grid(
    wind_means: Optional[Sequence[float]] = None,
    wind_vars: Optional[Sequence[float]] = None,
    duration: float = DEFAULT_DURATION_S,
    base_seed: int = 0,
    include_gusts: bool = True,
) -> list:
    """The stock training campaign: a 19x11 (mean, variance) sweep.

    include_gusts appends nine square-wave gust scenarios (duty cycle x
    strength). Stationary wind alone cannot hold the margin near both rails
    long enough to produce high-variance windows, so without these the
    high-std band of the input plane would go unobserved during learning.
    """
    if wind_means is None:
        wind_means = [float(m) for m in range(0, 19)]
    if wind_vars is None:
        wind_vars = [float(v) for v in range(0, 44, 4)]
    scenarios = []
    i = 0
    for m in wind_means:
        for v in wind_vars:
            scenarios.append(
                WindScenario(
                    wind_mean=m, wind_var=v, duration=duration, seed=base_seed + i
                )
            )
            i += 1
    if include_gusts:
        period = 10.0
        cycles = int(duration // period)
        j = 0
        for duty in (0.3, 0.5, 0.7):
            for strength in (12.0, 16.0, 20.0):
                gusts = tuple(
                    (k * period, k * period + duty * period, strength)
                    for k in range(cycles)
                )
                scenarios.append(
                    WindScenario(
                        wind_mean=0.0,
                        wind_var=0.0,
                        duration=duration,
                        seed=base_seed + 100_000 + j,
                        gusts=gusts,
                    )
                )
                j += 1
    return scenarios


def write_dataset(pairs: Iterable[DataPair], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["margin_mean", "margin_std", "risk"])
        for p in pairs:
            writer.writerow([f"{p.margin_mean:.17g}", f"{p.margin_std:.17g}", f"{p.risk:.17g}"])


def read_dataset(path) -> list:
    pairs = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty dataset file")
        expected = ["margin_mean", "margin_std", "risk"]
        if [h.strip() for h in header] != expected:
            raise ParseError(f"{path}: expected header {','.join(expected)}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            try:
                values = [float(x) for x in row]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            try:
                pairs.append(DataPair(*values))
            except InputError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    if not pairs:
        raise ParseError(f"{path}: no data rows")
    return pairs
