"""Flight-log ingestion and the streaming risk estimation pipeline.

The pipeline is a fold over frames: each frame's margin enters a sliding
window, and on every emission step the window statistics are turned into an
instantaneous risk (rule inference, falling back to decision-map lookup for
inputs no rule covers) which the accumulator integrates. Feeding a log
frame-by-frame or as one batch produces identical records, and no step does
work proportional to the log length.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .accumulator import AccumulatorParams, RiskState, accumulate_step
from .errors import ConfigError, InputError, ParseError, UncoveredInputError
from .fuzzy import InferenceEngine
from .margin import (
    Attitude,
    DEFAULT_LIMITS,
    DEFAULT_WINDOW_S,
    MarginWindow,
    MotorFrame,
    SaturationLimits,
    frame_margin,
)
from .rules import DecisionMap, RuleSet

RECORD_HEADER = ("t", "margin_mean", "margin_std", "risk_inst", "p_high", "p_low", "risk_acc")

SOURCE_RULES = "rules"
SOURCE_MAP = "map"
SOURCE_HELD = "held"

_MOTOR_COL = re.compile(r"^m(\d+)$")
_ATTITUDE_COLS = ("roll_des", "roll", "pitch_des", "pitch")


@dataclass(frozen=True)
class RiskRecord:
    """One emitted estimation step.

    source records where risk_inst came from: rule inference, decision-map
    lookup on an uncovered input, or held at the previous value when no map
    was available either.
    """

    t: float
    margin_mean: float
    margin_std: float
    risk_inst: float
    p_high: float
    p_low: float
    risk_acc: float
    source: str = SOURCE_RULES

    def __post_init__(self):
        for name in ("risk_inst", "risk_acc"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 100.0):
                raise InputError(f"{name} must be in [0, 100], got {v!r}")
        for name in ("p_high", "p_low"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InputError(f"{name} must be in [0, 1], got {v!r}")
        if self.source not in (SOURCE_RULES, SOURCE_MAP, SOURCE_HELD):
            raise InputError(f"unknown record source {self.source!r}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the estimator needs besides the frames themselves.

    At least one of rules / decision_map must be present; with both, the map
    serves as the fallback for inputs outside rule coverage.
    """

    rules: Optional[RuleSet] = None
    decision_map: Optional[DecisionMap] = None
    limits: SaturationLimits = DEFAULT_LIMITS
    window_s: float = DEFAULT_WINDOW_S
    accumulator: AccumulatorParams = field(default_factory=AccumulatorParams)
    emit_rate: Optional[float] = None

    def __post_init__(self):
        if self.rules is None and self.decision_map is None:
            raise ConfigError("need a rule set, a decision map, or both")
        if not (math.isfinite(self.window_s) and self.window_s > 0):
            raise ConfigError(f"window must be positive, got {self.window_s!r}")
        if self.emit_rate is not None and not (
            math.isfinite(self.emit_rate) and self.emit_rate > 0
        ):
            raise ConfigError(f"emit rate must be positive, got {self.emit_rate!r}")


class RiskEstimator:
    """Streaming estimator: push frames, collect records.

    step() returns one RiskRecord per emission (None for frames swallowed
    between emission ticks when an emit rate is set; by default every frame
    emits).
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._engine = InferenceEngine(config.rules) if config.rules else None
        self._window = MarginWindow(window=config.window_s)
        self._state = RiskState(params=config.accumulator)
        self._next_emit: Optional[float] = None
        self._last_risk: Optional[float] = None

    def _instant_risk(self, mean: float, std: float) -> tuple:
        if self._engine is not None:
            try:
                return self._engine.infer(mean, std), SOURCE_RULES
            except UncoveredInputError:
                if self.config.decision_map is not None:
                    return self.config.decision_map.lookup(mean, std), SOURCE_MAP
                return (self._last_risk if self._last_risk is not None else 0.0), SOURCE_HELD
        return self.config.decision_map.lookup(mean, std), SOURCE_MAP

    def step(self, frame: MotorFrame) -> Optional[RiskRecord]:
        self._window.push(frame.t, frame_margin(frame, self.config.limits))
        if self._next_emit is None:
            self._next_emit = frame.t
        if self.config.emit_rate is not None:
            if frame.t < self._next_emit - 1e-12:
                return None
            interval = 1.0 / self.config.emit_rate
            self._next_emit += interval
            while self._next_emit <= frame.t:
                self._next_emit += interval
        stats = self._window.stats()
        risk_inst, source = self._instant_risk(stats.mean, stats.std)
        self._state = accumulate_step(self._state, risk_inst)
        self._last_risk = risk_inst
        return RiskRecord(
            t=frame.t,
            margin_mean=stats.mean,
            margin_std=stats.std,
            risk_inst=risk_inst,
            p_high=self._state.p_high,
            p_low=self._state.p_low,
            risk_acc=self._state.r_acc,
            source=source,
        )


def run_pipeline(config: PipelineConfig, frames: Iterable[MotorFrame]) -> list:
    """Run the whole log through a fresh estimator."""
    estimator = RiskEstimator(config)
    records = []
    n = 0
    for frame in frames:
        n += 1
        rec = estimator.step(frame)
        if rec is not None:
            records.append(rec)
    if n == 0:
        raise InputError("empty flight log")
    return records


def parse_log(path) -> list:
    """Read a flight-log CSV into MotorFrame objects.

    Header must contain t and m1..mN (motor count inferred); the four
    attitude columns are optional but all-or-none. Time must be strictly
    increasing.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        cols = [h.strip() for h in header]
        if len(set(cols)) != len(cols):
            raise ParseError(f"{path}: duplicate columns in header", line=1)
        index = {name: i for i, name in enumerate(cols)}
        if "t" not in index:
            raise ParseError(f"{path}: missing required column 't'", line=1)
        motor_nums = sorted(int(m.group(1)) for c in cols if (m := _MOTOR_COL.match(c)))
        if not motor_nums:
            raise ParseError(f"{path}: missing motor columns 'm1'..'mN'", line=1)
        if motor_nums != list(range(1, len(motor_nums) + 1)):
            present = set(motor_nums)
            missing = next(i for i in range(1, len(motor_nums) + 1) if i not in present)
            raise ParseError(f"{path}: missing motor column 'm{missing}'", line=1)
        motor_idx = [index[f"m{i}"] for i in motor_nums]
        att_present = [c for c in _ATTITUDE_COLS if c in index]
        if att_present and len(att_present) != len(_ATTITUDE_COLS):
            missing = sorted(set(_ATTITUDE_COLS) - set(att_present))
            raise ParseError(
                f"{path}: incomplete attitude columns, missing {', '.join(missing)}", line=1
            )
        att_idx = [index[c] for c in _ATTITUDE_COLS] if att_present else None

        frames = []
        prev_t = None
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(cols):
                raise ParseError(
                    f"expected {len(cols)} fields, got {len(row)}", line=lineno
                )
            try:
                t = float(row[index["t"]])
                commands = tuple(float(row[i]) for i in motor_idx)
                attitude = (
                    Attitude(*(float(row[i]) for i in att_idx)) if att_idx else None
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            if prev_t is not None and t <= prev_t:
                raise ParseError(
                    f"time not increasing: {t!r} after {prev_t!r}", line=lineno
                )
            prev_t = t
            try:
                frames.append(MotorFrame(t=t, commands=commands, attitude=attitude))
            except InputError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    if not frames:
        raise ParseError(f"{path}: no data rows")
    return frames


def write_log(frames: Sequence[MotorFrame], path) -> None:
    """Inverse of parse_log; attitude columns appear when every frame has one."""
    if not frames:
        raise InputError("refusing to write an empty log")
    n_motors = len(frames[0].commands)
    with_attitude = all(f.attitude is not None for f in frames)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t"] + [f"m{i}" for i in range(1, n_motors + 1)]
        if with_attitude:
            header += list(_ATTITUDE_COLS)
        writer.writerow(header)
        for f in frames:
            row = [f"{f.t:.17g}"] + [f"{c:.17g}" for c in f.commands]
            if with_attitude:
                a = f.attitude
                row += [
                    f"{a.roll_des:.17g}",
                    f"{a.roll:.17g}",
                    f"{a.pitch_des:.17g}",
                    f"{a.pitch:.17g}",
                ]
            writer.writerow(row)


def write_records(records: Sequence[RiskRecord], path, include_source: bool = False) -> None:
    """Write estimation output CSV (seven fixed columns, plot-ready).

    include_source appends the risk_inst provenance as an extra column for
    debugging; the default schema stays fixed.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = list(RECORD_HEADER) + (["source"] if include_source else [])
        writer.writerow(header)
        for r in records:
            row = [
                f"{r.t:.17g}",
                f"{r.margin_mean:.17g}",
                f"{r.margin_std:.17g}",
                f"{r.risk_inst:.17g}",
                f"{r.p_high:.17g}",
                f"{r.p_low:.17g}",
                f"{r.risk_acc:.17g}",
            ]
            if include_source:
                row.append(r.source)
            writer.writerow(row)
