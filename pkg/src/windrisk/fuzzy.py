"""Trapezoidal membership functions, fuzzification, and Mamdani inference.

The estimator uses three linguistic variables: margin mean and margin std over
[0, 0.5] as inputs, risk percentage over [0, 100] as output. All three are
laid out as partitions of unity, so at any crisp value the memberships across
a variable's sets sum to one and at most two sets are active.

Inference is product-product-max: rule firing strength is the product of the
two antecedent memberships, each consequent set is scaled by its strength,
scaled sets are aggregated by max, and the result is defuzzified by discrete
centroid over a fixed sampling of the output universe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, InputError, UncoveredInputError

OUTPUT_SAMPLES = 201
FIRING_EPS = 1e-9


@dataclass(frozen=True)
class FuzzySet:
    """One labeled trapezoid with corners a <= b <= c <= d.

    Triangles have b == c; edge shoulders pin a == b or c == d at a universe
    bound, giving a plateau that extends to the edge.
    """

    label: str
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        corners = (self.a, self.b, self.c, self.d)
        if any(not math.isfinite(v) for v in corners):
            raise ConfigError(f"{self.label}: corners must be finite")
        if not (self.a <= self.b <= self.c <= self.d):
            raise ConfigError(f"{self.label}: corners must be ordered, got {corners}")


def membership(fset: FuzzySet, x: float) -> float:
    """Piecewise-linear trapezoid evaluation; exact 0/1 at corners."""
    if not math.isfinite(x):
        raise InputError(f"non-finite membership argument {x!r}")
    if x < fset.a or x > fset.d:
        return 0.0
    if fset.b <= x <= fset.c:
        return 1.0
    if x < fset.b:
        return (x - fset.a) / (fset.b - fset.a)
    return (fset.d - x) / (fset.d - fset.c)


@dataclass(frozen=True)
class LinguisticVariable:
    """An ordered family of fuzzy sets over a bounded universe of discourse."""

    name: str
    lo: float
    hi: float
    sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if self.lo >= self.hi:
            raise ConfigError(f"{self.name}: empty universe [{self.lo}, {self.hi}]")
        if not self.sets:
            raise ConfigError(f"{self.name}: needs at least one set")
        labels = [s.label for s in self.sets]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"{self.name}: duplicate set labels")
        for s in self.sets:
            if s.a < self.lo or s.d > self.hi:
                raise ConfigError(
                    f"{self.name}/{s.label}: corners leave universe [{self.lo}, {self.hi}]"
                )

    def labels(self) -> tuple:
        return tuple(s.label for s in self.sets)

    def index(self, label: str) -> int:
        for i, s in enumerate(self.sets):
            if s.label == label:
                return i
        raise KeyError(f"{self.name}: unknown label {label!r}")

    def set(self, label: str) -> FuzzySet:
        return self.sets[self.index(label)]

    def clamp(self, x: float) -> float:
        if not math.isfinite(x):
            raise InputError(f"non-finite input for {self.name}: {x!r}")
        return min(max(x, self.lo), self.hi)

    def membership(self, label: str, x: float) -> float:
        return membership(self.set(label), self.clamp(x))


@dataclass(frozen=True)
class Variables:
    """The estimator's variable triple: two inputs and the risk output."""

    mean: LinguisticVariable
    std: LinguisticVariable
    risk: LinguisticVariable


def default_variables() -> Variables:
    """The stock membership layout for margin mean, margin std, and risk."""
    mean = LinguisticVariable(
        name="margin_mean",
        lo=0.0,
        hi=0.5,
        sets=(
            FuzzySet("VERY_LOW", 0.0, 0.0, 0.0, 0.1),
            FuzzySet("LOW", 0.0, 0.1, 0.1, 0.2),
            FuzzySet("MEDIUM", 0.1, 0.2, 0.2, 0.3),
            FuzzySet("HIGH", 0.2, 0.3, 0.5, 0.5),
        ),
    )
    std = LinguisticVariable(
        name="margin_std",
        lo=0.0,
        hi=0.5,
        sets=(
            FuzzySet("LOW", 0.0, 0.0, 0.0, 0.1),
            FuzzySet("MEDIUM", 0.0, 0.1, 0.1, 0.2),
            FuzzySet("HIGH", 0.1, 0.2, 0.5, 0.5),
        ),
    )
    risk = LinguisticVariable(
        name="risk",
        lo=0.0,
        hi=100.0,
        sets=(
            FuzzySet("VERY_LOW", 0.0, 0.0, 0.0, 25.0),
            FuzzySet("LOW", 0.0, 25.0, 25.0, 50.0),
            FuzzySet("MEDIUM", 25.0, 50.0, 50.0, 75.0),
            FuzzySet("HIGH", 50.0, 75.0, 75.0, 100.0),
            FuzzySet("VERY_HIGH", 75.0, 100.0, 100.0, 100.0),
        ),
    )
    return Variables(mean=mean, std=std, risk=risk)


def fuzzify(var: LinguisticVariable, x: float) -> list:
    """Degrees of every set of ``var`` at x, as (label, degree) pairs."""
    xc = var.clamp(x)
    return [(s.label, membership(s, xc)) for s in var.sets]


def defuzzify(xs: Sequence[float], mu: Sequence[float]) -> float:
    """Discrete centroid of a sampled membership curve."""
    xs = np.asarray(xs, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if xs.size < 2 or xs.size != mu.size:
        raise InputError("defuzzify needs at least two matching samples")
    total = float(mu.sum())
    if total <= 0.0:
        raise UncoveredInputError("aggregated output curve is identically zero")
    return float((xs * mu).sum() / total)


class InferenceEngine:
    """Precompiled Mamdani evaluator for one rule set.

    Accepts any rule container exposing ``variables`` (a Variables triple) and
    ``rules`` (an iterable with antecedent_mean / antecedent_std / consequent
    labels). Rule confidence degrees are deliberately ignored here; they only
    matter while learning.
    """

    def __init__(self, ruleset, samples: int = OUTPUT_SAMPLES):
        if samples < 2:
            raise ConfigError("need at least two output samples")
        self.variables = ruleset.variables
        rules = list(ruleset.rules)
        if not rules:
            raise ConfigError("rule set is empty")
        risk = self.variables.risk
        self.xs = np.linspace(risk.lo, risk.hi, samples)
        curves = {
            s.label: np.array([membership(s, x) for x in self.xs])
            for s in risk.sets
        }
        self._compiled = [
            (r.antecedent_mean, r.antecedent_std, curves[r.consequent])
            for r in rules
        ]

    def memberships(self, mean: float, std: float) -> tuple:
        mean_m = dict(fuzzify(self.variables.mean, mean))
        std_m = dict(fuzzify(self.variables.std, std))
        return mean_m, std_m

    def infer(self, mean: float, std: float) -> float:
        """Crisp risk percentage, or UncoveredInputError if no rule fires."""
        mean_m, std_m = self.memberships(mean, std)
        aggregate = np.zeros_like(self.xs)
        fired = False
        for ant_mean, ant_std, curve in self._compiled:
            strength = mean_m[ant_mean] * std_m[ant_std]
            if strength > FIRING_EPS:
                fired = True
                np.maximum(aggregate, strength * curve, out=aggregate)
        if not fired:
            raise UncoveredInputError(
                f"no rule fires at (mean={mean:.6g}, std={std:.6g})"
            )
        return defuzzify(self.xs, aggregate)


def infer(rules, mean: float, std: float, samples: int = OUTPUT_SAMPLES) -> float:
    """One-shot inference; build an InferenceEngine for repeated calls."""
    return InferenceEngine(rules, samples=samples).infer(mean, std)
