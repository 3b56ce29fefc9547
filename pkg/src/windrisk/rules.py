"""Rule learning from labeled margin statistics and decision-map construction.

Rules are learned one per data pair: each value is assigned the label with
the highest membership, and the rule's confidence degree is the product of
the three winning memberships. Conflicting rules (same antecedents, different
consequent) are resolved by keeping the highest degree.

A learned rule set rarely covers the whole input plane, so the decision map
evaluates inference on a regular grid and fills uncovered cells by inverse
distance weighting over the nearest covered cells. The map doubles as the
runtime fast path: bilinear lookup instead of full inference per sample.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError, InputError, UncoveredInputError
from .fuzzy import (
    FuzzySet,
    InferenceEngine,
    LinguisticVariable,
    Variables,
    default_variables,
    fuzzify,
)

DEFAULT_GRID = 101
IDW_POWER = 2.0
IDW_NEIGHBORS = 8

# How equal-degree conflicts between rules are settled.
TIE_LOWER_RISK = "lower_risk"
TIE_HIGHER_RISK = "higher_risk"


@dataclass(frozen=True)
class DataPair:
    """One training sample: windowed margin statistics and the risk label."""

    margin_mean: float
    margin_std: float
    risk: float

    def __post_init__(self):
        for name in ("margin_mean", "margin_std", "risk"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Rule:
    """IF mean is A AND std is B THEN risk is C, with a confidence degree."""

    antecedent_mean: str
    antecedent_std: str
    consequent: str
    degree: float

    def __post_init__(self):
        if not (0.0 < self.degree <= 1.0):
            raise ConfigError(f"rule degree must be in (0, 1], got {self.degree!r}")


@dataclass(frozen=True)
class RuleSet:
    """Deduplicated rules plus the variables they are phrased in."""

    variables: Variables
    rules: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        seen = set()
        for r in self.rules:
            self.variables.mean.index(r.antecedent_mean)
            self.variables.std.index(r.antecedent_std)
            self.variables.risk.index(r.consequent)
            key = (r.antecedent_mean, r.antecedent_std)
            if key in seen:
                raise ConfigError(f"duplicate antecedents {key} in rule set")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.rules)

    def to_dict(self) -> dict:
        return {
            "variables": _variables_to_dict(self.variables),
            "rules": [
                {
                    "mean": r.antecedent_mean,
                    "std": r.antecedent_std,
                    "risk": r.consequent,
                    "degree": r.degree,
                }
                for r in self.rules
            ],
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RuleSet":
        try:
            variables = _variables_from_dict(data["variables"])
            rules = tuple(
                Rule(r["mean"], r["std"], r["risk"], float(r["degree"]))
                for r in data["rules"]
            )
            provenance = dict(data.get("provenance", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed rule set data: {exc}") from exc
        return cls(variables=variables, rules=rules, provenance=provenance)


def _variables_to_dict(variables: Variables) -> dict:
    def one(var: LinguisticVariable) -> dict:
        return {
            "name": var.name,
            "lo": var.lo,
            "hi": var.hi,
            "sets": [
                {"label": s.label, "corners": [s.a, s.b, s.c, s.d]} for s in var.sets
            ],
        }

    return {
        "mean": one(variables.mean),
        "std": one(variables.std),
        "risk": one(variables.risk),
    }


def _variables_from_dict(data: dict) -> Variables:
    def one(d: dict) -> LinguisticVariable:
        return LinguisticVariable(
            name=d["name"],
            lo=float(d["lo"]),
            hi=float(d["hi"]),
            sets=tuple(FuzzySet(s["label"], *map(float, s["corners"])) for s in d["sets"]),
        )

    return Variables(mean=one(data["mean"]), std=one(data["std"]), risk=one(data["risk"]))


def _best_label(var: LinguisticVariable, x: float) -> tuple:
    """Label with maximal membership; ties go to the lower-index set."""
    if x < var.lo - 1e-9 or x > var.hi + 1e-9:
        raise InputError(f"{var.name} value {x!r} outside [{var.lo}, {var.hi}]")
    best_label, best_deg = None, -1.0
    for label, deg in fuzzify(var, x):
        if deg > best_deg:
            best_label, best_deg = label, deg
    return best_label, best_deg


def learn_rule(pair: DataPair, variables: Optional[Variables] = None) -> Rule:
    """Turn one data pair into a rule with its confidence degree."""
    variables = variables or default_variables()
    mean_label, mean_deg = _best_label(variables.mean, pair.margin_mean)
    std_label, std_deg = _best_label(variables.std, pair.margin_std)
    risk_label, risk_deg = _best_label(variables.risk, pair.risk)
    return Rule(mean_label, std_label, risk_label, mean_deg * std_deg * risk_deg)


def dedupe(
    rules: Iterable[Rule],
    variables: Optional[Variables] = None,
    tie: str = TIE_LOWER_RISK,
    provenance: Optional[dict] = None,
) -> RuleSet:
    """Keep the highest-degree rule per antecedent pair.

    Equal degrees with different consequents fall back to the tie policy:
    by default the lower-risk consequent wins, so raising risk takes
    strictly stronger evidence.
    """
    variables = variables or default_variables()
    if tie not in (TIE_LOWER_RISK, TIE_HIGHER_RISK):
        raise ConfigError(f"unknown tie policy {tie!r}")
    best = {}
    for r in rules:
        key = (variables.mean.index(r.antecedent_mean), variables.std.index(r.antecedent_std))
        cur = best.get(key)
        if cur is None:
            best[key] = r
            continue
        if r.degree > cur.degree:
            best[key] = r
        elif r.degree == cur.degree and r.consequent != cur.consequent:
            r_idx = variables.risk.index(r.consequent)
            c_idx = variables.risk.index(cur.consequent)
            if (tie == TIE_LOWER_RISK) == (r_idx < c_idx):
                best[key] = r
    ordered = tuple(best[k] for k in sorted(best))
    return RuleSet(variables=variables, rules=ordered, provenance=dict(provenance or {}))


def learn_ruleset(
    pairs: Iterable[DataPair],
    variables: Optional[Variables] = None,
    tie: str = TIE_LOWER_RISK,
) -> RuleSet:
    """Full learning pass: one rule per pair, then conflict resolution."""
    variables = variables or default_variables()
    pairs = list(pairs)
    if not pairs:
        raise InputError("cannot learn from an empty dataset")
    learned = [learn_rule(p, variables) for p in pairs]
    provenance = {
        "pairs": len(pairs),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return dedupe(learned, variables, tie=tie, provenance=provenance)


@dataclass(frozen=True)
class DecisionMap:
    """Risk surface sampled on a regular (mean, std) grid.

    ``values[i, j]`` is the risk at mean index i, std index j; ``covered``
    marks cells whose value came from inference rather than interpolation.
    """

    mean_lo: float
    mean_hi: float
    std_lo: float
    std_hi: float
    values: np.ndarray
    covered: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        covered = np.asarray(self.covered, dtype=bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "covered", covered)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise ConfigError(f"map grid must be at least 2x2, got {values.shape}")
        if covered.shape != values.shape:
            raise ConfigError("coverage mask shape differs from value grid")
        if not (self.mean_lo < self.mean_hi and self.std_lo < self.std_hi):
            raise ConfigError("map bounds are empty")
        if not np.isfinite(values).all():
            raise ConfigError("map contains non-finite values")
        if values.min() < 0.0 or values.max() > 100.0:
            raise ConfigError("map values leave [0, 100]")

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def mean_axis(self) -> np.ndarray:
        return np.linspace(self.mean_lo, self.mean_hi, self.values.shape[0])

    def std_axis(self) -> np.ndarray:
        return np.linspace(self.std_lo, self.std_hi, self.values.shape[1])

    def lookup(self, mean: float, std: float) -> float:
        """Bilinear interpolation between the four surrounding cells."""
        if not (math.isfinite(mean) and math.isfinite(std)):
            raise InputError("lookup inputs must be finite")
        rows, cols = self.values.shape
        fx = (min(max(mean, self.mean_lo), self.mean_hi) - self.mean_lo) / (
            self.mean_hi - self.mean_lo
        ) * (rows - 1)
        fy = (min(max(std, self.std_lo), self.std_hi) - self.std_lo) / (
            self.std_hi - self.std_lo
        ) * (cols - 1)
        i0 = min(int(fx), rows - 2)
        j0 = min(int(fy), cols - 2)
        tx = fx - i0
        ty = fy - j0
        v = self.values
        return float(
            v[i0, j0] * (1 - tx) * (1 - ty)
            + v[i0 + 1, j0] * tx * (1 - ty)
            + v[i0, j0 + 1] * (1 - tx) * ty
            + v[i0 + 1, j0 + 1] * tx * ty
        )

    def to_dict(self) -> dict:
        return {
            "rows": self.values.shape[0],
            "cols": self.values.shape[1],
            "mean_bounds": [self.mean_lo, self.mean_hi],
            "std_bounds": [self.std_lo, self.std_hi],
            "values": [float(v) for v in self.values.ravel()],
            "covered": [int(c) for c in self.covered.ravel()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionMap":
        try:
            rows, cols = int(data["rows"]), int(data["cols"])
            values = np.array(data["values"], dtype=float).reshape(rows, cols)
            covered = np.array(data["covered"], dtype=bool).reshape(rows, cols)
            mean_lo, mean_hi = map(float, data["mean_bounds"])
            std_lo, std_hi = map(float, data["std_bounds"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed decision map data: {exc}") from exc
        return cls(mean_lo, mean_hi, std_lo, std_hi, values, covered)

    def write_csv(self, path) -> None:
        """Long-form dump (margin_mean, margin_std, risk, covered) for plotting."""
        mean_ax = self.mean_axis()
        std_ax = self.std_axis()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("margin_mean,margin_std,risk,covered\n")
            for i, m in enumerate(mean_ax):
                for j, s in enumerate(std_ax):
                    fh.write(
                        f"{m:.6f},{s:.6f},{self.values[i, j]:.6f},"
                        f"{int(self.covered[i, j])}\n"
                    )


def build_decision_map(
    ruleset: RuleSet,
    rows: int = DEFAULT_GRID,
    cols: int = DEFAULT_GRID,
    idw_power: float = IDW_POWER,
    idw_neighbors: int = IDW_NEIGHBORS,
) -> DecisionMap:
    """Sample inference on a grid and fill uncovered cells by IDW.

    Interpolated values are convex combinations of covered values, so the
    filled map never leaves the range the rules produce.
    """
    if rows < 2 or cols < 2:
        raise ConfigError("decision map grid must be at least 2x2")
    if idw_neighbors < 1 or idw_power <= 0:
        raise ConfigError("IDW needs at least one neighbor and positive power")
    engine = InferenceEngine(ruleset)
    mean_var, std_var = ruleset.variables.mean, ruleset.variables.std
    mean_ax = np.linspace(mean_var.lo, mean_var.hi, rows)
    std_ax = np.linspace(std_var.lo, std_var.hi, cols)
    values = np.zeros((rows, cols))
    covered = np.zeros((rows, cols), dtype=bool)
    for i, m in enumerate(mean_ax):
        for j, s in enumerate(std_ax):
            try:
                values[i, j] = engine.infer(m, s)
                covered[i, j] = True
            except UncoveredInputError:
                pass
    if not covered.any():
        raise ConfigError("rule set fires nowhere on the grid")
    if not covered.all():
        _idw_fill(values, covered, mean_ax, std_ax, idw_power, idw_neighbors)
    return DecisionMap(
        mean_lo=mean_var.lo,
        mean_hi=mean_var.hi,
        std_lo=std_var.lo,
        std_hi=std_var.hi,
        values=values,
        covered=covered,
    )


def _idw_fill(values, covered, mean_ax, std_ax, power, k) -> None:
    """Fill uncovered cells in place from the k nearest covered cells."""
    cov_i, cov_j = np.nonzero(covered)
    gap_i, gap_j = np.nonzero(~covered)
    cov_pts = np.column_stack([mean_ax[cov_i], std_ax[cov_j]])
    cov_vals = values[cov_i, cov_j]
    k = min(k, len(cov_vals))
    # Chunk the gap cells so the distance matrix stays small even when the
    # rule set covers almost nothing.
    chunk = 1024
    for start in range(0, len(gap_i), chunk):
        gi = gap_i[start : start + chunk]
        gj = gap_j[start : start + chunk]
        pts = np.column_stack([mean_ax[gi], std_ax[gj]])
        d2 = ((pts[:, None, :] - cov_pts[None, :, :]) ** 2).sum(axis=2)
        if k < len(cov_vals):
            nearest = np.argpartition(d2, k - 1, axis=1)[:, :k]
        else:
            nearest = np.broadcast_to(np.arange(len(cov_vals)), (len(gi), len(cov_vals)))
        nd2 = np.take_along_axis(d2, nearest, axis=1)
        w = 1.0 / np.power(nd2, power / 2.0)
        values[gi, gj] = (w * cov_vals[nearest]).sum(axis=1) / w.sum(axis=1)


def save_rules(ruleset: RuleSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ruleset.to_dict(), fh, indent=2)
        fh.write("\n")


def load_rules(path) -> RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON: {exc}") from exc
    return RuleSet.from_dict(data)


def save_map(decision_map: DecisionMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(decision_map.to_dict(), fh)
        fh.write("\n")


def load_map(path) -> DecisionMap:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON: {exc}") from exc
    return DecisionMap.from_dict(data)
