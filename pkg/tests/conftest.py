"""Shared fixtures and the acceptance-criteria terminal summary."""

import pytest

from windrisk.fuzzy import Variables, default_variables
from windrisk.rules import Rule, RuleSet, build_decision_map, learn_ruleset
from windrisk.synthdata import DroneParams, gen_dataset, scenario_grid

# nodeid fragment -> (criterion number, short description), filled by
# tests/test_acceptance.py at import time.
ACCEPTANCE_REGISTRY = {}
_acceptance_outcomes = {}


@pytest.fixture(scope="session")
def variables() -> Variables:
    return default_variables()


@pytest.fixture(scope="session")
def reference_ruleset(variables) -> RuleSet:
    """The ten-rule reference set used for map regression tests."""
    return RuleSet(
        variables,
        (
            Rule("VERY_LOW", "MEDIUM", "VERY_HIGH", 0.35),
            Rule("VERY_LOW", "HIGH", "VERY_HIGH", 1.0),
            Rule("LOW", "MEDIUM", "MEDIUM", 0.64),
            Rule("LOW", "HIGH", "VERY_HIGH", 0.84),
            Rule("MEDIUM", "LOW", "VERY_LOW", 0.41),
            Rule("MEDIUM", "MEDIUM", "LOW", 0.73),
            Rule("MEDIUM", "HIGH", "VERY_LOW", 0.63),
            Rule("HIGH", "LOW", "VERY_LOW", 0.88),
            Rule("HIGH", "MEDIUM", "VERY_LOW", 0.76),
            Rule("HIGH", "HIGH", "VERY_LOW", 0.23),
        ),
    )


@pytest.fixture(scope="session")
def full_ruleset(variables, reference_ruleset) -> RuleSet:
    """All twelve antecedent cells covered: no interpolation anywhere."""
    return RuleSet(
        variables,
        reference_ruleset.rules
        + (
            Rule("VERY_LOW", "LOW", "VERY_HIGH", 0.9),
            Rule("LOW", "LOW", "LOW", 0.5),
        ),
    )


@pytest.fixture(scope="session")
def drone() -> DroneParams:
    return DroneParams()


@pytest.fixture(scope="session")
def learned(drone):
    """Dataset, rule set, and decision map from the stock campaign (seed 0)."""
    pairs = gen_dataset(scenario_grid(base_seed=0), drone)
    ruleset = learn_ruleset(pairs)
    dmap = build_decision_map(ruleset)
    return pairs, ruleset, dmap


def pytest_runtest_logreport(report):
    # setup failures (broken fixtures) must surface as FAIL too, but a
    # passed setup must not shadow the call outcome
    if report.when == "setup" and not report.failed:
        return
    if report.when == "teardown":
        return
    for fragment, (num, desc) in ACCEPTANCE_REGISTRY.items():
        if fragment in report.nodeid:
            _acceptance_outcomes[num] = (desc, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance_outcomes):
        desc, outcome = _acceptance_outcomes[num]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{word}  criterion {num:2d}: {desc}")
