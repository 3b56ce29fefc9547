"""Streaming external-disturbance risk estimation for multirotors.

The package turns motor-command logs into a real-time risk index: motor
saturation margins feed a learned fuzzy inference system whose output an
accumulator integrates into a smoothed 0-100% risk signal.
"""

from .accumulator import (
    AccumulatorParams,
    RiskState,
    accumulate_step,
    erf,
    normal_cdf,
    tail_probabilities,
)
from .errors import (
    ConfigError,
    InputError,
    InsufficientDataError,
    ParseError,
    UncoveredInputError,
    WindriskError,
)
from .fuzzy import (
    FuzzySet,
    InferenceEngine,
    LinguisticVariable,
    Variables,
    default_variables,
    defuzzify,
    fuzzify,
    infer,
    membership,
)
from .margin import (
    Attitude,
    MarginStats,
    MarginWindow,
    MotorFrame,
    NormalizationMode,
    SaturationLimits,
    attitude_rmse,
    frame_margin,
    motor_margin,
    normalize_command,
    window_stats,
)
from .pipeline import (
    PipelineConfig,
    RiskEstimator,
    RiskRecord,
    parse_log,
    run_pipeline,
    write_log,
    write_records,
)
from .rules import (
    DataPair,
    DecisionMap,
    Rule,
    RuleSet,
    build_decision_map,
    dedupe,
    learn_rule,
    learn_ruleset,
    load_map,
    load_rules,
    save_map,
    save_rules,
)
from .synthdata import (
    DroneParams,
    WindScenario,
    flight_pair,
    gen_dataset,
    read_dataset,
    risk_from_rmse,
    scenario_grid,
    simulate_flight,
    write_dataset,
)

__version__ = "0.1.0"
