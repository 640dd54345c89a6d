"""Optimal GNSS spoofing attacks, divergence bounds and detector DET curves."""

from .attack import (
    AttackPolicy,
    FeasibilityReport,
    LimitingScenario,
    OptimalSpoofer,
    limiting_scenario_classify,
    optimal_attack,
    random_class_c_policy,
    sample_attack,
    synthesize_optimal,
)
from .channel import DelayChannel, build_delay_channel, channels_for, kernel_condition
from .detect import (
    DetCurve,
    Detector,
    GLRTDetector,
    LRTDetector,
    det_from_statistics,
    estimate_det,
    glrt_statistic,
    lrt_statistic,
    simulate_statistics,
    wilson_interval,
)
from .divergence import (
    DivergenceReport,
    GaussianJointModel,
    bound_curve,
    d_min_decomposition,
    h_function,
    kl_closed_form,
    kl_monte_carlo,
    policy_divergence,
    symmetry_check,
)
from .scenario import (
    PositionSpec,
    Scenario,
    ScenarioError,
    Signaling,
    delays_from_positions,
    dump_scenario,
    load_scenario,
    snr_db_to_variance,
)
from .signaling import Stream, Word, draw_noise, draw_word, draw_words, substream

__version__ = "0.1.0"

__all__ = [
    "AttackPolicy",
    "DelayChannel",
    "DetCurve",
    "Detector",
    "DivergenceReport",
    "FeasibilityReport",
    "GLRTDetector",
    "GaussianJointModel",
    "LRTDetector",
    "LimitingScenario",
    "OptimalSpoofer",
    "PositionSpec",
    "Scenario",
    "ScenarioError",
    "Signaling",
    "Stream",
    "Word",
    "bound_curve",
    "build_delay_channel",
    "channels_for",
    "d_min_decomposition",
    "delays_from_positions",
    "det_from_statistics",
    "draw_noise",
    "draw_word",
    "draw_words",
    "dump_scenario",
    "estimate_det",
    "glrt_statistic",
    "h_function",
    "kernel_condition",
    "kl_closed_form",
    "kl_monte_carlo",
    "limiting_scenario_classify",
    "load_scenario",
    "lrt_statistic",
    "optimal_attack",
    "policy_divergence",
    "random_class_c_policy",
    "sample_attack",
    "simulate_statistics",
    "snr_db_to_variance",
    "substream",
    "symmetry_check",
    "synthesize_optimal",
    "wilson_interval",
]
