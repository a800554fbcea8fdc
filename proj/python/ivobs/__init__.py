"""Interval observers for linear impulsive systems under dwell-time constraints."""

from ._core import (
    DwellSpec,
    FormatError,
    GainRecoveryFailure,
    LpNumericalError,
    SimulationDiverged,
    System,
    __version__,
    certify_clock,
    certify_spectral,
    check_positivity,
    gen_dwell,
    iss_bound,
    lift_sampled_data,
    lift_switched,
    main,
    observer_gain,
    simulate_observer,
    simulate_plant,
    switched_jump_index,
    synthesize,
    transition_matrix,
)

__all__ = [
    "DwellSpec",
    "FormatError",
    "GainRecoveryFailure",
    "LpNumericalError",
    "SimulationDiverged",
    "System",
    "__version__",
    "certify_clock",
    "certify_spectral",
    "check_positivity",
    "gen_dwell",
    "iss_bound",
    "lift_sampled_data",
    "lift_switched",
    "main",
    "observer_gain",
    "simulate_observer",
    "simulate_plant",
    "switched_jump_index",
    "synthesize",
    "transition_matrix",
]
