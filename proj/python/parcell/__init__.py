"""Parallel Li-ion cell pack: plant simulation, observability analysis and state observer."""

from ._parcell import (
    CellParams,
    DriveCycle,
    GainValidityReport,
    ObservabilityReport,
    ObserverGain,
    OcvCurve,
    PackModel,
    ParcellError,
    analyze_observability,
    lie_observability_matrix,
    load_pack_config,
    load_scenario_and_run,
    rest_state,
    run_observer,
    simulate,
    synth_udds_like,
    validate_gain,
)

__all__ = [
    "CellParams",
    "DriveCycle",
    "GainValidityReport",
    "ObservabilityReport",
    "ObserverGain",
    "OcvCurve",
    "PackModel",
    "ParcellError",
    "analyze_observability",
    "lie_observability_matrix",
    "load_pack_config",
    "load_scenario_and_run",
    "rest_state",
    "run_observer",
    "simulate",
    "synth_udds_like",
    "validate_gain",
]
