"""Deterministic simulator and analysis toolkit for a cable-driven,
purely mechanical torso stabiliser.

The package models the device's three behaviours (transparent tracking,
centrifugal-magnetic lock transition, compliant nonlinear-spring
blocking), the cable kinematics pipeline that drives it, and the
inverse design problem of placing the lock threshold.

Modules
-------
motion
    Trajectories, anchor geometry, synthetic lean/fall generators,
    trajectory and cable CSV I/O.
signal
    Savitzky-Golay smoothing, differentiation, threshold and
    fall-signature detection.
device
    Mechanism constants and the fixed-step lock/reset state machine.
tuning
    Closed-form inverse design, scenario suites, parameter sweeps.
cli / config
    Command-line pipeline driver and its TOML run configuration.
"""

from .device import (
    DeviceMode,
    DeviceParams,
    DeviceState,
    ModeChange,
    ModeChangeKind,
    SimulationTrace,
    StepInput,
    blocking_force,
    cable_tension,
    capstan_omega,
    lock_condition,
    simulate,
    step,
    threshold_velocity,
    transparent_tension,
    write_device_events,
    write_trace,
)
from .errors import (
    ExtensionOutOfRange,
    InfeasibleTarget,
    InvalidDt,
    InvalidProfile,
    InvalidSpec,
    MissingColumn,
    NonFiniteInput,
    NonMonotonicTime,
    NonPositiveRadius,
    NonUniformSampling,
    SeriesTooShort,
    StateInvariantViolation,
    TooFewSamples,
    TorsolockError,
)
from .motion import (
    CANONICAL_RATE_HZ,
    AnchorConfig,
    CableSeries,
    FallProfile,
    LeanProfile,
    Trajectory,
    cable_length,
    gen_fall,
    gen_lean,
    load_trajectory,
    radial_direction,
    trajectory_to_cable,
    write_cable_series,
    write_trajectory,
)
from .signal import (
    DetectionEvent,
    DetectorMode,
    DetectorSpec,
    EventKind,
    SgSpec,
    detect,
    differentiate,
    first_lock_time,
    sg_filter,
    write_events,
)
from .tuning import (
    PipelineResult,
    Scenario,
    ScenarioReport,
    SuiteSummary,
    SweepRow,
    TuneTarget,
    default_suite,
    evaluate_scenario,
    evaluate_suite,
    run_pipeline,
    solve_retention,
    sweep,
    write_sweep,
)

__version__ = "0.1.0"
