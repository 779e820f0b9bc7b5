"""Inverse design and scenario-based evaluation.

`solve_retention()` inverts the lock-threshold formula in closed form:
pick the magnet retention (or flyweight mass or radius) that makes the
mechanism lock at a requested cable velocity. `evaluate_suite()` runs
the full motion -> signal -> device pipeline over labelled trajectories
and counts false positives (locks during daily-living motion) and
misses (falls that did not lock). `sweep()` repeats that over a
parameter grid in a deterministic row order.

Suite verdicts come from the configurable detector so that threshold
and fall-signature triggering can be compared on equal footing; when
the detector is a plain velocity threshold and mechanism parameters are
being swept, the threshold tracks the mechanism (see `sweep`). Counts
are exact, no statistical smoothing: suites are small and deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from statistics import median

import numpy as np

from . import signal as sig
from .device import DeviceParams, ModeChange, SimulationTrace, simulate, threshold_velocity
from .errors import InfeasibleTarget, InvalidSpec
from .motion import (
    AnchorConfig,
    CableSeries,
    FallProfile,
    LeanProfile,
    Trajectory,
    gen_fall,
    gen_lean,
    radial_direction,
    trajectory_to_cable,
)

SWEEP_HEADER = ["grid_point", "fp_rate", "miss_rate", "median_latency_s", "v_star_mps"]

_FREE_PARAMS = ("F_retain", "m_fly", "r_fly")
_MECH_AXES = frozenset(_FREE_PARAMS)
_SWEEP_AXES = _MECH_AXES | {"window", "v_lock"}


@dataclass(frozen=True)
class TuneTarget:
    """Inverse-design target: reach threshold velocity `v_star` (m/s) by
    solving for one `free` parameter, one of ``F_retain``, ``m_fly`` or
    ``r_fly``. All other mechanism constants are held fixed at the
    values of the DeviceParams passed to `solve_retention`."""

    v_star: float
    free: str = "F_retain"

    def __post_init__(self):
        if self.free not in _FREE_PARAMS:
            raise InvalidSpec(f"free must be one of {_FREE_PARAMS}, got {self.free!r}")
        if not (np.isfinite(self.v_star) and self.v_star > 0):
            raise InfeasibleTarget(f"target velocity must be > 0, got {self.v_star}")


def solve_retention(target: TuneTarget, p: DeviceParams) -> DeviceParams:
    """Solve for the free parameter that puts the lock threshold at
    ``target.v_star``.

    The quasi-static lock model admits an exact inverse of
    ``v* = r_capstan * sqrt(F_retain / (m_fly * r_fly))``; no iteration
    is needed. The round trip ``threshold_velocity(solve_retention(v*))``
    reproduces v* to within a few ULPs.

    Raises
    ------
    InfeasibleTarget
        If the solved value is not strictly positive and finite.
    """
    omega_star = target.v_star / p.r_capstan
    if target.free == "F_retain":
        value = p.m_fly * p.r_fly * omega_star**2
    elif target.free == "m_fly":
        value = p.F_retain / (p.r_fly * omega_star**2)
    else:
        value = p.F_retain / (p.m_fly * omega_star**2)
    if not (np.isfinite(value) and value > 0):
        raise InfeasibleTarget(f"solved {target.free} = {value} is not a valid parameter")
    return replace(p, **{target.free: value})


@dataclass(frozen=True)
class Scenario:
    """A labelled trajectory for suite evaluation.

    `is_fall` is the ground-truth label; `onset` is the true fall onset
    in seconds from the trajectory start (generator metadata, used for
    latency), None for daily-living scenarios.
    """

    scenario_id: str
    trajectory: Trajectory
    is_fall: bool
    onset: float | None = None


@dataclass(frozen=True)
class ScenarioReport:
    """Outcome of one scenario run.

    `false_positive` and `miss` are mutually exclusive with the correct
    outcomes: a lock on a daily-living scenario is a false positive, an
    absent lock on a fall is a miss.
    """

    scenario_id: str
    locked: bool
    lock_time: float | None
    max_payout: float
    false_positive: bool
    miss: bool


@dataclass(frozen=True)
class SuiteSummary:
    """Exact counts over a suite.

    Rates are None when undefined: `false_positive_rate` needs at least
    one daily-living scenario, `miss_rate` at least one fall, and
    `median_lock_latency_s` at least one fall that locked and carries an
    onset.
    """

    n_scenarios: int
    n_adl: int
    n_falls: int
    false_positive_rate: float | None
    miss_rate: float | None
    median_lock_latency_s: float | None


@dataclass(frozen=True)
class PipelineResult:
    """Intermediate and final products of one motion -> signal -> device run."""

    cable: CableSeries
    length_filtered: np.ndarray
    velocity: np.ndarray
    trace: SimulationTrace
    device_events: list[ModeChange]
    sample_rate: float


def run_pipeline(
    traj: Trajectory,
    anchor: AnchorConfig,
    params: DeviceParams,
    sg: sig.SgSpec = sig.SgSpec(),
) -> PipelineResult:
    """Run the canonical pipeline: geometry, Savitzky-Golay smoothing of
    the cable length, differentiation, then the device simulation driven
    by the smoothed velocity."""
    cable = trajectory_to_cable(traj, anchor)
    length_f = sig.sg_filter(cable.length, sg)
    velocity = sig.differentiate(length_f, traj.sample_rate)
    trace, events = simulate(velocity, params, sample_rate=traj.sample_rate)
    return PipelineResult(
        cable=cable,
        length_filtered=length_f,
        velocity=velocity,
        trace=trace,
        device_events=events,
        sample_rate=traj.sample_rate,
    )


def evaluate_scenario(
    scenario: Scenario,
    params: DeviceParams,
    detector: sig.DetectorSpec,
    anchor: AnchorConfig,
    sg: sig.SgSpec = sig.SgSpec(),
) -> ScenarioReport:
    """Run one scenario and classify the outcome against its label."""
    res = run_pipeline(scenario.trajectory, anchor, params, sg)
    events = sig.detect(res.velocity, res.sample_rate, detector)
    lock_time = sig.first_lock_time(events)
    locked = lock_time is not None
    return ScenarioReport(
        scenario_id=scenario.scenario_id,
        locked=locked,
        lock_time=lock_time,
        max_payout=float(res.trace.length_m.max()),
        false_positive=locked and not scenario.is_fall,
        miss=(not locked) and scenario.is_fall,
    )


def evaluate_suite(
    scenarios,
    params: DeviceParams,
    detector: sig.DetectorSpec,
    anchor: AnchorConfig,
    sg: sig.SgSpec = sig.SgSpec(),
) -> tuple[list[ScenarioReport], SuiteSummary]:
    """Evaluate every scenario and summarise.

    Scenario evaluations are independent of each other; reports are
    returned in input order regardless of how they are computed.

    Returns
    -------
    (list of ScenarioReport, SuiteSummary)
    """
    reports = [evaluate_scenario(s, params, detector, anchor, sg) for s in scenarios]

    n = len(reports)
    n_falls = sum(1 for s in scenarios if s.is_fall)
    n_adl = n - n_falls
    n_fp = sum(1 for r in reports if r.false_positive)
    n_miss = sum(1 for r in reports if r.miss)
    latencies = [
        r.lock_time - s.onset
        for s, r in zip(scenarios, reports)
        if s.is_fall and r.locked and s.onset is not None
    ]
    summary = SuiteSummary(
        n_scenarios=n,
        n_adl=n_adl,
        n_falls=n_falls,
        false_positive_rate=(n_fp / n_adl) if n_adl else None,
        miss_rate=(n_miss / n_falls) if n_falls else None,
        median_lock_latency_s=median(latencies) if latencies else None,
    )
    return reports, summary


@dataclass(frozen=True)
class SweepRow:
    """One grid point: the swept values, the suite summary at that point
    and the mechanism threshold velocity there."""

    point: dict
    summary: SuiteSummary
    v_star: float


def sweep(
    grid,
    scenarios,
    params: DeviceParams,
    detector: sig.DetectorSpec,
    anchor: AnchorConfig,
    sg: sig.SgSpec = sig.SgSpec(),
) -> list[SweepRow]:
    """Evaluate the suite over a parameter grid.

    `grid` maps axis names to value sequences; axes may be the mechanism
    parameters ``F_retain``, ``m_fly``, ``r_fly``, the filter ``window``
    (odd ints) and the detector ``v_lock``. Rows are ordered
    lexicographically over the alphabetically sorted axis names, so the
    output is invariant under reordering of the grid mapping.

    When a mechanism axis is swept, a velocity-threshold detector tracks
    the mechanism: its v_lock is set to the row's threshold velocity
    unless ``v_lock`` is itself an axis. Grids without mechanism axes
    leave the detector untouched, so a one-point grid reproduces
    `evaluate_suite` exactly.
    """
    axes = sorted(grid)
    unknown = [a for a in axes if a not in _SWEEP_AXES]
    if unknown:
        raise InvalidSpec(f"unknown sweep axes {unknown}; allowed: {sorted(_SWEEP_AXES)}")
    track_v_lock = (
        "v_lock" not in axes
        and any(a in _MECH_AXES for a in axes)
        and detector.mode is sig.DetectorMode.VELOCITY_THRESHOLD
    )

    rows = []
    for values in itertools.product(*(grid[a] for a in axes)):
        point = dict(zip(axes, values))
        p_row = replace(params, **{a: point[a] for a in axes if a in _MECH_AXES})
        sg_row = replace(sg, window=int(point["window"])) if "window" in point else sg
        det_row = detector
        if "v_lock" in point:
            det_row = replace(detector, v_lock=float(point["v_lock"]))
        elif track_v_lock:
            det_row = replace(detector, v_lock=threshold_velocity(p_row))
        _, summary = evaluate_suite(scenarios, p_row, det_row, anchor, sg_row)
        rows.append(SweepRow(point=point, summary=summary, v_star=threshold_velocity(p_row)))
    return rows


def write_sweep(rows, path) -> None:
    """Write sweep rows as CSV with header
    ``grid_point,fp_rate,miss_rate,median_latency_s,v_star_mps``.

    Undefined rates are written as empty fields."""
    import csv

    def fmt(v):
        return "" if v is None else repr(float(v))

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            point = ";".join(f"{k}={row.point[k]!r}" for k in sorted(row.point))
            writer.writerow(
                [
                    point,
                    fmt(row.summary.false_positive_rate),
                    fmt(row.summary.miss_rate),
                    fmt(row.summary.median_lock_latency_s),
                    repr(float(row.v_star)),
                ]
            )


def _perpendicular(u: np.ndarray) -> np.ndarray:
    """A unit vector perpendicular to unit vector `u`."""
    helper = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(u, helper)
    return v / np.linalg.norm(v)


def default_suite(
    anchor: AnchorConfig,
    start_pos,
    rate: float = 250.0,
    n_lean: int = 5,
    n_fall: int = 5,
) -> list[Scenario]:
    """Deterministic built-in suite: `n_lean` daily-living reaches with
    peak speeds from 0.30 to 0.60 m/s (alternating radial and oblique
    directions) and `n_fall` fall signatures with dip speeds from 1.0 to
    1.5 m/s, all starting from `start_pos`."""
    start = np.asarray(start_pos, dtype=float)
    radial = radial_direction(anchor, start)
    oblique = 0.5 * radial + (np.sqrt(3.0) / 2.0) * _perpendicular(radial)

    scenarios: list[Scenario] = []
    amplitudes = np.linspace(0.30, 0.58, n_lean) if n_lean else []
    peaks = np.linspace(0.30, 0.60, n_lean) if n_lean else []
    for i, (amp, peak) in enumerate(zip(amplitudes, peaks)):
        profile = LeanProfile(
            direction=radial if i % 2 == 0 else oblique,
            amplitude=float(amp),
            duration=1.875 * float(amp) / float(peak),
            hold=0.5,
        )
        traj = gen_lean(profile, anchor, start, rate)
        scenarios.append(Scenario(f"lean_{i:02d}", traj, is_fall=False))

    dips = np.linspace(1.0, 1.5, n_fall) if n_fall else []
    for i, dip in enumerate(dips):
        profile = FallProfile(onset=2.0, dip_speed=float(dip), recoil_speed=0.9 * float(dip))
        traj = gen_fall(profile, anchor, start, rate)
        scenarios.append(Scenario(f"fall_{i:02d}", traj, is_fall=True, onset=profile.onset))
    return scenarios
