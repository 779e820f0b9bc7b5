"""Fixed-step model of the cable lock mechanism.

The device tracks the user through a capstan kept taut by a coil
spring (transparent mode). Two pivoting flyweights on the capstan are
held seated by magnets; when the capstan spins fast enough, centrifugal
force beats the magnetic retention, the flyweights engage the locking
plate, and further payout loads a stiffening nonlinear spring instead of
running free (locked mode, a compliant but definite stop). Releasing
cable tension lets the mechanism reset to transparent.

The cable drive is kinematic: the user's torso imposes cable velocity
and the device integrates at a fixed step (canonically 1/250 s).
`step()` is a pure transition function on immutable `DeviceState`
values, so identical inputs yield bit-identical runs; independent
simulations can run concurrently, a single one is strictly sequential.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ExtensionOutOfRange,
    InvalidDt,
    InvalidSpec,
    NonFiniteInput,
    NonPositiveRadius,
    StateInvariantViolation,
)
from .motion import CableSeries

TRACE_HEADER = ["t", "length_m", "velocity_mps", "mode", "x_block_m", "tension_N"]
DEVICE_EVENTS_HEADER = ["t", "event"]


class DeviceMode(enum.Enum):
    TRANSPARENT = "T"
    LOCKED = "L"


class ModeChangeKind(enum.Enum):
    LOCK = "LOCK"
    RESET = "RESET"


@dataclass(frozen=True)
class ModeChange:
    """A mode transition at time `t` (seconds)."""

    t: float
    kind: ModeChangeKind


@dataclass(frozen=True)
class DeviceParams:
    """Mechanism constants, SI units.

    Attributes
    ----------
    r_capstan : float
        Capstan radius, m. Converts cable velocity to angular velocity.
    k_coil : float
        Coil-spring torsional stiffness, N*m/rad.
    tau0_coil : float
        Coil-spring pretension torque, N*m. Keeps the cable taut at L = 0.
    m_fly : float
        Mass of each flyweight, kg.
    r_fly : float
        Flyweight centre-of-mass radius at engagement, m.
    F_retain : float
        Magnet breakaway force at the seated position, N, radial,
        per flyweight.
    n_fly : int
        Number of flyweights; the symmetric two-flyweight layout is the
        only supported one.
    k1_block, k3_block : float
        Nonlinear blocking-spring law F(x) = k1*x + k3*x**3, N/m and
        N/m**3. Defaults give roughly 270 N at full travel, engineering
        values rather than measured ones.
    x_block_max : float
        Blocking-spring travel, m. Payout stops dead here.
    L_max : float
        Cable travel capacity, m; at least 0.60 m by design requirement.
    eps_tension : float
        Reset tension threshold, N. Kept for a force-based reset
        variant; the default reset uses the kinematic proxy
        (x_block = 0 and v_cmd <= 0).

    The defaults lock at 0.9 m/s cable velocity:
    0.015 * sqrt(0.72 / (0.01 * 0.02)) = 0.9.
    """

    r_capstan: float = 0.015
    k_coil: float = 5e-4
    tau0_coil: float = 0.015
    m_fly: float = 0.01
    r_fly: float = 0.02
    F_retain: float = 0.72
    n_fly: int = 2
    k1_block: float = 200.0
    k3_block: float = 5e5
    x_block_max: float = 0.08
    L_max: float = 0.60
    eps_tension: float = 0.5

    def __post_init__(self):
        positive = (
            "r_capstan", "k_coil", "m_fly", "r_fly", "F_retain",
            "k1_block", "x_block_max", "L_max", "eps_tension",
        )
        for name in positive:
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidSpec(f"{name} must be > 0, got {v}")
        for name in ("tau0_coil", "k3_block"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidSpec(f"{name} must be >= 0, got {v}")
        if self.n_fly != 2:
            raise InvalidSpec(f"n_fly must be 2, got {self.n_fly}")
        if self.L_max < 0.60:
            raise InvalidSpec(f"L_max must be >= 0.60 m (travel requirement), got {self.L_max}")


@dataclass(frozen=True)
class DeviceState:
    """Device state at time `t`.

    `L` is cable payout from the run's start position (m), `omega` the
    capstan angular velocity (rad/s, payout-positive), `x_block` the
    blocking-spring extension (m, zero whenever transparent). `events`
    is the append-only mode-change log.
    """

    mode: DeviceMode = DeviceMode.TRANSPARENT
    L: float = 0.0
    omega: float = 0.0
    x_block: float = 0.0
    t: float = 0.0
    events: tuple[ModeChange, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.L < 0 or not math.isfinite(self.L):
            raise StateInvariantViolation(f"payout L must be finite and >= 0, got {self.L}")
        if self.x_block < 0 or not math.isfinite(self.x_block):
            raise StateInvariantViolation(f"x_block must be finite and >= 0, got {self.x_block}")
        if self.mode is DeviceMode.TRANSPARENT and self.x_block != 0.0:
            raise StateInvariantViolation(
                f"x_block must be 0 in transparent mode, got {self.x_block}"
            )


@dataclass(frozen=True)
class StepInput:
    """Kinematically imposed cable velocity from the user's torso,
    m/s, payout-positive."""

    v_cable_cmd: float

    def __post_init__(self):
        if not math.isfinite(self.v_cable_cmd):
            raise NonFiniteInput(f"v_cable_cmd must be finite, got {self.v_cable_cmd}")


def capstan_omega(v: float, r_capstan: float) -> float:
    """Equivalent capstan angular velocity for cable velocity `v`: v / r."""
    if not r_capstan > 0:
        raise NonPositiveRadius(f"r_capstan must be > 0, got {r_capstan}")
    return v / r_capstan


def lock_condition(omega: float, p: DeviceParams) -> bool:
    """Whether centrifugal force unseats the flyweights at `omega`.

    True iff m_fly * omega**2 * r_fly >= F_retain. The flyweights are
    symmetric, so one per-flyweight inequality governs both; locking
    exactly at threshold locks (fail-safe convention). The square makes
    the condition direction-independent: fast retraction spins the
    capstan just as fast as fast payout.
    """
    return p.m_fly * omega * omega * p.r_fly >= p.F_retain


def threshold_velocity(p: DeviceParams) -> float:
    """Cable velocity at which the lock engages, m/s.

    Closed form r_capstan * sqrt(F_retain / (m_fly * r_fly));
    lock_condition(capstan_omega(v, r), p) holds iff v >= this value.
    """
    return p.r_capstan * math.sqrt(p.F_retain / (p.m_fly * p.r_fly))


def blocking_force(x: float, p: DeviceParams) -> float:
    """Blocking-spring force at extension `x`: k1*x + k3*x**3, N.

    Strictly increasing in x, which is what makes the stop compliant
    but definite.

    Raises
    ------
    ExtensionOutOfRange
        If x is outside [0, x_block_max].
    """
    if not (0.0 <= x <= p.x_block_max):
        raise ExtensionOutOfRange(f"x must be in [0, {p.x_block_max}], got {x}")
    return p.k1_block * x + p.k3_block * x**3


def transparent_tension(L: float, p: DeviceParams) -> float:
    """Coil-spring cable tension at payout `L`: (tau0 + k_coil*L/r) / r."""
    return (p.tau0_coil + p.k_coil * L / p.r_capstan) / p.r_capstan


def cable_tension(state: DeviceState, p: DeviceParams) -> float:
    """Total cable tension: coil-spring level, plus the blocking-spring
    force when locked."""
    tension = transparent_tension(state.L, p)
    if state.mode is DeviceMode.LOCKED:
        tension += blocking_force(state.x_block, p)
    return tension


def step(state: DeviceState, inp: StepInput, p: DeviceParams, dt: float) -> DeviceState:
    """Advance the device one fixed step under commanded cable velocity.

    Transparent: payout integrates the command (clamped to [0, L_max]),
    omega = v / r_capstan, and the mode flips to locked the moment the
    flyweight condition holds, logging a LOCK event at the new time.

    Locked: positive command extends the blocking spring and pays out
    cable by the same amount, both saturating at x_block_max (the
    definite stop: beyond it payout velocity is forced to zero).
    Negative command unwinds the spring without reeling cable back in.
    Once the spring is fully relaxed and the command is non-positive the
    cable tension is back at coil-spring level, so the mechanism resets
    to transparent and logs a RESET event. Re-evaluating the flyweight
    condition while locked is a no-op.

    Because the flyweight condition is direction-independent and the
    reset condition is kinematic, retraction faster than the threshold
    re-locks immediately after each reset: expect lock/reset pairs in
    the event log while such retraction lasts.

    Raises
    ------
    InvalidDt
        dt not finite and strictly positive.
    StateInvariantViolation
        `state` inconsistent with `p` (payout or extension beyond caps).
    """
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidDt(f"dt must be finite and > 0, got {dt}")
    if state.L > p.L_max:
        raise StateInvariantViolation(f"L = {state.L} exceeds L_max = {p.L_max}")
    if state.x_block > p.x_block_max:
        raise StateInvariantViolation(
            f"x_block = {state.x_block} exceeds x_block_max = {p.x_block_max}"
        )

    v = inp.v_cable_cmd
    t_new = state.t + dt

    if state.mode is DeviceMode.TRANSPARENT:
        L_new = min(max(state.L + v * dt, 0.0), p.L_max)
        omega = capstan_omega(v, p.r_capstan)
        if lock_condition(omega, p):
            return replace(
                state,
                mode=DeviceMode.LOCKED,
                L=L_new,
                omega=omega,
                x_block=0.0,
                t=t_new,
                events=state.events + (ModeChange(t_new, ModeChangeKind.LOCK),),
            )
        return replace(state, L=L_new, omega=omega, t=t_new)

    # Locked: payout is diverted into the blocking spring.
    if v >= 0.0:
        payout = min(v * dt, p.x_block_max - state.x_block)
        x_new = state.x_block + payout
        L_new = min(state.L + payout, p.L_max)
    else:
        payout = 0.0
        x_new = max(state.x_block + v * dt, 0.0)
        L_new = state.L
    omega = capstan_omega(payout / dt, p.r_capstan)

    if v <= 0.0 and x_new == 0.0:
        return replace(
            state,
            mode=DeviceMode.TRANSPARENT,
            L=L_new,
            omega=omega,
            x_block=0.0,
            t=t_new,
            events=state.events + (ModeChange(t_new, ModeChangeKind.RESET),),
        )
    return replace(state, L=L_new, omega=omega, x_block=x_new, t=t_new)


@dataclass(frozen=True)
class SimulationTrace:
    """Per-sample device trace: arrays aligned with the input series.

    `mode` holds the single-letter mode codes "T" and "L".
    """

    t: np.ndarray
    length_m: np.ndarray
    velocity_mps: np.ndarray
    mode: np.ndarray
    x_block_m: np.ndarray
    tension_N: np.ndarray

    def __len__(self) -> int:
        return self.t.size


def simulate(
    cable,
    p: DeviceParams,
    sample_rate: float | None = None,
    initial_state: DeviceState | None = None,
) -> tuple[SimulationTrace, list[ModeChange]]:
    """Fold `step` over a velocity series.

    Parameters
    ----------
    cable : CableSeries or array-like
        A CableSeries supplies its own velocity and rate; a bare
        velocity array uses `sample_rate` (default 250 Hz).
    p : DeviceParams
    sample_rate : float, optional
        Rate for bare velocity input. Must be omitted (or match) for
        CableSeries input.
    initial_state : DeviceState, optional
        Starting state; defaults to transparent at rest with the clock
        set so the first trace sample lands at t = 0.

    Returns
    -------
    (SimulationTrace, list of ModeChange)
        One trace row per input sample, each row reflecting the state
        after its velocity sample has been applied, and the mode-change
        event log.
    """
    if isinstance(cable, CableSeries):
        if sample_rate is not None and sample_rate != cable.sample_rate:
            raise InvalidSpec(
                f"sample_rate {sample_rate} contradicts CableSeries rate {cable.sample_rate}"
            )
        v_arr = cable.velocity
        rate = cable.sample_rate
    else:
        v_arr = np.asarray(cable, dtype=float)
        if v_arr.ndim != 1:
            raise InvalidSpec(f"velocity input must be 1-D, got shape {v_arr.shape}")
        rate = sample_rate if sample_rate is not None else 250.0
        if not (np.isfinite(rate) and rate > 0):
            raise InvalidSpec(f"sample_rate must be > 0, got {rate}")

    dt = 1.0 / rate
    state = initial_state if initial_state is not None else DeviceState(t=-dt)

    n = v_arr.size
    t = np.empty(n)
    length = np.empty(n)
    x_block = np.empty(n)
    tension = np.empty(n)
    mode = np.empty(n, dtype="U1")

    for i, v in enumerate(v_arr):
        state = step(state, StepInput(float(v)), p, dt)
        t[i] = state.t
        length[i] = state.L
        x_block[i] = state.x_block
        tension[i] = cable_tension(state, p)
        mode[i] = state.mode.value

    trace = SimulationTrace(
        t=t,
        length_m=length,
        velocity_mps=np.array(v_arr, dtype=float),
        mode=mode,
        x_block_m=x_block,
        tension_N=tension,
    )
    return trace, list(state.events)


def write_trace(trace: SimulationTrace, path, t0: float = 0.0) -> None:
    """Write a trace as CSV: ``t,length_m,velocity_mps,mode,x_block_m,tension_N``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for i in range(len(trace)):
            writer.writerow(
                [
                    repr(float(t0 + trace.t[i])),
                    repr(float(trace.length_m[i])),
                    repr(float(trace.velocity_mps[i])),
                    trace.mode[i],
                    repr(float(trace.x_block_m[i])),
                    repr(float(trace.tension_N[i])),
                ]
            )


def write_device_events(events, path, t0: float = 0.0) -> None:
    """Write mode changes as CSV with header ``t,event``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DEVICE_EVENTS_HEADER)
        for ev in events:
            writer.writerow([repr(float(t0 + ev.t)), ev.kind.value])
