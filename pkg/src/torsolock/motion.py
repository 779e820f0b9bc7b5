"""Body-anchor trajectories and straight-line cable geometry.

Data model
- `Trajectory`: uniformly sampled 3-D positions of the moving body anchor.
- `AnchorConfig`: fixed device anchor plus the vest-side attachment offset.
- `CableSeries`: cable length and unfiltered payout velocity per sample.

Geometry
- `cable_length()`: straight-segment distance for one body position.
- `trajectory_to_cable()`: length series plus central-difference velocity.

Synthetic motion
- `gen_lean()`: minimum-jerk out/hold/return reach along a fixed direction.
- `gen_fall()`: forward surge then sharp backward correction, half-sine
  velocity lobes along the radial direction from the device anchor.

File I/O
- `load_trajectory()` / `write_trajectory()`: CSV with header ``t,x,y,z``.
- `write_cable_series()`: CSV with header ``t,length_m,velocity_mps``.

All values are SI (seconds, metres). Positive cable velocity means payout
(the cable extends). Everything here is a pure function of its inputs;
constructed values are immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidProfile,
    MissingColumn,
    NonFiniteInput,
    NonMonotonicTime,
    NonUniformSampling,
    TooFewSamples,
    InvalidSpec,
)

#: Canonical capture rate of the source motion data, Hz.
CANONICAL_RATE_HZ = 250.0

#: Allowed deviation of sample spacing from 1/sample_rate, seconds.
SPACING_TOL_S = 1e-9

TRAJECTORY_HEADER = ["t", "x", "y", "z"]
CABLE_HEADER = ["t", "length_m", "velocity_mps"]


def _as_point(value, name: str) -> np.ndarray:
    """Coerce to a finite float 3-vector or raise NonFiniteInput."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise NonFiniteInput(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} must be finite, got {arr}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled positions of the moving body anchor.

    Parameters
    ----------
    sample_rate : float
        Sampling rate in Hz (canonically 250).
    t : ndarray, shape (n,)
        Sample times in seconds, strictly increasing, uniformly spaced
        at 1/sample_rate within 1e-9 s.
    pos : ndarray, shape (n, 3)
        Anchor positions in metres.

    Raises
    ------
    TooFewSamples
        Fewer than 2 samples.
    NonMonotonicTime
        Timestamps not strictly increasing.
    NonUniformSampling
        Spacing deviates from 1/sample_rate by more than 1e-9 s.
    """

    sample_rate: float
    t: np.ndarray
    pos: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise NonUniformSampling(f"sample_rate must be positive, got {self.sample_rate}")
        t = np.asarray(self.t, dtype=float)
        pos = np.asarray(self.pos, dtype=float)
        if t.ndim != 1 or pos.shape != (t.size, 3):
            raise InvalidSpec(f"expected t (n,) and pos (n, 3), got {t.shape} and {pos.shape}")
        if t.size < 2:
            raise TooFewSamples(f"need at least 2 samples, got {t.size}")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.all(np.isfinite(t)):
            raise NonMonotonicTime("timestamps must be finite and strictly increasing")
        err = np.max(np.abs(dt - 1.0 / self.sample_rate))
        if err > SPACING_TOL_S:
            raise NonUniformSampling(
                f"spacing deviates from 1/{self.sample_rate} Hz by {err:.3e} s"
            )
        object.__setattr__(self, "t", _freeze(t))
        object.__setattr__(self, "pos", _freeze(pos))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.pos, other.pos)
        )

    def __len__(self) -> int:
        return self.t.size

    @property
    def duration(self) -> float:
        """Span from first to last sample, seconds."""
        return float(self.t[-1] - self.t[0])

    @classmethod
    def from_positions(
        cls, pos: np.ndarray, sample_rate: float, t0: float = 0.0
    ) -> "Trajectory":
        """Build a trajectory from positions on the uniform grid t0 + k/rate."""
        pos = np.asarray(pos, dtype=float)
        t = t0 + np.arange(pos.shape[0]) / sample_rate
        return cls(sample_rate=sample_rate, t=t, pos=pos)


@dataclass(frozen=True, eq=False)
class AnchorConfig:
    """Cable anchoring geometry.

    `device_anchor` is the fixed cable exit point in the wheelchair frame.
    `body_anchor_offset` is the vest attachment point relative to the
    tracked body point; the effective cable end is
    ``body_pos + body_anchor_offset``.
    """

    device_anchor: np.ndarray
    body_anchor_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        dev = _as_point(self.device_anchor, "device_anchor")
        off = _as_point(self.body_anchor_offset, "body_anchor_offset")
        if np.linalg.norm(off) >= 0.5:
            raise InvalidSpec(
                f"|body_anchor_offset| must be < 0.5 m, got {np.linalg.norm(off):.3f} m"
            )
        object.__setattr__(self, "device_anchor", _freeze(dev))
        object.__setattr__(self, "body_anchor_offset", _freeze(off))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnchorConfig):
            return NotImplemented
        return np.array_equal(self.device_anchor, other.device_anchor) and np.array_equal(
            self.body_anchor_offset, other.body_anchor_offset
        )


@dataclass(frozen=True)
class LeanProfile:
    """Smooth out-hold-return reach, a stand-in for daily-living leaning.

    `direction` is a unit 3-vector, `amplitude` the reach distance in
    metres, `duration` the one-way movement time, `hold` the dwell at
    full reach. Peak speed is 1.875 * amplitude / duration (the
    minimum-jerk peak factor 15/8).
    """

    direction: np.ndarray
    amplitude: float
    duration: float
    hold: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or not np.all(np.isfinite(d)):
            raise InvalidProfile(f"direction must be a finite 3-vector, got {d}")
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise InvalidProfile(f"direction must be unit length, |d| = {np.linalg.norm(d)!r}")
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise InvalidProfile(f"amplitude must be > 0, got {self.amplitude}")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise InvalidProfile(f"duration must be > 0, got {self.duration}")
        if not (np.isfinite(self.hold) and self.hold >= 0):
            raise InvalidProfile(f"hold must be >= 0, got {self.hold}")
        object.__setattr__(self, "direction", _freeze(d))

    @property
    def peak_speed(self) -> float:
        """Peak anchor speed of the minimum-jerk segment, m/s."""
        return 1.875 * self.amplitude / self.duration


@dataclass(frozen=True)
class FallProfile:
    """Incipient-fall signature: forward surge then backward correction.

    Radial velocity follows a half-sine lobe of height `dip_speed` over
    `dip_duration`, immediately followed by a negative half-sine lobe of
    height `recoil_speed` over `recoil_duration`. The recoil may not
    carry the body behind its rest point, so the recoil lobe area must
    not exceed the dip lobe area.
    """

    onset: float
    dip_speed: float
    recoil_speed: float
    dip_duration: float = 0.25
    recoil_duration: float = 0.25

    def __post_init__(self):
        for name in ("dip_speed", "recoil_speed", "dip_duration", "recoil_duration"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidProfile(f"{name} must be > 0, got {v}")
        if not (np.isfinite(self.onset) and self.onset >= 0):
            raise InvalidProfile(f"onset must be >= 0, got {self.onset}")
        if self.recoil_speed * self.recoil_duration > self.dip_speed * self.dip_duration:
            raise InvalidProfile(
                "recoil lobe area exceeds dip lobe area; displacement would go negative"
            )

    @property
    def dip_area(self) -> float:
        """Displacement of the forward surge, metres."""
        return 2.0 * self.dip_speed * self.dip_duration / np.pi

    @property
    def recoil_area(self) -> float:
        """Displacement recovered by the backward correction, metres."""
        return 2.0 * self.recoil_speed * self.recoil_duration / np.pi


@dataclass(frozen=True, eq=False)
class CableSeries:
    """Cable length and payout velocity on a uniform grid.

    `velocity` is unfiltered central differences of `length`
    (one-sided at the endpoints); smoothing lives in
    :mod:`torsolock.signal` so the filter stays testable in isolation.
    """

    sample_rate: float
    length: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise InvalidSpec(f"sample_rate must be positive, got {self.sample_rate}")
        length = np.asarray(self.length, dtype=float)
        velocity = np.asarray(self.velocity, dtype=float)
        if length.ndim != 1 or length.shape != velocity.shape:
            raise InvalidSpec(
                f"length and velocity must be equal-length 1-D, got {length.shape} "
                f"and {velocity.shape}"
            )
        if np.any(length < 0):
            raise InvalidSpec(f"cable length must be >= 0, min is {length.min():.6g}")
        object.__setattr__(self, "length", _freeze(length))
        object.__setattr__(self, "velocity", _freeze(velocity))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CableSeries):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and np.array_equal(self.length, other.length)
            and np.array_equal(self.velocity, other.velocity)
        )

    def __len__(self) -> int:
        return self.length.size


def cable_length(anchor: AnchorConfig, body_pos) -> float:
    """Straight-segment cable length for one body position.

    Returns the Euclidean distance between the device anchor and the
    effective cable end ``body_pos + body_anchor_offset``, in metres.

    Raises
    ------
    NonFiniteInput
        If `body_pos` contains NaN or infinity.
    """
    p = _as_point(body_pos, "body_pos")
    return float(np.linalg.norm(p + anchor.body_anchor_offset - anchor.device_anchor))


def trajectory_to_cable(traj: Trajectory, anchor: AnchorConfig) -> CableSeries:
    """Convert body motion to a cable length/velocity series.

    Length is the straight-segment distance at every sample. Velocity
    is central differences at interior samples and one-sided forward or
    backward differences at the endpoints, with no smoothing.

    Parameters
    ----------
    traj : Trajectory
        Body-anchor motion.
    anchor : AnchorConfig
        Cable anchoring geometry.

    Returns
    -------
    CableSeries
    """
    ends = traj.pos + anchor.body_anchor_offset - anchor.device_anchor
    length = np.linalg.norm(ends, axis=1)
    velocity = np.gradient(length, 1.0 / traj.sample_rate, edge_order=1)
    return CableSeries(sample_rate=traj.sample_rate, length=length, velocity=velocity)


def radial_direction(anchor: AnchorConfig, start_pos) -> np.ndarray:
    """Unit vector along which motion pays the cable out one-to-one.

    Points from the device anchor through the effective cable end at
    `start_pos`. Raises InvalidProfile if the two coincide.
    """
    p = _as_point(start_pos, "start_pos")
    r = p + anchor.body_anchor_offset - anchor.device_anchor
    norm = np.linalg.norm(r)
    if norm == 0.0:
        raise InvalidProfile("start position coincides with the device anchor")
    return r / norm


def _minimum_jerk(tau: np.ndarray) -> np.ndarray:
    """Minimum-jerk blend 0 -> 1, C2 at both ends: 10 tau^3 - 15 tau^4 + 6 tau^5."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)


def gen_lean(
    profile: LeanProfile, anchor: AnchorConfig, start_pos, rate: float = CANONICAL_RATE_HZ
) -> Trajectory:
    """Synthesize an out-hold-return leaning trajectory.

    The body anchor moves from `start_pos` along ``profile.direction``
    following a minimum-jerk blend over ``profile.duration``, dwells for
    ``profile.hold``, then returns the same way. Peak speed is
    ``1.875 * amplitude / duration``.

    `anchor` fixes the device-frame context for downstream geometry and
    is validated here; it does not alter the generated motion, which
    follows ``profile.direction``.

    Raises
    ------
    InvalidProfile
        If `rate` is not strictly positive.
    """
    if not (np.isfinite(rate) and rate > 0):
        raise InvalidProfile(f"rate must be > 0, got {rate}")
    _ = anchor.device_anchor  # constructed AnchorConfig is already validated
    start = _as_point(start_pos, "start_pos")

    total = 2.0 * profile.duration + profile.hold
    n = int(round(total * rate)) + 1
    t = np.arange(n) / rate

    s = np.empty(n)
    out = t < profile.duration
    back = t > profile.duration + profile.hold
    s[out] = _minimum_jerk(t[out] / profile.duration)
    s[~out & ~back] = 1.0
    s[back] = _minimum_jerk((total - t[back]) / profile.duration)

    pos = start + (profile.amplitude * s)[:, None] * profile.direction
    return Trajectory.from_positions(pos, rate)


def _fall_displacement(t: np.ndarray, profile: FallProfile) -> np.ndarray:
    """Closed-form radial displacement of the dip/recoil velocity lobes."""
    d = np.zeros_like(t)
    t1 = profile.onset
    t2 = t1 + profile.dip_duration
    t3 = t2 + profile.recoil_duration

    dip = (t >= t1) & (t < t2)
    tau = (t[dip] - t1) / profile.dip_duration
    d[dip] = 0.5 * profile.dip_area * (1.0 - np.cos(np.pi * tau))

    rec = (t >= t2) & (t < t3)
    tau = (t[rec] - t2) / profile.recoil_duration
    d[rec] = profile.dip_area - 0.5 * profile.recoil_area * (1.0 - np.cos(np.pi * tau))

    d[t >= t3] = profile.dip_area - profile.recoil_area
    return d


def gen_fall(
    profile: FallProfile,
    anchor: AnchorConfig,
    start_pos,
    rate: float = CANONICAL_RATE_HZ,
    tail: float = 1.0,
) -> Trajectory:
    """Synthesize an incipient-fall trajectory.

    From `profile.onset` the body anchor surges away from the device
    along the radial direction (half-sine velocity lobe peaking at
    ``dip_speed``), then corrects backwards (negative half-sine peaking
    at ``recoil_speed``), then rests for `tail` seconds. Radial motion
    means cable velocity equals the signed radial speed, so the cable
    velocity peaks at ``dip_speed``.

    Raises
    ------
    InvalidProfile
        If `rate` or `tail` is out of range, or `start_pos` coincides
        with the device anchor.
    """
    if not (np.isfinite(rate) and rate > 0):
        raise InvalidProfile(f"rate must be > 0, got {rate}")
    if not (np.isfinite(tail) and tail >= 0):
        raise InvalidProfile(f"tail must be >= 0, got {tail}")
    start = _as_point(start_pos, "start_pos")
    u = radial_direction(anchor, start)

    total = profile.onset + profile.dip_duration + profile.recoil_duration + tail
    n = int(round(total * rate)) + 1
    t = np.arange(n) / rate
    d = _fall_displacement(t, profile)
    pos = start + d[:, None] * u
    return Trajectory.from_positions(pos, rate)


def load_trajectory(path, column_map: dict | None = None) -> Trajectory:
    """Load a trajectory from CSV.

    The file must carry a header row. `column_map` maps file column
    names to the roles ``t``, ``x``, ``y``, ``z``; by default the
    columns are expected to be named after their roles. Units are
    seconds and metres, decimal point ``.``.

    Non-uniform input is rejected rather than resampled. Sample rates
    within 1e-6 Hz of an integer are snapped to that integer so that a
    write/load round trip reproduces the rate exactly.

    Raises
    ------
    MissingColumn
        A role cannot be resolved to a file column.
    NonMonotonicTime, NonUniformSampling, TooFewSamples
        Propagated from trajectory validation.
    """
    roles = {"t": "t", "x": "x", "y": "y", "z": "z"}
    if column_map:
        for col, role in column_map.items():
            if role not in roles:
                raise MissingColumn(f"unknown role {role!r} for column {col!r}")
            roles[role] = col

    with open(path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [f"{role} (column {col!r})" for role, col in roles.items() if col not in header]
        if missing:
            raise MissingColumn(f"cannot resolve {', '.join(missing)} in header {header}")
        rows = [
            (float(r[roles["t"]]), float(r[roles["x"]]), float(r[roles["y"]]), float(r[roles["z"]]))
            for r in reader
        ]

    if len(rows) < 2:
        raise TooFewSamples(f"need at least 2 data rows, got {len(rows)}")
    data = np.asarray(rows, dtype=float)
    t = data[:, 0]
    if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
        raise NonMonotonicTime("timestamps must be finite and strictly increasing")

    rate = (len(t) - 1) / (t[-1] - t[0])
    if abs(rate - round(rate)) <= 1e-6 and round(rate) > 0:
        rate = float(round(rate))
    return Trajectory(sample_rate=rate, t=t, pos=data[:, 1:4])


def write_trajectory(traj: Trajectory, path) -> None:
    """Write a trajectory as CSV with header ``t,x,y,z``.

    Floats are written with shortest round-trip precision and LF line
    endings, so loading the file back reproduces the trajectory exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for ti, p in zip(traj.t, traj.pos):
            writer.writerow([repr(float(ti)), repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])


def write_cable_series(cable: CableSeries, path, t0: float = 0.0) -> None:
    """Write a cable series as CSV with header ``t,length_m,velocity_mps``."""
    t = t0 + np.arange(len(cable)) / cable.sample_rate
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CABLE_HEADER)
        for ti, li, vi in zip(t, cable.length, cable.velocity):
            writer.writerow([repr(float(ti)), repr(float(li)), repr(float(vi))])
