"""Smoothing, differentiation and event detection over cable series.

- `sg_filter()`: least-squares local-polynomial (Savitzky-Golay) smoothing
  with one-sided polynomial fits at the endpoints, no truncation.
- `differentiate()`: central differences, one-sided at the endpoints.
- `detect()`: threshold and fall-signature event detection with a
  refractory period.

Detection runs offline over a whole series; event timestamps are
relative to the first sample (t = index / rate). All functions are pure
and safe for concurrent invocation.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .errors import InvalidSpec, SeriesTooShort

EVENTS_HEADER = ["t", "kind", "magnitude_mps"]


@dataclass(frozen=True)
class SgSpec:
    """Savitzky-Golay filter settings: odd `window` length in samples and
    polynomial `order`, with window >= order + 2.

    The default (window=31, order=3) spans 124 ms at 250 Hz, short
    enough to preserve dip/recoil velocity lobes of 150 ms and longer
    while suppressing marker jitter.
    """

    window: int = 31
    order: int = 3

    def __post_init__(self):
        if not isinstance(self.window, int) or not isinstance(self.order, int):
            raise InvalidSpec(f"window and order must be ints, got {self.window!r}, {self.order!r}")
        if self.order < 1:
            raise InvalidSpec(f"order must be >= 1, got {self.order}")
        if self.window % 2 == 0:
            raise InvalidSpec(f"window must be odd, got {self.window}")
        if self.window < self.order + 2:
            raise InvalidSpec(f"window must be >= order + 2, got {self.window} < {self.order + 2}")


class DetectorMode(enum.Enum):
    """Trigger policy: plain velocity threshold, or the dip-then-recoil
    fall signature. Which quantity should trigger a real device is an
    open design question, so the mode is configurable."""

    VELOCITY_THRESHOLD = "velocity_threshold"
    FALL_SIGNATURE = "fall_signature"


class EventKind(enum.Enum):
    LOCK_TRIGGER = "lock_trigger"
    SIGNATURE_DIP = "signature_dip"
    SIGNATURE_RECOIL = "signature_recoil"


@dataclass(frozen=True)
class DetectorSpec:
    """Detection thresholds, m/s and seconds.

    `v_lock` drives VELOCITY_THRESHOLD mode; the default 0.9 m/s is the
    midpoint of the 0.8-1.0 m/s design band (use 0.628 m/s to replay the
    prototype). In FALL_SIGNATURE mode a forward crossing of `dip_min`
    opens a pairing window of `pair_window` seconds; a backward crossing
    of `-recoil_min` inside that window completes the signature and
    emits the lock trigger. `refractory` suppresses further lock
    triggers after each one.
    """

    mode: DetectorMode = DetectorMode.VELOCITY_THRESHOLD
    v_lock: float = 0.9
    dip_min: float = 0.8
    recoil_min: float = 0.5
    pair_window: float = 1.0
    refractory: float = 1.0

    def __post_init__(self):
        if not isinstance(self.mode, DetectorMode):
            raise InvalidSpec(f"mode must be a DetectorMode, got {self.mode!r}")
        for name in ("v_lock", "dip_min", "recoil_min", "pair_window"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidSpec(f"{name} must be > 0, got {v}")
        if not (np.isfinite(self.refractory) and self.refractory >= 0):
            raise InvalidSpec(f"refractory must be >= 0, got {self.refractory}")


@dataclass(frozen=True)
class DetectionEvent:
    """A threshold crossing or signature event.

    `t` is seconds from the first sample of the analysed series,
    `magnitude` the velocity at the triggering sample in m/s.
    """

    t: float
    kind: EventKind
    magnitude: float


def _as_series(series, minimum: int, what: str) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InvalidSpec(f"{what} must be 1-D, got shape {x.shape}")
    if x.size < minimum:
        raise SeriesTooShort(f"{what} needs >= {minimum} samples, got {x.size}")
    return x


def sg_filter(series, spec: SgSpec = SgSpec()) -> np.ndarray:
    """Savitzky-Golay smoothing.

    Interior points are least-squares fits of a degree `spec.order`
    polynomial over `spec.window` samples, evaluated at the centre.
    Endpoints are handled by fitting the polynomial on the one-sided
    window anchored at the series end and evaluating it at each endpoint
    sample, so the output has the same length as the input and no
    samples are fabricated beyond the series.

    Reproduces any sampled polynomial of degree <= order exactly (to
    rounding) and is linear in the input.

    Parameters
    ----------
    series : array-like, shape (n,)
    spec : SgSpec

    Returns
    -------
    ndarray, shape (n,)

    Raises
    ------
    SeriesTooShort
        If n < spec.window.
    """
    x = _as_series(series, spec.window, "series")
    return savgol_filter(x, spec.window, spec.order, mode="interp")


def differentiate(series, rate: float) -> np.ndarray:
    """First derivative: central differences at interior samples,
    one-sided at the endpoints.

    Exact for linear series everywhere and for quadratics at interior
    samples.

    Raises
    ------
    SeriesTooShort
        If the series has fewer than 3 samples.
    InvalidSpec
        If `rate` is not strictly positive.
    """
    x = _as_series(series, 3, "series")
    if not (np.isfinite(rate) and rate > 0):
        raise InvalidSpec(f"rate must be > 0, got {rate}")
    return np.gradient(x, 1.0 / rate, edge_order=1)


def _refractory_ok(i: int, last_i: int | None, rate: float, refractory: float) -> bool:
    return last_i is None or (i - last_i) / rate + 1e-12 >= refractory


def detect(velocity, rate: float, spec: DetectorSpec) -> list[DetectionEvent]:
    """Scan a velocity series for lock triggers.

    VELOCITY_THRESHOLD mode emits LOCK_TRIGGER at the first sample with
    velocity >= v_lock (locking exactly at threshold is the fail-safe
    convention) and again after each refractory period while the
    condition holds.

    FALL_SIGNATURE mode marks forward crossings of `dip_min` as
    SIGNATURE_DIP and opens a pairing window of `pair_window` seconds.
    A backward crossing of `-recoil_min` inside an open window completes
    the signature and emits LOCK_TRIGGER at the recoil sample; backward
    crossings with no open window (or inside the refractory period) are
    reported as SIGNATURE_RECOIL and do not trigger. Consequently a
    trigger lags the recoil threshold crossing only by the smoothing
    applied upstream, and lags the dip by at most `pair_window`.

    Parameters
    ----------
    velocity : array-like, shape (n,)
        Cable velocity, m/s, payout-positive. Filter first if desired.
    rate : float
        Sample rate, Hz.
    spec : DetectorSpec

    Returns
    -------
    list of DetectionEvent, strictly increasing in t.
    """
    if not isinstance(spec, DetectorSpec):
        raise InvalidSpec(f"spec must be a DetectorSpec, got {spec!r}")
    if not (np.isfinite(rate) and rate > 0):
        raise InvalidSpec(f"rate must be > 0, got {rate}")
    v = np.asarray(velocity, dtype=float)
    if v.ndim != 1:
        raise InvalidSpec(f"velocity must be 1-D, got shape {v.shape}")

    events: list[DetectionEvent] = []
    last_lock: int | None = None

    if spec.mode is DetectorMode.VELOCITY_THRESHOLD:
        for i in range(v.size):
            if v[i] >= spec.v_lock and _refractory_ok(i, last_lock, rate, spec.refractory):
                events.append(DetectionEvent(i / rate, EventKind.LOCK_TRIGGER, float(v[i])))
                last_lock = i
        return events

    # FALL_SIGNATURE: dip opens a pairing window, recoil inside it triggers.
    window_samples = spec.pair_window * rate
    open_dip: int | None = None
    for i in range(v.size):
        crossed_dip = v[i] >= spec.dip_min and (i == 0 or v[i - 1] < spec.dip_min)
        crossed_recoil = v[i] <= -spec.recoil_min and (i == 0 or v[i - 1] > -spec.recoil_min)
        if crossed_dip:
            events.append(DetectionEvent(i / rate, EventKind.SIGNATURE_DIP, float(v[i])))
            open_dip = i
        elif crossed_recoil:
            paired = open_dip is not None and i - open_dip <= window_samples + 1e-9
            if paired and _refractory_ok(i, last_lock, rate, spec.refractory):
                events.append(DetectionEvent(i / rate, EventKind.LOCK_TRIGGER, float(v[i])))
                last_lock = i
                open_dip = None
            else:
                events.append(DetectionEvent(i / rate, EventKind.SIGNATURE_RECOIL, float(v[i])))
    return events


def write_events(events, path, t0: float = 0.0) -> None:
    """Write detection events as CSV with header ``t,kind,magnitude_mps``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENTS_HEADER)
        for ev in events:
            writer.writerow([repr(float(t0 + ev.t)), ev.kind.value, repr(float(ev.magnitude))])


def first_lock_time(events) -> float | None:
    """Timestamp of the first LOCK_TRIGGER event, or None."""
    for ev in events:
        if ev.kind is EventKind.LOCK_TRIGGER:
            return ev.t
    return None


def crossing_time(threshold: float, peak: float, lobe_duration: float) -> float:
    """Time after lobe onset at which a half-sine velocity lobe of height
    `peak` first reaches `threshold`. Analytic oracle for detector tests."""
    if not 0 < threshold <= peak:
        raise InvalidSpec(f"threshold must be in (0, peak], got {threshold} vs peak {peak}")
    return lobe_duration * math.asin(threshold / peak) / math.pi
