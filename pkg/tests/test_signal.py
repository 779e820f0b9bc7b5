"""Filtering, differentiation and detection contracts."""

import numpy as np
import pytest

from torsolock import (
    DetectionEvent,
    DetectorMode,
    DetectorSpec,
    EventKind,
    InvalidSpec,
    SeriesTooShort,
    SgSpec,
    detect,
    differentiate,
    sg_filter,
)
from torsolock.signal import crossing_time, first_lock_time

RATE = 250.0


def local_polyfit_oracle(x, window, order):
    """Brute-force reference: per-sample local least-squares polynomial fit,
    one-sided windows anchored at the series ends."""
    half = window // 2
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        lo, hi = max(0, min(i - half, n - window)), 0
        hi = lo + window
        grid = np.arange(lo, hi, dtype=float) - i
        coef = np.polynomial.polynomial.polyfit(grid, x[lo:hi], order)
        out[i] = coef[0]
    return out


# --- SgSpec validation ---

@pytest.mark.parametrize("window,order", [(30, 3), (31, 0), (4, 3), (5, 4)])
def test_sgspec_rejects_invalid(window, order):
    with pytest.raises(InvalidSpec):
        SgSpec(window=window, order=order)


def test_sgspec_rejects_non_int():
    with pytest.raises(InvalidSpec):
        SgSpec(window=31.0, order=3)


# --- sg_filter ---

def test_sg_constant_series_unchanged():
    x = np.full(100, 3.7)
    assert np.array_equal(sg_filter(x, SgSpec(31, 3)), x) or np.allclose(
        sg_filter(x, SgSpec(31, 3)), x, atol=1e-12
    )


def test_sg_reproduces_exact_cubic():
    t = np.arange(300) / RATE
    x = 1.0 - 2.0 * t + 3.0 * t**2 - 0.5 * t**3
    assert np.max(np.abs(sg_filter(x, SgSpec(21, 3)) - x)) < 1e-9


@pytest.mark.parametrize("window,order", [(31, 3), (11, 4), (7, 2)])
def test_sg_reproduces_polynomials_up_to_order(window, order):
    rng = np.random.default_rng(7)
    t = np.linspace(-1.0, 1.0, 200)
    for degree in range(order + 1):
        coeffs = rng.uniform(-2.0, 2.0, size=degree + 1)
        x = np.polynomial.polynomial.polyval(t, coeffs)
        assert np.max(np.abs(sg_filter(x, SgSpec(window, order)) - x)) < 1e-9


def test_sg_denoises_sine_against_clean_reference():
    # clean reference computed analytically; filter must beat the raw input
    rng = np.random.default_rng(42)
    t = np.arange(1000) / RATE
    clean = np.sin(2.0 * np.pi * 2.0 * t)
    noisy = clean + rng.uniform(-0.05, 0.05, size=t.size)
    filtered = sg_filter(noisy, SgSpec(31, 3))
    rms = lambda e: float(np.sqrt(np.mean(e**2)))
    assert rms(filtered - clean) < rms(noisy - clean)


def test_sg_linearity():
    rng = np.random.default_rng(3)
    x = rng.normal(size=150)
    y = rng.normal(size=150)
    spec = SgSpec(31, 3)
    lhs = sg_filter(2.5 * x - 1.3 * y, spec)
    rhs = 2.5 * sg_filter(x, spec) - 1.3 * sg_filter(y, spec)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_sg_matches_local_polyfit_oracle_including_endpoints():
    # independent route: brute-force windowed polyfit, one-sided at the ends
    rng = np.random.default_rng(11)
    x = rng.normal(size=120)
    for window, order in [(31, 3), (9, 2)]:
        expected = local_polyfit_oracle(x, window, order)
        assert np.max(np.abs(sg_filter(x, SgSpec(window, order)) - expected)) < 1e-9


def test_sg_rejects_short_series():
    with pytest.raises(SeriesTooShort):
        sg_filter(np.zeros(30), SgSpec(31, 3))


# --- differentiate ---

def test_differentiate_linear_ramp_exact():
    t = np.arange(500) / RATE
    d = differentiate(0.5 * t, RATE)
    assert np.max(np.abs(d - 0.5)) < 1e-12


def test_differentiate_constant_is_zero():
    assert np.all(differentiate(np.full(50, 2.2), RATE) == 0.0)


def test_differentiate_quadratic_exact_interior():
    # analytic derivative oracle: d/dt t^2 = 2t
    t = np.arange(500) / RATE
    d = differentiate(t**2, RATE)
    assert np.max(np.abs(d[1:-1] - 2.0 * t[1:-1])) < 1e-9


def test_differentiate_rejects_short_series():
    with pytest.raises(SeriesTooShort):
        differentiate(np.zeros(2), RATE)


# --- detect: velocity threshold mode ---

def test_no_events_below_threshold():
    v = np.full(500, 0.3)
    assert detect(v, RATE, DetectorSpec(v_lock=0.9)) == []


def test_trigger_at_first_crossing_sample():
    v = np.concatenate([np.zeros(100), np.full(50, 1.0)])
    events = detect(v, RATE, DetectorSpec(v_lock=0.9))
    assert events[0].kind is EventKind.LOCK_TRIGGER
    assert events[0].t == 100 / RATE
    assert events[0].magnitude == 1.0


def test_trigger_exactly_at_threshold_fires():
    v = np.array([0.0, 0.9, 0.0])
    events = detect(v, RATE, DetectorSpec(v_lock=0.9))
    assert len(events) == 1


def test_refractory_separates_triggers():
    v = np.full(500, 1.0)
    spec = DetectorSpec(v_lock=0.9, refractory=0.1)
    events = detect(v, RATE, spec)
    times = [e.t for e in events]
    assert len(events) == 20
    assert all(b - a >= spec.refractory - 1e-9 for a, b in zip(times, times[1:]))


def test_zero_refractory_fires_every_qualifying_sample():
    v = np.concatenate([np.zeros(10), np.full(25, 1.0)])
    events = detect(v, RATE, DetectorSpec(v_lock=0.9, refractory=0.0))
    assert len(events) == 25


def test_threshold_monotonicity_small():
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = np.cumsum(rng.normal(scale=0.05, size=400))
        hi = rng.uniform(0.3, 1.0)
        lo = hi * rng.uniform(0.3, 0.95)
        refractory = float(rng.choice([0.0, 0.02, 0.1]))
        e_hi = detect(v, RATE, DetectorSpec(v_lock=hi, refractory=refractory))
        e_lo = detect(v, RATE, DetectorSpec(v_lock=lo, refractory=refractory))
        assert len(e_lo) >= len(e_hi)
        if e_hi:
            assert e_lo[0].t <= e_hi[0].t


# --- detect: fall signature mode ---

def lobe(peak, duration, rate=RATE):
    n = int(duration * rate)
    return peak * np.sin(np.pi * np.arange(n) / n)


def fall_spec(**kw):
    defaults = dict(mode=DetectorMode.FALL_SIGNATURE, dip_min=0.8, recoil_min=0.5,
                    pair_window=1.0, refractory=1.0)
    defaults.update(kw)
    return DetectorSpec(**defaults)


def test_dip_then_recoil_triggers_lock():
    v = np.concatenate([np.zeros(50), lobe(1.0, 0.25), -lobe(0.9, 0.25), np.zeros(50)])
    events = detect(v, RATE, fall_spec())
    kinds = [e.kind for e in events]
    assert kinds == [EventKind.SIGNATURE_DIP, EventKind.LOCK_TRIGGER]
    assert events[0].t < events[1].t


def test_recoil_outside_pair_window_does_not_trigger():
    gap = np.zeros(int(2.0 * RATE))
    v = np.concatenate([np.zeros(50), lobe(1.0, 0.25), gap, -lobe(0.9, 0.25)])
    events = detect(v, RATE, fall_spec(pair_window=0.5))
    kinds = [e.kind for e in events]
    assert kinds == [EventKind.SIGNATURE_DIP, EventKind.SIGNATURE_RECOIL]


def test_recoil_before_dip_does_not_trigger():
    v = np.concatenate([np.zeros(50), -lobe(0.9, 0.25), lobe(1.0, 0.25), np.zeros(50)])
    events = detect(v, RATE, fall_spec())
    kinds = [e.kind for e in events]
    assert kinds == [EventKind.SIGNATURE_RECOIL, EventKind.SIGNATURE_DIP]


def test_sign_mirror_symmetry_of_markers():
    # reversed-sign series with mirrored thresholds swaps dip and recoil
    # markers at identical timestamps (lone lobes, so no pairing fires)
    gap = np.zeros(int(2.0 * RATE))
    v = np.concatenate([np.zeros(50), lobe(1.0, 0.25), gap, -lobe(0.9, 0.25), np.zeros(50)])
    spec = fall_spec(dip_min=0.8, recoil_min=0.5, pair_window=0.5)
    mirrored = fall_spec(dip_min=0.5, recoil_min=0.8, pair_window=0.5)
    fwd = detect(v, RATE, spec)
    rev = detect(-v, RATE, mirrored)
    swap = {EventKind.SIGNATURE_DIP: EventKind.SIGNATURE_RECOIL,
            EventKind.SIGNATURE_RECOIL: EventKind.SIGNATURE_DIP}
    assert [(e.t, swap[e.kind]) for e in fwd] == [(e.t, e.kind) for e in rev]


def test_lock_refractory_in_signature_mode():
    episode = np.concatenate([lobe(1.0, 0.25), -lobe(0.9, 0.25), np.zeros(25)])
    v = np.concatenate([episode, episode])
    events = detect(v, RATE, fall_spec(refractory=5.0))
    locks = [e for e in events if e.kind is EventKind.LOCK_TRIGGER]
    recoils = [e for e in events if e.kind is EventKind.SIGNATURE_RECOIL]
    assert len(locks) == 1  # second completion suppressed, reported as marker
    assert len(recoils) == 1


def test_events_strictly_increasing():
    rng = np.random.default_rng(9)
    v = np.cumsum(rng.normal(scale=0.2, size=600))
    v -= v.mean()
    events = detect(v, RATE, fall_spec(dip_min=0.3, recoil_min=0.3, pair_window=0.2))
    times = [e.t for e in events]
    assert all(b > a for a, b in zip(times, times[1:]))


def test_first_lock_time_helper():
    events = [
        DetectionEvent(0.1, EventKind.SIGNATURE_DIP, 1.0),
        DetectionEvent(0.4, EventKind.LOCK_TRIGGER, -0.6),
    ]
    assert first_lock_time(events) == 0.4
    assert first_lock_time(events[:1]) is None


def test_crossing_time_oracle_matches_sampled_lobe():
    peak, duration = 1.0, 0.25
    v = lobe(peak, duration)
    t_cross = crossing_time(0.9, peak, duration)
    i = int(np.argmax(v >= 0.9))
    assert abs(i / RATE - t_cross) <= 1.0 / RATE


def test_velocity_threshold_end_to_end_on_generated_fall(anchor):
    # full pipeline; oracle: the analytic crossing time of the dip lobe
    from torsolock import DeviceParams, FallProfile, gen_fall, run_pipeline

    profile = FallProfile(onset=2.0, dip_speed=1.0, recoil_speed=0.9)
    traj = gen_fall(profile, anchor, [0.5, 0.0, 0.0], RATE)
    res = run_pipeline(traj, anchor, DeviceParams())
    spec = DetectorSpec(v_lock=0.9)
    events = detect(res.velocity, RATE, spec)

    locks = [e for e in events if e.kind is EventKind.LOCK_TRIGGER]
    assert len(locks) == 1
    t_true = profile.onset + crossing_time(spec.v_lock, profile.dip_speed, profile.dip_duration)
    # latency bounded by half the smoothing window (plus pair_window in
    # signature mode, which does not apply here)
    half_window = (SgSpec().window // 2) / RATE
    assert abs(locks[0].t - t_true) <= half_window


def test_detect_rejects_bad_spec_types():
    with pytest.raises(InvalidSpec):
        detect(np.zeros(10), RATE, spec="not a spec")
    with pytest.raises(InvalidSpec):
        DetectorSpec(v_lock=-0.1)
    with pytest.raises(InvalidSpec):
        DetectorSpec(refractory=-1.0)
