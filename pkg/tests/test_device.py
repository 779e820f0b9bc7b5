"""Mechanism physics and the fixed-step lock/reset state machine."""

from dataclasses import replace

import numpy as np
import pytest

from torsolock import (
    DeviceMode,
    DeviceParams,
    DeviceState,
    ExtensionOutOfRange,
    InvalidDt,
    InvalidSpec,
    ModeChangeKind,
    NonFiniteInput,
    NonPositiveRadius,
    StateInvariantViolation,
    StepInput,
    blocking_force,
    cable_tension,
    capstan_omega,
    lock_condition,
    simulate,
    step,
    threshold_velocity,
    transparent_tension,
    write_trace,
)

RATE = 250.0
DT = 1.0 / RATE


def nice_params(**kw):
    """Defaults whose threshold velocity is exactly 0.9 m/s."""
    return replace(DeviceParams(), **kw)


# --- capstan_omega ---

def test_capstan_omega_direct_division():
    assert capstan_omega(0.9, 0.015) == pytest.approx(60.0, abs=1e-12)
    assert capstan_omega(0.0, 0.015) == 0.0


def test_capstan_omega_prototype_threshold():
    assert capstan_omega(0.628, 0.015) == pytest.approx(41.866666666666667, abs=1e-9)


def test_capstan_omega_rejects_nonpositive_radius():
    with pytest.raises(NonPositiveRadius):
        capstan_omega(1.0, 0.0)


# --- lock_condition ---

def test_lock_condition_true_at_exact_equality():
    # 0.01 * 60^2 * 0.02 = 0.72 exactly; >= convention locks at threshold
    assert lock_condition(60.0, nice_params()) is True


def test_lock_condition_false_at_rest_and_below():
    p = nice_params()
    assert lock_condition(0.0, p) is False
    # 0.01 * 59.9^2 * 0.02 = 0.717602 < 0.72
    assert lock_condition(59.9, p) is False


def test_lock_condition_monotone_in_omega():
    rng = np.random.default_rng(21)
    p = nice_params()
    for _ in range(50):
        w1 = rng.uniform(0.0, 120.0)
        w2 = w1 + rng.uniform(0.0, 60.0)
        if lock_condition(w1, p):
            assert lock_condition(w2, p)


def test_lock_condition_is_direction_independent():
    p = nice_params()
    assert lock_condition(-60.0, p) is True


# --- threshold_velocity ---

def test_threshold_velocity_closed_form():
    assert threshold_velocity(nice_params()) == pytest.approx(0.9, abs=1e-12)


def test_threshold_velocity_bisection_cross_check():
    # independent oracle: bisect lock_condition over cable velocity
    p = nice_params(F_retain=0.41, m_fly=0.013, r_fly=0.024, r_capstan=0.011)
    lo, hi = 0.0, 10.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if lock_condition(capstan_omega(mid, p.r_capstan), p):
            hi = mid
        else:
            lo = mid
    assert threshold_velocity(p) == pytest.approx(hi, abs=1e-9)


def test_threshold_velocity_sqrt_scaling():
    p = nice_params()
    p4 = replace(p, F_retain=4.0 * p.F_retain)
    assert threshold_velocity(p4) == pytest.approx(2.0 * threshold_velocity(p), rel=1e-12)


def test_threshold_velocity_is_exact_lock_boundary():
    p = nice_params(F_retain=0.53, m_fly=0.017, r_fly=0.031)
    v_star = threshold_velocity(p)
    above = np.nextafter(v_star, np.inf)
    below = v_star * (1.0 - 1e-12)
    assert lock_condition(capstan_omega(above, p.r_capstan), p)
    assert not lock_condition(capstan_omega(below, p.r_capstan), p)


# --- blocking_force ---

def test_blocking_force_zero_at_rest():
    assert blocking_force(0.0, nice_params()) == 0.0


def test_blocking_force_polynomial_value():
    # 200 * 0.05 + 5e5 * 0.05^3 = 10 + 62.5
    assert blocking_force(0.05, nice_params()) == pytest.approx(72.5, abs=1e-9)


def test_blocking_force_strictly_increasing():
    rng = np.random.default_rng(4)
    for _ in range(20):
        p = nice_params(k1_block=rng.uniform(50, 500), k3_block=rng.uniform(0, 1e6))
        assert blocking_force(0.06, p) > blocking_force(0.05, p)


def test_blocking_force_range_check():
    p = nice_params()
    with pytest.raises(ExtensionOutOfRange):
        blocking_force(-0.01, p)
    with pytest.raises(ExtensionOutOfRange):
        blocking_force(p.x_block_max + 1e-6, p)


# --- parameter and state validation ---

def test_params_reject_nonpositive_and_wrong_flyweight_count():
    with pytest.raises(InvalidSpec):
        DeviceParams(r_capstan=0.0)
    with pytest.raises(InvalidSpec):
        DeviceParams(n_fly=3)
    with pytest.raises(InvalidSpec):
        DeviceParams(L_max=0.5)  # travel requirement is >= 0.60 m


def test_state_invariants():
    with pytest.raises(StateInvariantViolation):
        DeviceState(L=-0.1)
    with pytest.raises(StateInvariantViolation):
        DeviceState(mode=DeviceMode.TRANSPARENT, x_block=0.01)


def test_step_input_must_be_finite():
    with pytest.raises(NonFiniteInput):
        StepInput(float("nan"))


def test_step_rejects_bad_dt_and_inconsistent_state():
    p = nice_params()
    with pytest.raises(InvalidDt):
        step(DeviceState(), StepInput(0.1), p, 0.0)
    with pytest.raises(StateInvariantViolation):
        step(DeviceState(L=p.L_max + 0.01), StepInput(0.1), p, DT)


# --- step ---

def test_slow_constant_pull_integrates_payout():
    # kinematic oracle: 2 s at 0.3 m/s -> 0.6 m, well under the 0.9 m/s lock
    p = nice_params()
    state = DeviceState(t=-DT)
    for _ in range(500):
        state = step(state, StepInput(0.3), p, DT)
    assert state.mode is DeviceMode.TRANSPARENT
    assert state.events == ()
    assert state.L == pytest.approx(0.6, abs=1e-9)


def test_ramp_locks_at_first_sample_over_threshold():
    p = nice_params()
    t = np.arange(300) / RATE
    v = 1.2 * t  # reaches 1.2 m/s at 1 s
    trace, events = simulate(v, p, sample_rate=RATE)
    expected = int(np.argmax(v >= threshold_velocity(p)))
    locks = [e for e in events if e.kind is ModeChangeKind.LOCK]
    assert len(locks) == 1
    first_locked = int(np.argmax(trace.mode == "L"))
    assert first_locked == expected
    assert locks[0].t == pytest.approx(trace.t[expected], abs=1e-12)


def test_locked_retraction_unwinds_then_resets():
    p = nice_params()
    v = np.concatenate([np.full(50, 1.0), np.full(200, -0.2)])
    trace, events = simulate(v, p, sample_rate=RATE)
    kinds = [e.kind for e in events]
    assert kinds == [ModeChangeKind.LOCK, ModeChangeKind.RESET]
    reset_t = events[1].t
    # reset happens once x_block has decayed to zero under retraction
    i_reset = int(np.searchsorted(trace.t, reset_t - 1e-12))
    assert trace.x_block_m[i_reset] == 0.0
    assert trace.mode[i_reset] == "T"
    assert np.all(trace.mode[i_reset:] == "T")


def test_definite_stop_freezes_payout():
    p = nice_params()
    v = np.full(200, 1.0)  # locks immediately, spring maxes after 0.08 m
    trace, events = simulate(v, p, sample_rate=RATE)
    stopped = trace.x_block_m >= p.x_block_max
    assert stopped.any()
    i0 = int(np.argmax(stopped))
    assert np.all(trace.x_block_m[i0:] == p.x_block_max)
    assert np.all(trace.length_m[i0:] == trace.length_m[i0])
    assert np.all(trace.tension_N[i0:] == trace.tension_N[i0])


def test_travel_clamps():
    p = nice_params()
    v = np.concatenate([np.full(100, -0.5), np.full(2000, 0.5), np.full(100, -0.5)])
    trace, _ = simulate(v, p, sample_rate=RATE)
    assert trace.length_m.min() >= 0.0
    assert trace.length_m.max() <= p.L_max


def test_tension_continuous_across_lock_transition():
    p = nice_params()
    t = np.arange(500) / RATE
    v = 1.5 * t
    trace, events = simulate(v, p, sample_rate=RATE)
    i = int(np.argmax(trace.mode == "L"))
    jump = trace.tension_N[i] - trace.tension_N[i - 1]
    coil_inc = p.k_coil * (trace.length_m[i] - trace.length_m[i - 1]) / p.r_capstan**2
    # at the transition sample the blocking spring is still unloaded
    assert trace.x_block_m[i] == 0.0
    assert jump == pytest.approx(coil_inc, abs=1e-12)
    # the next step loads the spring by at most one integration increment
    v_next = trace.velocity_mps[i + 1]
    bound = blocking_force(min(v_next * DT, p.x_block_max), p)
    coil_next = p.k_coil * (trace.length_m[i + 1] - trace.length_m[i]) / p.r_capstan**2
    assert trace.tension_N[i + 1] - trace.tension_N[i] <= bound + coil_next + 1e-12


def test_relock_while_locked_is_noop():
    p = nice_params()
    v = np.full(100, 1.2)  # stays far above threshold throughout
    _, events = simulate(v, p, sample_rate=RATE)
    assert [e.kind for e in events] == [ModeChangeKind.LOCK]


def test_two_fall_episodes_give_two_locks_two_resets():
    p = nice_params()
    episode = np.concatenate([np.linspace(0.0, 1.2, 75), np.full(50, 1.2), np.full(150, -0.4)])
    trace, events = simulate(np.concatenate([episode, episode]), p, sample_rate=RATE)
    kinds = [e.kind for e in events]
    assert kinds == [ModeChangeKind.LOCK, ModeChangeKind.RESET] * 2


def test_mode_transition_soundness_against_trace_scan():
    # brute-force scan of the trace must reproduce the event list exactly
    p = nice_params()
    rng = np.random.default_rng(17)
    v = np.clip(np.cumsum(rng.normal(scale=0.12, size=1500)), -2.0, 2.0)
    trace, events = simulate(v, p, sample_rate=RATE)

    rebuilt = []
    prev = "T"
    for i in range(len(trace)):
        if trace.mode[i] != prev:
            kind = ModeChangeKind.LOCK if trace.mode[i] == "L" else ModeChangeKind.RESET
            rebuilt.append((trace.t[i], kind))
        if trace.mode[i] == "L" and prev == "T":
            omega = capstan_omega(trace.velocity_mps[i], p.r_capstan)
            assert lock_condition(omega, p)
        prev = trace.mode[i]
    assert [(e.t, e.kind) for e in events] == rebuilt


def test_threshold_consistency_on_slow_ramp():
    p = nice_params()
    slope = 0.25
    t = np.arange(1500) / RATE
    v = slope * t
    trace, events = simulate(v, p, sample_rate=RATE)
    locks = [e for e in events if e.kind is ModeChangeKind.LOCK]
    i = int(np.argmax(trace.mode == "L"))
    assert len(locks) == 1
    assert abs(trace.velocity_mps[i] - threshold_velocity(p)) <= slope / RATE + 1e-12


def test_simulate_zero_velocity_is_inert():
    trace, events = simulate(np.zeros(100), nice_params(), sample_rate=RATE)
    assert events == []
    assert np.all(trace.length_m == 0.0)
    assert np.all(trace.mode == "T")
    assert np.all(trace.tension_N == trace.tension_N[0])


def test_simulate_accepts_cable_series(anchor, radial_lean):
    from torsolock import trajectory_to_cable

    cable = trajectory_to_cable(radial_lean, anchor)
    trace, events = simulate(cable, nice_params())
    assert events == []
    assert trace.length_m.max() == pytest.approx(0.58, abs=1e-3)
    with pytest.raises(InvalidSpec):
        simulate(cable, nice_params(), sample_rate=100.0)


def test_tension_model():
    p = nice_params()
    assert transparent_tension(0.0, p) == pytest.approx(p.tau0_coil / p.r_capstan, abs=1e-12)
    locked = DeviceState(mode=DeviceMode.LOCKED, L=0.1, x_block=0.05, t=0.0)
    expected = transparent_tension(0.1, p) + blocking_force(0.05, p)
    assert cable_tension(locked, p) == pytest.approx(expected, abs=1e-12)


def test_simulation_is_deterministic_bytewise(tmp_path):
    p = nice_params()
    rng_v = np.concatenate([np.linspace(0, 1.1, 300), np.full(100, -0.3), np.zeros(50)])
    paths = []
    for name in ("a.csv", "b.csv"):
        trace, _ = simulate(rng_v, p, sample_rate=RATE)
        path = tmp_path / name
        write_trace(trace, path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
