"""Two lock/reset cycles on the bench-prototype threshold.

Drives the device with a velocity staircase (0.3, 0.5, 0.7 m/s, then
retraction) twice in a row, using a mechanism tuned to engage at
62.8 cm/s. The 0.3 and 0.5 m/s pulls run transparent; each 0.7 m/s pull
locks, loads the blocking spring to its stop, and the following
retraction resets the mechanism.
"""

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from torsolock import DeviceParams, TuneTarget, simulate, solve_retention, threshold_velocity

RATE = 250.0

params = solve_retention(TuneTarget(v_star=0.628), DeviceParams())
print(f"retention solved: F_retain = {params.F_retain:.4f} N "
      f"-> threshold {100 * threshold_velocity(params):.1f} cm/s")

t = np.arange(int(4.5 * RATE)) / RATE
episode = np.select([t < 1.0, t < 2.0, t < 3.0], [0.3, 0.5, 0.7], default=-0.3)
v = np.concatenate([episode, episode])

trace, events = simulate(v, params, sample_rate=RATE)
for e in events:
    print(f"  {e.kind.value:>5} at t = {e.t:.3f} s")

fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True)
axes[0].plot(trace.t, trace.velocity_mps, label="commanded cable velocity")
axes[0].axhline(threshold_velocity(params), ls="--", c="grey", label="lock threshold")
axes[0].set_ylabel("velocity [m/s]")
axes[0].legend(loc="lower left")

axes[1].plot(trace.t, trace.length_m, label="cable payout")
axes[1].plot(trace.t, trace.x_block_m, label="blocking-spring extension")
axes[1].set_ylabel("displacement [m]")
axes[1].legend(loc="upper left")

axes[2].plot(trace.t, trace.tension_N, color="tab:red")
axes[2].set_ylabel("cable tension [N]")
axes[2].set_xlabel("time [s]")
for e in events:
    for ax in axes:
        ax.axvline(e.t, color="k", lw=0.6, alpha=0.4)
fig.tight_layout()
fig.savefig("demo_lock_and_reset.png", dpi=120)
print("saved demo_lock_and_reset.png")
