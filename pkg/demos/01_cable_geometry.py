"""From body motion to cable kinematics.

Builds a leaning reach and an incipient-fall trajectory, converts both
to cable length and velocity through the straight-segment geometry, and
plots them side by side. Run from the repository root:

    python demos/01_cable_geometry.py
"""

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from torsolock import (
    AnchorConfig,
    FallProfile,
    LeanProfile,
    gen_fall,
    gen_lean,
    trajectory_to_cable,
)

RATE = 250.0

# Device bolted to the chair frame at the origin; the vest anchor sits
# half a metre in front of it at rest.
anchor = AnchorConfig(device_anchor=np.zeros(3))
start = np.array([0.5, 0.0, 0.0])

# A generous forward reach: 0.58 m out in 2 s, half-second dwell, return.
lean = gen_lean(
    LeanProfile(direction=np.array([1.0, 0.0, 0.0]), amplitude=0.58, duration=2.0, hold=0.5),
    anchor,
    start,
    RATE,
)
lean_cable = trajectory_to_cable(lean, anchor)
print(f"lean: {lean.duration:.1f} s, "
      f"payout excursion {100 * (lean_cable.length.max() - lean_cable.length.min()):.1f} cm, "
      f"peak cable velocity {100 * lean_cable.velocity.max():.1f} cm/s")

# An incipient fall 2 s in: 1.0 m/s forward surge, 0.9 m/s correction.
fall = gen_fall(
    FallProfile(onset=2.0, dip_speed=1.0, recoil_speed=0.9), anchor, start, RATE
)
fall_cable = trajectory_to_cable(fall, anchor)
print(f"fall: peak cable velocity {100 * fall_cable.velocity.max():.1f} cm/s, "
      f"sharpest retraction {100 * fall_cable.velocity.min():.1f} cm/s")

fig, axes = plt.subplots(2, 2, figsize=(10, 6), sharex="col")
for col, (name, traj, cable) in enumerate(
    [("lean", lean, lean_cable), ("fall", fall, fall_cable)]
):
    axes[0, col].plot(traj.t, cable.length, color="tab:orange")
    axes[0, col].set_title(f"{name}: cable length")
    axes[0, col].set_ylabel("length [m]")
    axes[1, col].plot(traj.t, cable.velocity, color="tab:blue")
    axes[1, col].set_title(f"{name}: cable velocity (unfiltered)")
    axes[1, col].set_ylabel("velocity [m/s]")
    axes[1, col].set_xlabel("time [s]")
fig.tight_layout()
fig.savefig("demo_cable_geometry.png", dpi=120)
print("saved demo_cable_geometry.png")
