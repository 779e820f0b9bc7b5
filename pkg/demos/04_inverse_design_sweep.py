"""Placing the lock threshold without breaking everyday motion.

Sweeps magnet retention over a grid, evaluates each point against the
built-in suite (daily-living reaches that must run free, falls that
must lock), and prints the resulting operating table.
"""

import numpy as np

from torsolock import (
    AnchorConfig,
    DetectorSpec,
    DeviceParams,
    LeanProfile,
    Scenario,
    TuneTarget,
    default_suite,
    gen_lean,
    solve_retention,
    sweep,
)

RATE = 250.0
anchor = AnchorConfig(device_anchor=np.zeros(3))
start = np.array([0.5, 0.0, 0.0])

suite = default_suite(anchor, start, RATE, n_lean=5, n_fall=5)

# Two brisk reaches on top of the stock suite: 0.65 and 0.75 m/s peaks,
# faster than anyone needs for a shelf but slower than any fall surge.
for i, peak in enumerate([0.65, 0.75]):
    profile = LeanProfile(
        direction=np.array([1.0, 0.0, 0.0]),
        amplitude=0.5,
        duration=1.875 * 0.5 / peak,
        hold=0.3,
    )
    suite.append(Scenario(f"brisk_{i}", gen_lean(profile, anchor, start, RATE), is_fall=False))

print(f"suite: {len(suite)} scenarios "
      f"({sum(not s.is_fall for s in suite)} reaches, {sum(s.is_fall for s in suite)} falls)")

# Retention values that place the threshold at the prototype's 62.8 cm/s,
# the design band edges 80 and 100 cm/s, and its midpoint.
targets = [0.628, 0.8, 0.9, 1.0]
retention = [solve_retention(TuneTarget(v), DeviceParams()).F_retain for v in targets]

rows = sweep({"F_retain": retention}, suite, DeviceParams(), DetectorSpec(), anchor)

print(f"\n{'F_retain [N]':>13} {'v* [cm/s]':>10} {'FP rate':>8} {'miss rate':>10} {'latency [ms]':>13}")
for row in rows:
    s = row.summary
    latency = "-" if s.median_lock_latency_s is None else f"{1000 * s.median_lock_latency_s:.0f}"
    print(f"{row.point['F_retain']:13.4f} {100 * row.v_star:10.1f} "
          f"{s.false_positive_rate:8.2f} {s.miss_rate:10.2f} {latency:>13}")

print("\nHigher retention raises the threshold: false positives fall away first,")
print("then the slowest falls start to slip through. The prototype's 62.8 cm/s")
print("false-triggers on brisk reaches; the 80-100 cm/s band clears them, and the")
print("top of the band already grazes the weakest 1.0 m/s fall surge.")
