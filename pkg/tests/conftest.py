import numpy as np
import pytest

from torsolock import AnchorConfig, FallProfile, LeanProfile, gen_fall, gen_lean

START = np.array([0.5, 0.0, 0.0])
RATE = 250.0


@pytest.fixture
def anchor():
    """Device anchor at the origin, no vest offset; START is radial +x."""
    return AnchorConfig(device_anchor=np.zeros(3))


@pytest.fixture
def radial_lean(anchor):
    """Radial 0.58 m reach, 2 s out, 0.5 s hold: peak speed 0.544 m/s."""
    profile = LeanProfile(direction=np.array([1.0, 0.0, 0.0]), amplitude=0.58,
                          duration=2.0, hold=0.5)
    return gen_lean(profile, anchor, START, RATE)


@pytest.fixture
def fall_16s(anchor):
    """Fall signature at 16 s: 1.0 m/s dip, 0.9 m/s recoil, 0.25 s lobes."""
    profile = FallProfile(onset=16.0, dip_speed=1.0, recoil_speed=0.9)
    return gen_fall(profile, anchor, START, RATE)
