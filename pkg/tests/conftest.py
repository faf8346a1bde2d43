import math

import numpy as np
import pytest

from bennett_forge.dqcore import DualQuaternion, Quaternion, dq_from_pose, pose_matrix
from bennett_forge.lines import LinePlucker
from bennett_forge.quad import QuadSpec, apply_twist
from bennett_forge.synthesis import RotationFactor, rotation_factor_about, synthesize_stroke_linkage

# Reference wing design (demo dataset used throughout the suite).
# Translations here are in the source's original length unit; the mm variant
# scales them by 1000.
POSE_B = np.array([
    [0.592, -0.103, -0.799, 0.030],
    [0.571, 0.753, 0.326, 0.018],
    [0.569, -0.649, 0.505, -0.012],
    [0.0, 0.0, 0.0, 1.0],
])
POSE_C = np.array([
    [1.0, 0.0, 0.0, 0.065],
    [0.0, 0.28, 0.96, 0.0],
    [0.0, -0.96, 0.28, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])

# printed reference motion polynomial (ascending coefficients, 8-vectors)
REFERENCE_MOTION = [
    np.array([0.8087, -0.6065, 0.0, 0.0, -0.0197, -0.0263, 0.0, 0.0]),
    np.array([0.0052, -0.0140, -0.8702, 0.4286, 0.0, 0.0004, -0.0136, 0.0184]),
    np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
]

REFERENCE_DH_LENGTHS = (32.5, 54.2)      # mm
REFERENCE_DH_TWISTS_DEG = (91.5, 143.1)  # |twist| values, unit-pair with lengths crosswise

DEMO_QUADSPEC = dict(a0=80.0, bennett_ratio=0.5, z1=10.0, z2=40.0, z3=-50.0,
                     alpha0=math.radians(10.0))


def mm(T):
    out = np.array(T, dtype=float)
    out[:3, 3] *= 1000.0
    return out


def random_rotation(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    from bennett_forge.dqcore import quaternion_to_rotation
    return quaternion_to_rotation(Quaternion(*v))


def random_pose(rng, tmax=1.0):
    return pose_matrix(random_rotation(rng), rng.uniform(-tmax, tmax, 3))


def random_dq_pose(rng, tmax=1.0):
    return dq_from_pose(random_pose(rng, tmax))


def random_line(rng, span=1.0):
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    return LinePlucker.from_point_direction(rng.uniform(-span, span, 3), d)


def random_rotation_factor(rng, span=1.0):
    return rotation_factor_about(random_line(rng, span),
                                 offset=rng.uniform(-1.5, 1.5),
                                 rate=rng.uniform(0.2, 2.0))


@pytest.fixture(scope="session")
def stroke_linkage():
    """Reference stroke linkage synthesized in mm."""
    return synthesize_stroke_linkage(np.eye(4), mm(POSE_B), mm(POSE_C))


@pytest.fixture(scope="session")
def stroke_linkage_raw():
    """Reference stroke linkage in the source's original units."""
    return synthesize_stroke_linkage(np.eye(4), POSE_B, POSE_C)


@pytest.fixture(scope="session")
def demo_twisted():
    return apply_twist(QuadSpec(**DEMO_QUADSPEC))


@pytest.fixture(scope="session")
def demo_assembly(stroke_linkage, demo_twisted):
    from bennett_forge.kinematics import WingAssembly

    return WingAssembly(
        stroke=stroke_linkage,
        mount=DualQuaternion.identity(),
        folding=demo_twisted.linkage,
        wing_points=demo_twisted.attachments_home,
        folded_parameter=demo_twisted.folded_parameter,
    )


def pytest_runtest_logreport(report):
    # one visible PASS/FAIL line per acceptance criterion (pytest -s / -v)
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {outcome}")
