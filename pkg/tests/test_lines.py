import math

import numpy as np
import pytest

from bennett_forge.dqcore import dq_to_pose
from bennett_forge.errors import CoincidentAxes
from bennett_forge.lines import (
    LinePlucker,
    collinearity_defect,
    common_perpendicular,
    reciprocal_product,
)

from conftest import random_dq_pose, random_line


def test_plucker_condition_and_point():
    rng = np.random.default_rng(20)
    for _ in range(50):
        L = random_line(rng, span=5.0)
        assert L.plucker_defect() < 1e-12
        # closest point actually lies on the line and is perpendicular
        p = L.point()
        assert L.distance_to_point(p) < 1e-12
        assert abs(float(p @ L.d)) < 1e-9 or np.linalg.norm(p) < 1e-12


def test_transform_equivariance():
    rng = np.random.default_rng(21)
    for _ in range(30):
        L = random_line(rng, span=2.0)
        T = dq_to_pose(random_dq_pose(rng, tmax=3.0))
        Lt = L.transformed(T)
        # a point on L maps onto Lt
        probe = L.point() + 0.7 * L.d
        mapped = T[:3, :3] @ probe + T[:3, 3]
        assert Lt.distance_to_point(mapped) < 1e-9


def test_common_perpendicular_known_pair():
    # z-axis and a line parallel to y through (5, 0, 0): distance 5,
    # twist = angle from z to y about the (1,0,0) normal = -90 deg
    L1 = LinePlucker.from_point_direction([0, 0, 0], [0, 0, 1])
    L2 = LinePlucker.from_point_direction([5, 0, 0], [0, 1, 0])
    cp = common_perpendicular(L1, L2)
    assert cp.distance == pytest.approx(5.0, abs=1e-12)
    assert cp.twist == pytest.approx(-math.pi / 2, abs=1e-12)
    assert np.asarray(cp.foot1) == pytest.approx([0, 0, 0], abs=1e-12)
    assert np.asarray(cp.foot2) == pytest.approx([5, 0, 0], abs=1e-12)


def test_common_perpendicular_skew_generic():
    rng = np.random.default_rng(22)
    for _ in range(30):
        L1, L2 = random_line(rng, 2.0), random_line(rng, 2.0)
        cp = common_perpendicular(L1, L2)
        if cp.parallel:
            continue
        f1, f2 = np.asarray(cp.foot1), np.asarray(cp.foot2)
        assert L1.distance_to_point(f1) < 1e-9
        assert L2.distance_to_point(f2) < 1e-9
        gap = f2 - f1
        if cp.distance > 1e-9:
            assert abs(float(gap @ L1.d)) < 1e-9
            assert abs(float(gap @ L2.d)) < 1e-9
        # twist angle matches the direction angle
        assert math.cos(cp.twist) == pytest.approx(float(L1.d @ L2.d), abs=1e-9)


def test_parallel_lines():
    L1 = LinePlucker.from_point_direction([0, 0, 0], [0, 0, 1])
    L2 = LinePlucker.from_point_direction([3, 4, 7], [0, 0, 1])
    cp = common_perpendicular(L1, L2)
    assert cp.parallel
    assert cp.distance == pytest.approx(5.0)
    assert cp.twist == 0.0


def test_coincident_axes_raise():
    L1 = LinePlucker.from_point_direction([1, 2, 3], [0, 0, 1])
    L2 = LinePlucker.from_point_direction([1, 2, -8], [0, 0, -1])
    with pytest.raises(CoincidentAxes):
        common_perpendicular(L1, L2)


def test_reciprocal_product_vanishes_for_meeting_lines():
    # two lines through a common point always meet
    rng = np.random.default_rng(23)
    for _ in range(20):
        p = rng.normal(size=3)
        L1 = LinePlucker.from_point_direction(p, rng.normal(size=3))
        L2 = LinePlucker.from_point_direction(p, rng.normal(size=3))
        assert abs(reciprocal_product(L1, L2)) < 1e-9


def test_collinearity_defect():
    pts = [[0, 0, 0], [1, 0, 0], [2, 0, 0], [3.5, 0, 0]]
    assert collinearity_defect(pts) < 1e-15
    square = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
    assert collinearity_defect(square) > 0.4
