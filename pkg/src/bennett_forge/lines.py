"""Spatial lines in Pluecker coordinates and line-pair geometry.

Convention: a line through point c with unit direction d has moment
m = c x d, so the Pluecker condition is d . m = 0 and the point of the line
closest to the origin is d x m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dqcore import DEFAULT_TOL, apply_pose
from .errors import CoincidentAxes


@dataclass(frozen=True)
class LinePlucker:
    """Oriented spatial line: unit direction, moment = point x direction."""

    direction: tuple
    moment: tuple

    @classmethod
    def from_point_direction(cls, point, direction):
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0.0:
            raise ValueError("zero direction")
        d = d / n
        m = np.cross(np.asarray(point, dtype=float), d)
        return cls(tuple(d), tuple(m))

    @classmethod
    def from_arrays(cls, direction, moment):
        return cls(tuple(np.asarray(direction, dtype=float)),
                   tuple(np.asarray(moment, dtype=float)))

    @property
    def d(self):
        return np.asarray(self.direction)

    @property
    def m(self):
        return np.asarray(self.moment)

    def point(self):
        """Point on the line closest to the origin."""
        return np.cross(self.d, self.m)

    def plucker_defect(self):
        """|d . m| (zero for a genuine line) plus unit-direction defect."""
        return abs(float(self.d @ self.m)) + abs(float(np.linalg.norm(self.d)) - 1.0)

    def reversed(self):
        return LinePlucker(tuple(-self.d), tuple(-self.m))

    def transformed(self, T):
        """Image of the line under the rigid pose matrix T."""
        T = np.asarray(T)
        R = T[:3, :3]
        d = R @ self.d
        p = apply_pose(T, self.point())
        return LinePlucker(tuple(d), tuple(np.cross(p, d)))

    def same_line(self, other, atol=1e-9):
        """True if both describe the same (unoriented) line."""
        for sign in (1.0, -1.0):
            if (np.max(np.abs(self.d - sign * other.d)) <= atol
                    and np.max(np.abs(self.m - sign * other.m)) <= atol):
                return True
        return False

    def distance_to_point(self, p):
        return float(np.linalg.norm(np.cross(self.d, np.asarray(p) - self.point())))


def reciprocal_product(a, b):
    """Mutual moment d_a . m_b + d_b . m_a; zero iff the lines meet."""
    return float(a.d @ b.m + b.d @ a.m)


@dataclass(frozen=True)
class CommonPerpendicular:
    """Common perpendicular data between two axis lines.

    distance: perpendicular distance (>= 0)
    twist: signed angle from line 1's direction to line 2's, right-handed
      about the perpendicular oriented from foot1 to foot2
    foot1, foot2: perpendicular feet on the two lines
    parallel: True when directions are (anti)parallel (feet not unique)
    """

    distance: float
    twist: float
    foot1: tuple
    foot2: tuple
    parallel: bool = False

    @property
    def normal(self):
        f1, f2 = np.asarray(self.foot1), np.asarray(self.foot2)
        gap = f2 - f1
        n = np.linalg.norm(gap)
        return gap / n if n > 0 else gap


def common_perpendicular(L1, L2, tol=DEFAULT_TOL, intersect_eps=1e-7):
    """Feet, distance and signed twist between two axis lines.

    Distances below ``intersect_eps`` are snapped to zero (intersecting
    axes). Raises CoincidentAxes when the lines coincide.
    """
    d1, d2 = L1.d, L2.d
    p1, p2 = L1.point(), L2.point()
    c = float(d1 @ d2)
    w = p2 - p1
    den = 1.0 - c * c
    if den < 1e-14:
        # parallel directions
        off = w - (w @ d1) * d1
        dist = float(np.linalg.norm(off))
        if dist <= intersect_eps:
            raise CoincidentAxes("axes coincide")
        twist = 0.0 if c > 0 else math.pi
        return CommonPerpendicular(dist, twist, tuple(p1), tuple(p1 + off),
                                   parallel=True)
    s1 = (float(w @ d1) - c * float(w @ d2)) / den
    s2 = (c * float(w @ d1) - float(w @ d2)) / den
    f1 = p1 + s1 * d1
    f2 = p2 + s2 * d2
    gap = f2 - f1
    dist = float(np.linalg.norm(gap))
    if dist > intersect_eps:
        n = gap / dist
    else:
        dist = 0.0
        n = np.cross(d1, d2)
        n = n / np.linalg.norm(n)
    twist = math.atan2(float(np.cross(d1, d2) @ n), c)
    return CommonPerpendicular(dist, twist, tuple(f1), tuple(f2))


def collinearity_defect(points):
    """Relative RMS deviation of points from their best-fit line.

    0 for exactly collinear points; ~0.5 for a square-ish spread. Scale
    free (normalized by the largest principal extent).
    """
    X = np.asarray(points, dtype=float)
    X = X - X.mean(axis=0)
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(math.sqrt(float(np.sum(s[1:] ** 2))) / s[0])
