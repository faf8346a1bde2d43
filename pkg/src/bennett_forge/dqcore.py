"""Quaternion / dual quaternion / motion polynomial algebra.

Conventions (fixed for the whole package):

* Quaternions are Hamilton quaternions stored as (w, x, y, z).
* A dual quaternion is h = p + eps*q with quaternions p (primal), q (dual)
  and eps^2 = 0. The 8-vector ordering used everywhere (including JSON) is
  [p0, p1, p2, p3, q0, q1, q2, q3].
* A dual quaternion is projective: any nonzero real multiple represents the
  same displacement.
* Pose embedding: for a rotation quaternion p and translation vector t,
      h = p - (eps/2) * t_quat * p,
  i.e. the dual part is MINUS half the translation quaternion times the
  rotation. Translation recovery: t_quat = -2 * q * conj(p) / |p|^2.
  The pure translation by (d, 0, 0) maps to [1,0,0,0, 0,-d/2,0,0].
  With this embedding dual quaternion multiplication corresponds to
  4x4 homogeneous matrix multiplication in the same order.
* Lengths are carried in whatever unit the caller uses (the CLI layer fixes
  millimetres); the algebra is unit-agnostic.

The parameter value "t = infinity" of a motion polynomial is represented by
the distinguished sentinel :data:`T_INFINITY`, never by a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePrimal,
    NonMonicDivisor,
    NonOrthogonalInput,
    OffQuadric,
)


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances with an absolute floor.

    ``floor(scale)`` gives the effective absolute tolerance for a quantity
    of magnitude ``scale``: rel*scale, never below abs_floor.
    """

    rel: float = 1e-9
    abs_floor: float = 1e-12
    orthogonality: float = 1e-6

    def floor(self, scale):
        return max(self.rel * abs(scale), self.abs_floor)


DEFAULT_TOL = Tolerances()


class _Infinity:
    """Distinguished projective parameter value for motion polynomials."""

    __slots__ = ()

    def __repr__(self):
        return "T_INFINITY"

    def __reduce__(self):
        return (_infinity_instance, ())


def _infinity_instance():
    return T_INFINITY


T_INFINITY = _Infinity()


def is_infinite(t):
    """True for the T_INFINITY sentinel (and for float infinities)."""
    return t is T_INFINITY or (isinstance(t, float) and math.isinf(t))


# ---------------------------------------------------------------------------
# quaternions


class Quaternion:
    """Hamilton quaternion w + x*i + y*j + z*k."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        object.__setattr__(self, "w", float(w))
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "y", float(y))
        object.__setattr__(self, "z", float(z))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    # --- construction helpers
    @classmethod
    def from_array(cls, a):
        return cls(a[0], a[1], a[2], a[3])

    @classmethod
    def from_vector(cls, v):
        """Pure quaternion 0 + v."""
        return cls(0.0, v[0], v[1], v[2])

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def vec(self):
        return np.array([self.x, self.y, self.z])

    # --- algebra
    def __mul__(self, other):
        if isinstance(other, Quaternion):
            a, b = self, other
            return Quaternion(
                a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
            )
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __rmul__(self, scalar):
        return self * scalar

    def __add__(self, other):
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def conjugate(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def dot(self, other):
        return (self.w * other.w + self.x * other.x
                + self.y * other.y + self.z * other.z)

    def norm(self):
        return math.sqrt(self.dot(self))

    def inverse(self):
        n2 = self.dot(self)
        if n2 == 0.0:
            raise ZeroDivisionError("inverse of zero quaternion")
        return self.conjugate() * (1.0 / n2)

    def __repr__(self):
        return f"Quaternion({self.w:.6g}, {self.x:.6g}, {self.y:.6g}, {self.z:.6g})"

    def allclose(self, other, atol=1e-12):
        return (abs(self.w - other.w) <= atol and abs(self.x - other.x) <= atol
                and abs(self.y - other.y) <= atol and abs(self.z - other.z) <= atol)


QUAT_ONE = Quaternion(1.0)
QUAT_ZERO = Quaternion()


# ---------------------------------------------------------------------------
# dual quaternions


class DualQuaternion:
    """Dual quaternion h = primal + eps * dual, interpreted projectively."""

    __slots__ = ("primal", "dual")

    def __init__(self, primal=QUAT_ONE, dual=QUAT_ZERO):
        object.__setattr__(self, "primal", primal)
        object.__setattr__(self, "dual", dual)

    def __setattr__(self, name, value):
        raise AttributeError("DualQuaternion is immutable")

    @classmethod
    def identity(cls):
        return cls(QUAT_ONE, QUAT_ZERO)

    @classmethod
    def from_array(cls, a):
        """From the 8-vector [p0..p3, q0..q3]."""
        return cls(Quaternion(a[0], a[1], a[2], a[3]),
                   Quaternion(a[4], a[5], a[6], a[7]))

    def as_array(self):
        return np.concatenate([self.primal.as_array(), self.dual.as_array()])

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            # eps^2 = 0: dual parts never feed back into the primal
            return DualQuaternion(
                self.primal * other.primal,
                self.primal * other.dual + self.dual * other.primal,
            )
        return DualQuaternion(self.primal * other, self.dual * other)

    def __rmul__(self, scalar):
        return self * scalar

    def __add__(self, other):
        return DualQuaternion(self.primal + other.primal, self.dual + other.dual)

    def __sub__(self, other):
        return DualQuaternion(self.primal - other.primal, self.dual - other.dual)

    def __neg__(self):
        return DualQuaternion(-self.primal, -self.dual)

    def conjugate(self):
        """Quaternion conjugation of both parts: h~ = p~ + eps q~."""
        return DualQuaternion(self.primal.conjugate(), self.dual.conjugate())

    def inverse(self):
        """Inverse for invertible primal: (p + eps q)^-1 = p^-1 - eps p^-1 q p^-1."""
        pi = self.primal.inverse()
        return DualQuaternion(pi, -(pi * (self.dual * pi)))

    def norm8(self):
        """Euclidean norm of the 8-vector (projective scale measure)."""
        return math.sqrt(self.primal.dot(self.primal) + self.dual.dot(self.dual))

    def study_residual(self):
        """p0q0 + p1q1 + p2q2 + p3q3; zero exactly on valid displacements."""
        return self.primal.dot(self.dual)

    def normalized(self):
        """Unit-primal representative with a canonical sign.

        The sign is fixed by making the largest-magnitude primal component
        positive, so equal displacements compare equal component-wise.
        """
        n = self.primal.norm()
        if n == 0.0:
            raise DegeneratePrimal("cannot normalize: primal part is zero")
        h = self * (1.0 / n)
        arr = h.primal.as_array()
        if arr[int(np.argmax(np.abs(arr)))] < 0:
            h = -h
        return h

    def allclose(self, other, atol=1e-12):
        return (self.primal.allclose(other.primal, atol)
                and self.dual.allclose(other.dual, atol))

    def projectively_close(self, other, atol=1e-9):
        a = self.normalized().as_array()
        b = other.normalized().as_array()
        return bool(np.max(np.abs(a - b)) <= atol)

    def __repr__(self):
        a = self.as_array()
        return "DualQuaternion([" + ", ".join(f"{v:.6g}" for v in a) + "])"


DQ_ONE = DualQuaternion.identity()
DQ_ZERO = DualQuaternion(QUAT_ZERO, QUAT_ZERO)


def dq_multiply(a, b):
    """Product of two dual quaternions (eps^2 = 0 rule)."""
    return a * b


def study_residual(h):
    """Residual of the pose-validity constraint for h."""
    return h.study_residual()


# ---------------------------------------------------------------------------
# pose matrices (4x4 homogeneous, rotation block orthonormal det +1)


def rotation_to_quaternion(R):
    """Shepperd's method; returns the representative with w >= 0."""
    R = np.asarray(R, dtype=float)
    t = R[0, 0] + R[1, 1] + R[2, 2]
    if t > 0:
        w = math.sqrt(1.0 + t) / 2.0
        q = Quaternion(w,
                       (R[2, 1] - R[1, 2]) / (4 * w),
                       (R[0, 2] - R[2, 0]) / (4 * w),
                       (R[1, 0] - R[0, 1]) / (4 * w))
        return q
    i = int(np.argmax([R[0, 0], R[1, 1], R[2, 2]]))
    j, k = (i + 1) % 3, (i + 2) % 3
    s = math.sqrt(max(R[i, i] - R[j, j] - R[k, k] + 1.0, 0.0)) * 2.0
    comp = [0.0, 0.0, 0.0, 0.0]
    comp[1 + i] = s / 4.0
    comp[0] = (R[k, j] - R[j, k]) / s
    comp[1 + j] = (R[j, i] + R[i, j]) / s
    comp[1 + k] = (R[k, i] + R[i, k]) / s
    q = Quaternion(*comp)
    return -q if q.w < 0 else q


def quaternion_to_rotation(p):
    n = p.norm()
    w, x, y, z = p.w / n, p.x / n, p.y / n, p.z / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def pose_matrix(R, t):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = t
    return T


def orthogonality_defect(T):
    R = np.asarray(T)[:3, :3]
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def orthogonalize_pose(T):
    """Nearest rotation (SVD) in the rotation block; translation untouched."""
    T = np.asarray(T, dtype=float)
    U, _, Vt = np.linalg.svd(T[:3, :3])
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U = U.copy()
        U[:, -1] *= -1
        R = U @ Vt
    return pose_matrix(R, T[:3, 3])


def dq_from_pose(T, tol=DEFAULT_TOL):
    """Map a pose matrix to a unit-primal dual quaternion.

    Inputs within ``tol.orthogonality`` of orthonormal are repaired by one
    SVD orthogonalization pass; worse inputs raise NonOrthogonalInput.
    """
    T = np.asarray(T, dtype=float)
    if orthogonality_defect(T) > tol.orthogonality:
        raise NonOrthogonalInput(
            f"rotation block defect {orthogonality_defect(T):.3g} exceeds "
            f"{tol.orthogonality:.3g}")
    T = orthogonalize_pose(T)
    p = rotation_to_quaternion(T[:3, :3])
    tq = Quaternion.from_vector(T[:3, 3])
    return DualQuaternion(p, -0.5 * (tq * p))


def dq_to_pose(h, tol=DEFAULT_TOL):
    """Inverse of dq_from_pose up to projective scale."""
    scale = h.norm8()
    pn = h.primal.norm()
    if pn <= tol.abs_floor * max(scale, 1.0):
        raise DegeneratePrimal(f"primal norm {pn:.3g} vs scale {scale:.3g}")
    s = h.study_residual()
    if abs(s) > tol.orthogonality * scale * scale:
        raise OffQuadric(f"pose-constraint residual {s:.3g} for scale {scale:.3g}")
    R = quaternion_to_rotation(h.primal)
    tq = -2.0 * (h.dual * h.primal.conjugate())
    return pose_matrix(R, tq.vec / (pn * pn))


def apply_pose(T, point):
    return np.asarray(T)[:3, :3] @ np.asarray(point, dtype=float) + np.asarray(T)[:3, 3]


def transform_point(h, point, tol=DEFAULT_TOL):
    return apply_pose(dq_to_pose(h, tol), point)


# ---------------------------------------------------------------------------
# motion polynomials


class MotionPolynomial:
    """Polynomial in t with dual quaternion coefficients, degree-ascending.

    t is a central (commuting) parameter; coefficients do not commute with
    each other. The curve t -> C(t) is a one-parameter rational motion when
    the norm polynomial C * conj(C) is real.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = tuple(coefficients)
        if not coeffs:
            raise ValueError("empty coefficient list")
        object.__setattr__(self, "coefficients", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("MotionPolynomial is immutable")

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def leading(self):
        return self.coefficients[-1]

    def trimmed(self, atol=0.0):
        """Drop (numerically) zero leading coefficients."""
        coeffs = list(self.coefficients)
        while len(coeffs) > 1 and np.max(np.abs(coeffs[-1].as_array())) <= atol:
            coeffs.pop()
        return MotionPolynomial(coeffs)

    def evaluate(self, t):
        """Horner evaluation; T_INFINITY returns the leading coefficient."""
        if is_infinite(t):
            return self.leading
        t = float(t)
        acc = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            acc = acc * t + c
        return acc

    def __mul__(self, other):
        n = len(self.coefficients) + len(other.coefficients) - 1
        out = [DQ_ZERO] * n
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] = out[i + j] + a * b
        return MotionPolynomial(out)

    def __add__(self, other):
        n = max(len(self.coefficients), len(other.coefficients))
        out = []
        for i in range(n):
            a = self.coefficients[i] if i < len(self.coefficients) else DQ_ZERO
            b = other.coefficients[i] if i < len(other.coefficients) else DQ_ZERO
            out.append(a + b)
        return MotionPolynomial(out)

    def __sub__(self, other):
        return self + (other * -1.0)

    def scaled(self, s):
        return MotionPolynomial([c * s for c in self.coefficients])

    def __rmul__(self, s):
        if isinstance(s, (int, float)):
            return self.scaled(float(s))
        return NotImplemented

    def conjugated(self):
        return MotionPolynomial([c.conjugate() for c in self.coefficients])

    def left_multiplied(self, g):
        return MotionPolynomial([g * c for c in self.coefficients])

    def right_multiplied(self, g):
        return MotionPolynomial([c * g for c in self.coefficients])

    def max_coeff_norm(self):
        return max(c.norm8() for c in self.coefficients)

    def study_coefficients(self):
        """Coefficients of the real polynomial S(C(t)), ascending in t."""
        n = len(self.coefficients)
        out = [0.0] * (2 * n - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(self.coefficients):
                out[i + j] += 0.5 * (a.primal.dot(b.dual) + b.primal.dot(a.dual))
        return out

    def max_study_residual(self):
        """Largest |coefficient| of S(C(t)), relative to ||C||^2."""
        s = self.max_coeff_norm()
        return max(abs(v) for v in self.study_coefficients()) / (s * s)

    def norm_polynomial(self):
        """Real coefficients (ascending) of C * conj(C) and the off-real error.

        Returns (nu, err): nu[k] is the scalar-primal part of the k-th
        coefficient of C*conj(C); err the largest non-scalar magnitude,
        which vanishes exactly when C is a motion polynomial.
        """
        prod = self * self.conjugated()
        nu = []
        err = 0.0
        for c in prod.coefficients:
            arr = c.as_array()
            nu.append(arr[0])
            err = max(err, float(np.max(np.abs(arr[1:]))))
        return nu, err

    def is_monic(self, atol=1e-9):
        return self.leading.allclose(DQ_ONE, atol=atol * max(self.max_coeff_norm(), 1.0))

    def right_divide(self, divisor, tol=DEFAULT_TOL):
        """Right division: self = quotient * divisor + remainder.

        The divisor must be monic (leading coefficient identity). The
        remainder has degree < deg(divisor).
        """
        scale = max(divisor.max_coeff_norm(), 1.0)
        if not divisor.leading.allclose(DQ_ONE, atol=tol.floor(scale) * 1e3):
            raise NonMonicDivisor("divisor leading coefficient must be 1")
        dd = divisor.degree
        rem = list(self.coefficients)
        qn = len(rem) - dd
        if qn <= 0:
            return MotionPolynomial([DQ_ZERO]), MotionPolynomial(rem)
        quot = [DQ_ZERO] * qn
        for k in range(qn - 1, -1, -1):
            c = rem[k + dd]
            quot[k] = c
            # subtract c * t^k * divisor
            for j, dcoef in enumerate(divisor.coefficients):
                rem[k + j] = rem[k + j] - c * dcoef
        return MotionPolynomial(quot), MotionPolynomial(rem[:dd] if dd else [DQ_ZERO])

    def __repr__(self):
        return (f"MotionPolynomial(degree={self.degree}, "
                + ", ".join(f"t^{k}:{c!r}" for k, c in enumerate(self.coefficients)) + ")")


def motionpoly_eval(C, t):
    return C.evaluate(t)


def motionpoly_multiply(A, B):
    return A * B


def motionpoly_right_divide(A, divisor, tol=DEFAULT_TOL):
    return A.right_divide(divisor, tol)


def linear_factor(h):
    """The motion polynomial (t - h)."""
    return MotionPolynomial([-h, DQ_ONE])
