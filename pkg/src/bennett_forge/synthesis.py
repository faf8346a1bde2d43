"""Spatial 4R (Bennett) synthesis: three-pose motion interpolation, motion
factorization into rotation factors, axis extraction and DH recovery.

Pipeline: three poses -> quadratic motion polynomial on the pose quadric ->
two factorizations into linear rotation factors -> four joint axes -> DH
parameters. Parameter convention for the three input poses: the first pose
is reached at t = infinity (it is carried by the leading coefficient), the
second at t = 1, the third at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dqcore import (
    DEFAULT_TOL,
    DQ_ONE,
    DualQuaternion,
    MotionPolynomial,
    Quaternion,
    T_INFINITY,
    dq_from_pose,
    is_infinite,
    linear_factor,
    orthogonalize_pose,
)
from .errors import (
    CoincidentAxes,
    CollinearPoses,
    DegenerateNorm,
    NoBennettMotion,
    NonQuadratic,
    OffQuadric,
    PureTranslationFactor,
)
from .lines import LinePlucker, common_perpendicular


def wrap_angle(theta):
    """Wrap into (-pi, pi]."""
    out = math.fmod(theta + math.pi, 2.0 * math.pi)
    if out <= 0.0:
        out += 2.0 * math.pi
    return out - math.pi


# ---------------------------------------------------------------------------
# rotation factors


@dataclass(frozen=True)
class RotationFactor:
    """A linear factor (t - h) whose normalized value is a fixed-axis rotation.

    For h = a + x*(d - eps*m) with a the scalar offset, x > 0 the rate and
    (d, m) the unit Pluecker axis, the displacement at parameter t is the
    rotation about that axis by

        theta(t) = wrap(-2 * atan2(x, t - a)),

    monotone increasing from -2pi to 0 as t runs over the real line, with
    theta(inf) = 0 (identity).
    """

    h: DualQuaternion

    @property
    def offset(self):
        return self.h.primal.w

    @property
    def rate(self):
        return float(np.linalg.norm(self.h.primal.vec))

    def axis(self, tol=DEFAULT_TOL):
        return extract_axis(self, tol)

    def value(self, t):
        """The dual quaternion (t - h) (projective; not normalized)."""
        if is_infinite(t):
            return DQ_ONE
        return DualQuaternion(Quaternion(float(t)), Quaternion()) - self.h

    def angle_at(self, t):
        """Rotation angle in (-pi, pi] of the displacement at parameter t."""
        if is_infinite(t):
            return 0.0
        return wrap_angle(-2.0 * math.atan2(self.rate, float(t) - self.offset))

    def unwrapped_angle_at(self, t):
        """Angle in (-2pi, 0], continuous over t in R, 0 at t = infinity."""
        if is_infinite(t):
            return 0.0
        return -2.0 * math.atan2(self.rate, float(t) - self.offset)

    def t_of_angle(self, theta):
        """Inverse of unwrapped_angle_at on (-2pi, 0]; 0 maps to T_INFINITY."""
        theta = math.fmod(float(theta), 2.0 * math.pi)
        if theta > 0.0:
            theta -= 2.0 * math.pi
        if theta == 0.0:
            return T_INFINITY
        return self.offset + self.rate / math.tan(-theta / 2.0)


def joint_angle_from_factor(factor, t):
    """Rotation angle of the factor's displacement at parameter t.

    Agrees in magnitude with the angle recovered from the rotation-matrix
    trace of the mapped pose; continuous and monotone on each side of
    t = offset (where it passes the half turn).
    """
    return factor.angle_at(t)


def extract_axis(factor, tol=DEFAULT_TOL):
    """Fixed line of the rotation represented by (t - h).

    With the package's pose embedding, a rotation about the line (d, m) by
    angle phi has h = cos(phi/2) + sin(phi/2)*(d - eps*m); the axis is read
    off the primal vector and the negated dual vector.
    """
    h = factor.h
    scale = max(h.norm8(), 1.0)
    pv = h.primal.vec
    x = float(np.linalg.norm(pv))
    if x <= 1e3 * tol.floor(scale):
        raise PureTranslationFactor("factor has no rotational part")
    if abs(h.dual.w) > 1e-6 * scale:
        raise OffQuadric(
            f"factor dual scalar {h.dual.w:.3g} is not zero; not a pure rotation factor")
    return LinePlucker.from_arrays(pv / x, -h.dual.vec / x)


def rotation_factor_about(line, offset=0.0, rate=1.0):
    """Rotation factor with the given axis, scalar offset and rate."""
    d, m = line.d, line.m
    return RotationFactor(DualQuaternion(
        Quaternion(offset, *(rate * d)), Quaternion(0.0, *(-rate * m))))


# ---------------------------------------------------------------------------
# three-pose interpolation


def _study_bilinear(a, b):
    return 0.5 * (a.primal.dot(b.dual) + b.primal.dot(a.dual))


def interpolate_three_poses(T0, T1, T2, tol=DEFAULT_TOL):
    """Quadratic rational motion through three poses.

    The three poses span a projective plane in dual quaternion space; the
    plane cuts the pose quadric in a conic, parameterized so that
    C(inf) ~ T0, C(1) ~ T1, C(0) ~ T2. With x_i the unit pose
    representatives, the curve is

        C(t) = alpha*t*(t-1)*x0 + beta*t*x1 + (t-1)*x2

    and forcing the quadric equation S(C(t)) = 0 coefficient-wise yields
    the linear conditions alpha = -B12/B01, beta = -B02/B01 in terms of the
    quadric's bilinear form B_ij = B(x_i, x_j). Degenerate data raises
    CollinearPoses (projectively dependent poses) or NoBennettMotion (the
    linear system is singular).

    The result is scaled so the leading coefficient is exactly x0 (hence
    monic when T0 is the identity).
    """
    xs = [dq_from_pose(orthogonalize_pose(np.asarray(T, dtype=float)), tol).normalized()
          for T in (T0, T1, T2)]
    M = np.array([x.as_array() for x in xs])
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[2] <= 1e-9 * sv[0]:
        raise CollinearPoses("the three poses are projectively dependent")

    B01 = _study_bilinear(xs[0], xs[1])
    B02 = _study_bilinear(xs[0], xs[2])
    B12 = _study_bilinear(xs[1], xs[2])
    if min(abs(B01), abs(B02), abs(B12)) <= 1e-12:
        raise NoBennettMotion(
            "conic through the poses degenerates (singular coefficient system)")
    alpha = -B12 / B01
    beta = -B02 / B01

    x0, x1, x2 = xs
    c2 = x0 * alpha
    c1 = x0 * (-alpha) + x1 * beta + x2
    c0 = -x2
    C = MotionPolynomial([c0 * (1.0 / alpha), c1 * (1.0 / alpha), c2 * (1.0 / alpha)])

    if C.max_study_residual() > 1e-9:
        raise NoBennettMotion(
            f"interpolant violates the pose quadric identically "
            f"(residual {C.max_study_residual():.3g})")
    return C


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorizations:
    """Both factorizations C = leading*(t-h1)(t-h2) = leading*(t-k1)(t-k2).

    pair_a/pair_b are (left factor, right factor) tuples of RotationFactor.
    The pair order is deterministic: pair_a comes from the real quadratic
    factor of the norm polynomial with the smaller constant term.
    """

    leading: DualQuaternion
    pair_a: tuple
    pair_b: tuple

    def remultiplied(self, which="a"):
        h1, h2 = self.pair_a if which == "a" else self.pair_b
        prod = linear_factor(h1.h) * linear_factor(h2.h)
        return prod.left_multiplied(self.leading)

    @property
    def factors(self):
        return (*self.pair_a, *self.pair_b)


def _real_quadratic_factors(nu, tol=DEFAULT_TOL):
    """Split a real quartic (ascending coeffs) into two real monic quadratics.

    Requires two distinct complex-conjugate root pairs; the two quadratics
    are ordered by ascending constant term.
    """
    nu = np.asarray(nu, dtype=float)
    nu = nu / nu[-1]
    roots = np.roots(nu[::-1])
    scale = max(1.0, float(np.max(np.abs(roots))))
    upper = sorted([z for z in roots if z.imag > 0], key=lambda z: abs(z) ** 2)
    if len(upper) != 2:
        raise DegenerateNorm(
            "norm polynomial has real roots; no real rotation-factor splitting")
    if abs(upper[0] - upper[1]) <= 1e-7 * scale:
        raise DegenerateNorm("norm polynomial has a repeated quadratic factor")
    quads = [np.array([abs(z) ** 2, -2.0 * z.real, 1.0]) for z in upper]
    if abs(quads[0][0] - quads[1][0]) < 1e-12 * scale * scale:
        quads.sort(key=lambda q: q[1])
    return quads


def factorize_motion(C, tol=DEFAULT_TOL):
    """Factor a quadratic motion polynomial into rotation-factor pairs.

    For each real quadratic factor M of the norm polynomial nu = C*conj(C):
    the linear remainder R = C mod M has the unique right zero
    h2 = -R1^-1 R0, and right division of C by (t - h2) yields the left
    factor. The two quadratic factors of nu give the two factorizations of
    the same motion (the two dyads of the realizing 4R loop).

    A non-identity (invertible) leading coefficient c is split off first;
    the factor pairs then satisfy C = c*(t-h1)(t-h2) = c*(t-k1)(t-k2).
    """
    C = C.trimmed(atol=1e-12 * C.max_coeff_norm())
    if C.degree != 2:
        raise NonQuadratic(f"degree {C.degree} motion polynomial")
    scale = C.max_coeff_norm()
    if C.max_study_residual() > 1e-8:
        raise OffQuadric(
            f"not a motion polynomial: quadric residual {C.max_study_residual():.3g}")

    lead = C.leading
    if lead.primal.norm() <= 1e3 * tol.floor(scale):
        raise NonQuadratic("leading coefficient has (numerically) zero primal part")
    Chat = C.left_multiplied(lead.inverse())

    nu, off = Chat.norm_polynomial()
    if off > 1e-8 * max(abs(v) for v in nu):
        raise OffQuadric(f"norm polynomial is not real (off-real {off:.3g})")

    pairs = []
    c0, c1 = Chat.coefficients[0], Chat.coefficients[1]
    for M in _real_quadratic_factors(nu, tol):
        R1 = c1 - DQ_ONE * float(M[1])
        R0 = c0 - DQ_ONE * float(M[0])
        if R1.primal.norm() <= 1e3 * tol.floor(scale):
            raise DegenerateNorm("linear remainder is not invertible")
        h2 = -(R1.inverse() * R0)
        h1 = -c1 - h2
        pairs.append((RotationFactor(h1), RotationFactor(h2)))

    fac = Factorizations(lead, pairs[0], pairs[1])
    for which in "ab":
        err = _poly_distance(fac.remultiplied(which), C)
        if err > 1e-7 * scale:
            raise DegenerateNorm(
                f"factorization {which} failed roundtrip (error {err:.3g})")
    return fac


def _poly_distance(A, B):
    n = max(len(A.coefficients), len(B.coefficients))
    d = 0.0
    for i in range(n):
        a = A.coefficients[i].as_array() if i < len(A.coefficients) else np.zeros(8)
        b = B.coefficients[i].as_array() if i < len(B.coefficients) else np.zeros(8)
        d = max(d, float(np.max(np.abs(a - b))))
    return d


# ---------------------------------------------------------------------------
# DH extraction


@dataclass(frozen=True)
class BennettDH:
    """Alternating DH link data (a0, alpha0, a1, alpha1), joint offsets zero.

    Lengths are positive; twists are stored as positive angles in (0, pi)
    (the sign convention of the underlying extraction is right-handed about
    the foot-to-foot perpendicular; reversing an axis orientation flips a
    twist to its supplement, so only magnitudes are canonical here).
    d_residual and alternation_defect report how well the four axes close a
    Bennett loop; degenerate flags planar/spherical special cases.
    """

    a0: float
    alpha0: float
    a1: float
    alpha1: float
    d_residual: float = 0.0
    alternation_defect: float = 0.0
    degenerate: str = ""

    def lengths(self):
        return (self.a0, self.a1, self.a0, self.a1)

    def twists(self):
        return (self.alpha0, self.alpha1, self.alpha0, self.alpha1)


def check_bennett_condition(dh):
    """Scale-free residual |sin(alpha0)*a1 - sin(alpha1)*a0| / max(a0, a1)."""
    return abs(math.sin(dh.alpha0) * dh.a1 - math.sin(dh.alpha1) * dh.a0) / max(dh.a0, dh.a1)


def axes_to_dh(axes, tol=DEFAULT_TOL, intersect_eps=1e-7):
    """DH parameters of a cyclic 4-axis loop.

    a_i is the common-perpendicular distance between axis i and i+1;
    alpha_i the twist between their directions (magnitude; the signed value
    is right-handed about the perpendicular oriented from axis i to i+1).
    Joint offsets d_i (gap along axis i between the feet of the two
    adjacent perpendiculars) are verified to be ~0 and reported as
    d_residual.
    """
    if len(axes) != 4:
        raise ValueError("need exactly 4 axes")
    perps = []
    for i in range(4):
        try:
            perps.append(common_perpendicular(axes[i], axes[(i + 1) % 4], tol,
                                              intersect_eps))
        except CoincidentAxes:
            raise CoincidentAxes(f"axes {i} and {(i + 1) % 4} coincide")
    a = [p.distance for p in perps]
    al = [p.twist for p in perps]
    d_res = 0.0
    for i in range(4):
        incoming = np.asarray(perps[(i - 1) % 4].foot2)
        outgoing = np.asarray(perps[i].foot1)
        d_res = max(d_res, abs(float((outgoing - incoming) @ axes[i].d)))

    alt = max(abs(a[0] - a[2]), abs(a[1] - a[3]),
              abs(abs(al[0]) - abs(al[2])), abs(abs(al[1]) - abs(al[3])))
    degenerate = ""
    if all(min(abs(x), abs(abs(x) - math.pi)) < 1e-8 for x in al):
        degenerate = "planar"
    elif all(x < intersect_eps for x in a):
        degenerate = "spherical"
    return BennettDH(a0=a[0], alpha0=abs(al[0]), a1=a[1], alpha1=abs(al[1]),
                     d_residual=d_res, alternation_defect=alt,
                     degenerate=degenerate)


# ---------------------------------------------------------------------------
# linkage assembly


@dataclass(frozen=True)
class BennettLinkage:
    """A realized Bennett loop.

    axes: the four joint lines in the base frame at the home configuration,
      in loop order with axes[0] and axes[1] fixed to the base (the base
      link runs between them).
    dh: extracted DH data. home_coupler: the absolute coupler pose at home.
    motion: the relative coupler motion polynomial, identity at t =
      infinity; the absolute coupler pose at t is motion(t)*home_coupler.
    factorization: both rotation-factor pairs of the relative motion (their
      axes are the world-frame joint lines).
    joint_factors: for each loop axis index, (pair, position) locating the
      factor whose angle drives that joint: pair in {"a","b"}, position 0
      for the base-side (left) factor, 1 for the coupler-side (right).
    """

    axes: tuple
    dh: BennettDH
    home_coupler: DualQuaternion
    motion: MotionPolynomial
    factorization: Factorizations
    joint_factors: tuple

    def factor_for_joint(self, i):
        pair, pos = self.joint_factors[i]
        return (self.factorization.pair_a if pair == "a" else self.factorization.pair_b)[pos]

    def axes_at(self, t, tol=DEFAULT_TOL):
        """The four joint lines at motion parameter t (world frame)."""
        from .dqcore import dq_to_pose
        D = dq_to_pose(self.motion.evaluate(t), tol)
        out = []
        for i, (pair, pos) in enumerate(self.joint_factors):
            if pos == 0:
                out.append(self.axes[i])  # base-side axes are fixed
            else:
                out.append(self.axes[i].transformed(D))
        return tuple(out)


def linkage_from_motion(C, tol=DEFAULT_TOL):
    """Realize a quadratic motion polynomial as a Bennett 4R loop.

    The relative motion D(t) = C(t) C(inf)^-1 factors as
    D = (t - g h1 g^-1)(t - g h2 g^-1) = (t - g k1 g^-1)(t - g k2 g^-1)
    with g the home pose and h/k the factors of C; the conjugated factors'
    axes are the world-frame joint lines at home. Loop order is
    (k1, h1, h2, k2): base joints first, then the coupler-side joints.
    """
    fac0 = factorize_motion(C, tol)
    g = fac0.leading
    ginv = g.inverse()

    def conj(f):
        return RotationFactor(g * (f.h * ginv))

    pair_a = (conj(fac0.pair_a[0]), conj(fac0.pair_a[1]))
    pair_b = (conj(fac0.pair_b[0]), conj(fac0.pair_b[1]))
    fac = Factorizations(DQ_ONE, pair_a, pair_b)
    h1, h2 = pair_a
    k1, k2 = pair_b
    motion = linear_factor(h1.h) * linear_factor(h2.h)
    axes = tuple(f.axis(tol) for f in (k1, h1, h2, k2))
    dh = axes_to_dh(axes, tol)
    joint_factors = (("b", 0), ("a", 0), ("a", 1), ("b", 1))
    return BennettLinkage(axes=axes, dh=dh, home_coupler=g,
                          motion=motion, factorization=fac,
                          joint_factors=joint_factors)


def synthesize_stroke_linkage(T0, T1, T2, tol=DEFAULT_TOL):
    """Three poses -> interpolated motion -> factored Bennett linkage."""
    C = interpolate_three_poses(T0, T1, T2, tol)
    return linkage_from_motion(C, tol)


def _rotor_vector(line):
    """Pure dual-vector dual quaternion d - eps*m of a unit line."""
    return DualQuaternion(Quaternion(0.0, *line.d), Quaternion(0.0, *(-line.m)))


def linkage_from_axes(axes, home_coupler=None, tol=DEFAULT_TOL):
    """Rebuild a Bennett loop (and its motion) from its four home axes.

    axes are in loop order with the base pair first (axes[0], axes[1]); the
    dyads are (axes[1], axes[2]) and (axes[0], axes[3]). Writing the two
    dyad products of the relative motion as

        (t - h1)(t - h2) = (t - k1)(t - k2),
        h1 = V1,  h2 = b + y V2,  k1 = c + u V0,  k2 = e + v V3,

    with V_i the unit line rotors (the parameterization freedom is fixed by
    h1 = V1), coefficient matching is linear: the t^1 dual-vector equation
    determines (u, y, v) -- solvable exactly because the four axes of a
    mobile loop are linearly dependent in Pluecker coordinates -- and the
    t^0 primal-vector equation determines (b, c*v, e*u). The result is
    validated by re-multiplying both dyads.

    All-parallel axes (planar four-bar) are rebuilt as the parallelogram
    circular-translation motion instead.
    """
    if len(axes) != 4:
        raise ValueError("need exactly 4 axes")
    L0, L1, L2, L3 = axes
    home = DualQuaternion.identity() if home_coupler is None else home_coupler

    d_all = np.array([a.d for a in axes])
    if np.max(np.linalg.norm(np.cross(d_all[0], d_all[1:]), axis=1)) < 1e-9:
        return _planar_linkage_from_axes(axes, home, tol)

    V = [_rotor_vector(a).as_array() for a in axes]
    M = np.column_stack([V[0][1:], -V[2][1:], V[3][1:]])  # 6x3 (vector rows)
    rhs = V[1][1:]
    sol, res, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    u, y, v = (float(x) for x in sol)
    gap = float(np.linalg.norm(M @ sol - rhs))
    if gap > 1e-6:
        raise CollinearPoses(
            f"axes do not close a mobile loop (Pluecker dependency gap {gap:.3g})")
    if min(abs(u), abs(y), abs(v)) < 1e-12:
        raise DegenerateNorm("degenerate axis configuration (zero factor rate)")

    d0, d1, d2, d3 = (a.d for a in axes)
    A2 = np.column_stack([d1, -d3, -d0])
    rhs2 = u * v * np.cross(d0, d3) - y * np.cross(d1, d2)
    sol2, *_ = np.linalg.lstsq(A2, rhs2, rcond=None)
    b, cv, eu = (float(x) for x in sol2)
    c = cv / v
    e = eu / u

    h1 = RotationFactor(_rotor_vector(L1))
    h2 = RotationFactor(DualQuaternion(Quaternion(b), Quaternion())
                        + _rotor_vector(L2) * y)
    k1 = RotationFactor(DualQuaternion(Quaternion(c), Quaternion())
                        + _rotor_vector(L0) * u)
    k2 = RotationFactor(DualQuaternion(Quaternion(e), Quaternion())
                        + _rotor_vector(L3) * v)

    Ca = linear_factor(h1.h) * linear_factor(h2.h)
    Cb = linear_factor(k1.h) * linear_factor(k2.h)
    scale = Ca.max_coeff_norm()
    err = max(np.max(np.abs((Ca.coefficients[i] - Cb.coefficients[i]).as_array()))
              for i in range(3))
    if err > 1e-6 * scale:
        raise CollinearPoses(
            f"axes are not a consistent mobile loop (dyad mismatch {err:.3g})")

    fac = Factorizations(DQ_ONE, (h1, h2), (k1, k2))
    dh = axes_to_dh(axes, tol)
    joint_factors = (("b", 0), ("a", 0), ("a", 1), ("b", 1))
    return BennettLinkage(axes=tuple(axes), dh=dh, home_coupler=home,
                          motion=Ca, factorization=fac,
                          joint_factors=joint_factors)


def _planar_linkage_from_axes(axes, home, tol):
    from .lines import LinePlucker

    zdir = axes[0].d
    pts = [a.point() for a in axes]
    h1 = RotationFactor(_rotor_vector(axes[1]))
    h2 = RotationFactor(_rotor_vector(
        LinePlucker.from_point_direction(pts[2], -zdir)))
    k1 = RotationFactor(_rotor_vector(axes[0]))
    k2 = RotationFactor(_rotor_vector(
        LinePlucker.from_point_direction(pts[3], -zdir)))
    Ca = linear_factor(h1.h) * linear_factor(h2.h)
    Cb = linear_factor(k1.h) * linear_factor(k2.h)
    err = max(np.max(np.abs((Ca.coefficients[i] - Cb.coefficients[i]).as_array()))
              for i in range(3))
    if err > 1e-6 * Ca.max_coeff_norm():
        raise CollinearPoses("parallel axes do not form a parallelogram loop")
    fac = Factorizations(DQ_ONE, (h1, h2), (k1, k2))
    return BennettLinkage(axes=tuple(axes), dh=axes_to_dh(axes, tol),
                          home_coupler=home, motion=Ca, factorization=fac,
                          joint_factors=(("b", 0), ("a", 0), ("a", 1), ("b", 1)))


def reanchor_motion(C, t_star):
    """Reparameterize so that the configuration at t_star becomes home.

    Returns C' with C'(inf) = identity (numerically), C'(s) running over the
    same motion: s = 1/(t - t_star). The displacement D(s) = C'(s) maps the
    t_star configuration to the configuration at t = t_star + 1/s.
    """
    if C.degree != 2:
        raise NonQuadratic("reanchoring implemented for quadratic motions")
    if is_infinite(t_star):
        return C.right_multiplied(C.leading.inverse())
    g = C.evaluate(t_star)
    ginv = g.inverse()
    c0, c1, c2 = C.coefficients
    t = float(t_star)
    d2 = c2 * (t * t) + c1 * t + c0     # = C(t_star): new leading
    d1 = c2 * (2.0 * t) + c1
    d0 = c2
    out = MotionPolynomial([d0 * 1.0, d1 * 1.0, d2 * 1.0]).right_multiplied(ginv)
    # exact in exact arithmetic; scale so the leading primal is unit
    return MotionPolynomial([c * (1.0 / out.leading.primal.norm())
                             for c in out.coefficients])


def shifted_parameter(t, t_star):
    """Map an original parameter t to the reanchored parameter s."""
    if is_infinite(t_star):
        return t
    if is_infinite(t):
        return 0.0
    if float(t) == float(t_star):
        return T_INFINITY
    return 1.0 / (float(t) - float(t_star))


def reanchor_factorizations(fac, t_star):
    """Factorizations of the reanchored motion, computed analytically.

    With s = 1/(t - t_star) each linear factor transforms as
    (t - h) -> ((t_star - h)s + 1)/s; collecting the constants gives the
    exactly monic factorization

        C'(s) = (s - g B g^-1)(s - g A g^-1),
        A = -(t_star - h2)^-1,
        B = -(t_star - h2)^-1 (t_star - h1)^-1 (t_star - h2),
        g = C(t_star).

    This avoids re-running the numerically sensitive root extraction on the
    reparameterized polynomial (the Moebius map can push the two norm
    quadratics arbitrarily close together).
    """
    if is_infinite(t_star):
        return fac
    t = float(t_star)

    def tv(h):
        return DualQuaternion(Quaternion(t), Quaternion()) - h.h

    def transform(pair):
        h1, h2 = pair
        f1, f2 = tv(h1), tv(h2)
        g = fac.leading * (f1 * f2)
        ginv = g.inverse()
        f2inv = f2.inverse()
        B = -(f2inv * (f1.inverse() * f2))
        A = -f2inv
        return (RotationFactor(g * (B * ginv)), RotationFactor(g * (A * ginv)))

    pair_a = transform(fac.pair_a)
    pair_b = transform(fac.pair_b)
    return Factorizations(DQ_ONE, pair_a, pair_b)


# ---------------------------------------------------------------------------
# DH loop walking (forward assembly)


def _tx(a):
    T = np.eye(4)
    T[0, 3] = a
    return T


def _rx(al):
    T = np.eye(4)
    c, s = math.cos(al), math.sin(al)
    T[1, 1], T[1, 2], T[2, 1], T[2, 2] = c, -s, s, c
    return T


def _rz(th):
    T = np.eye(4)
    c, s = math.cos(th), math.sin(th)
    T[0, 0], T[0, 1], T[1, 0], T[1, 1] = c, -s, s, c
    return T


def dh_loop_frames(lengths, twists, thetas, base_frame=None):
    """Walk a closed DH loop; returns the four joint frames and the closure gap.

    Frame i sits at the perpendicular foot on axis i: z along the axis,
    x along the perpendicular towards axis i+1. The step to frame i+1 is
    Tx(a_i) Rx(alpha_i) Rz(theta_{i+1}); thetas are given in walk order
    (theta_1, theta_2, theta_3, theta_0).
    """
    F = np.eye(4) if base_frame is None else np.asarray(base_frame, dtype=float)
    frames = [F]
    for i in range(4):
        F = F @ _tx(lengths[i]) @ _rx(twists[i]) @ _rz(thetas[i])
        frames.append(F)
    gap = frames[4] - frames[0]
    return frames[:4], float(np.max(np.abs(gap[:3, :])))


def dh_joint_transform(theta, a, alpha, d=0.0):
    """Single DH joint transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    T = _rz(theta)
    T[2, 3] = d
    return T @ _tx(a) @ _rx(alpha)
