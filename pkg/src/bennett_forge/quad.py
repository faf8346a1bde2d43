"""Folding-linkage construction from quadrilateral design parameters.

A planar rectangle-based four-bar (base length a0, long sides a0/b) with
attachment offsets z1..z3 along the vertical joint axes is the starting
point; injecting a twist alpha0 between the base axes turns it into a
spatial Bennett loop whose motion carries the quadrilateral between an
expanded (area-maximal) and a folded (area-minimal) configuration.

Frozen construction conventions (the source CAD procedure is underdefined;
these were validated against the published example, see project notes):

* joint-1 axis stays vertical through (0, a0, 0); the joint-0 axis passes
  through the origin tilted by -alpha0 about +y (so p0 and p1 stay fixed);
* the DH loop walk uses signed twists (alpha0, -alpha1, alpha0, -alpha1)
  (the unique sign pattern that closes next to the planar rectangle);
* the expanded configuration is the area-maximizing configuration of the
  motion (which degenerates to the planar rectangle as alpha0 -> 0) and the
  folded configuration the area-minimizing one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dqcore import (
    DEFAULT_TOL,
    DualQuaternion,
    T_INFINITY,
    dq_to_pose,
    linear_factor,
)
from .errors import ClosureFailure, InvalidSpec, TwistInfeasible
from .lines import LinePlucker
from .synthesis import (
    BennettLinkage,
    Factorizations,
    axes_to_dh,
    check_bennett_condition,
    dh_loop_frames,
    linkage_from_axes,
    reanchor_factorizations,
    rotation_factor_about,
    shifted_parameter,
)

RECTANGLE_THETA = -math.pi / 2  # joint angles of the planar rectangle


@dataclass(frozen=True)
class QuadSpec:
    """Quadrilateral design parameters.

    a0: base link length; bennett_ratio: b = a0/a1 in (0, 1]; z1..z3:
    attachment offsets along the joint axes; alpha0: twist injected between
    the base joint axes (radians).
    """

    a0: float
    bennett_ratio: float
    z1: float
    z2: float
    z3: float
    alpha0: float = 0.0

    def __post_init__(self):
        if not self.a0 > 0:
            raise InvalidSpec(f"a0 must be positive, got {self.a0}")
        if not 0.0 < self.bennett_ratio <= 1.0:
            raise InvalidSpec(f"bennett_ratio must be in (0, 1], got {self.bennett_ratio}")
        if not 0.0 <= self.alpha0 < math.pi / 2:
            raise InvalidSpec(f"alpha0 must be in [0, pi/2), got {self.alpha0}")
        if abs(math.sin(self.alpha0)) > self.bennett_ratio:
            raise InvalidSpec(
                f"sin(alpha0) = {math.sin(self.alpha0):.4g} exceeds the Bennett "
                f"ratio {self.bennett_ratio:.4g}; twist has no feasible partner")

    @property
    def a1(self):
        return self.a0 / self.bennett_ratio

    @property
    def z_offsets(self):
        return (0.0, self.z1, self.z2, self.z3)


@dataclass(frozen=True)
class QuadConfiguration:
    """Four attachment points with a configuration label."""

    points: tuple        # 4 points, each a 3-tuple
    label: str           # "expanded" | "folded"

    def as_array(self):
        return np.asarray(self.points, dtype=float)


def quad_area(q):
    """Area of a (possibly non planar) quadrilateral: 0.5*|(p2-p0)x(p3-p1)|.

    Exact for planar convex quadrilaterals (equals the shoelace area);
    the standard vector-area magnitude for skew ones.
    """
    pts = q.as_array() if hasattr(q, "as_array") else np.asarray(
        getattr(q, "points", q), dtype=float)
    p0, p1, p2, p3 = pts
    return 0.5 * float(np.linalg.norm(np.cross(p2 - p0, p3 - p1)))


def build_planar_quad(spec):
    """Expanded and folded planar configurations (zero twist).

    expanded: p0=(0,0,0), p1=(0,a0,z1), p2=(a1,a0,z2), p3=(a1,0,z3);
    folded:   p2'=(0,a0+a1,z2), p3'=(0,a1,z3), base points unchanged.
    """
    a0, a1 = spec.a0, spec.a1
    z1, z2, z3 = spec.z1, spec.z2, spec.z3
    expanded = QuadConfiguration(
        ((0.0, 0.0, 0.0), (0.0, a0, z1), (a1, a0, z2), (a1, 0.0, z3)),
        "expanded")
    folded = QuadConfiguration(
        ((0.0, 0.0, 0.0), (0.0, a0, z1), (0.0, a0 + a1, z2), (0.0, a1, z3)),
        "folded")
    return expanded, folded


@dataclass(frozen=True)
class TwistedQuad:
    """Result of injecting the twist: the second twist angle, the expanded
    attachment points, and the realized linkage with its motion-anchored
    attachment data."""

    alpha1: float
    points: tuple                 # expanded configuration attachment points
    linkage: BennettLinkage
    attachments_home: tuple       # same points, home = expanded
    folded_parameter: object      # motion parameter of the folded configuration
    folded_points: tuple
    expanded_area: float
    folded_area: float

    def as_array(self):
        return np.asarray(self.points, dtype=float)


def twist_partner_angle(spec):
    """alpha1 = asin(sin(alpha0)/b); TwistInfeasible outside the domain."""
    s = math.sin(spec.alpha0) / spec.bennett_ratio
    if abs(s) > 1.0:
        raise TwistInfeasible(
            f"sin(alpha0)/b = {s:.4g} is outside [-1, 1]")
    return math.asin(s)


def _base_frame(alpha0):
    z0 = np.array([math.sin(-alpha0), 0.0, math.cos(-alpha0)])
    x0 = np.array([0.0, 1.0, 0.0])
    F = np.eye(4)
    F[:3, 0] = x0
    F[:3, 1] = np.cross(z0, x0)
    F[:3, 2] = z0
    return F


def _dh_step(a, ca, sa, th):
    # Tx(a) Rx(alpha) Rz(theta) composed analytically
    ct, st = math.cos(th), math.sin(th)
    return np.array([
        [ct, -st, 0.0, a],
        [ca * st, ca * ct, -sa, 0.0],
        [sa * st, sa * ct, ca, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _loop_gap_vector(lengths, cos_tw, sin_tw, thetas, base):
    F = base
    for i in range(4):
        F = F @ _dh_step(lengths[i], cos_tw[i], sin_tw[i], thetas[i])
    return (F - base)[:3, :].ravel()


def _solve_closure(lengths, twists, theta1, guess, base):
    """Close the loop at fixed theta1: damped Gauss-Newton on (th2, th3, th0).

    12 residuals (frame gap), 3 unknowns; the seed is the planar rectangle
    so a handful of iterations reach machine precision.
    """
    x = np.asarray(guess, dtype=float).copy()
    base = np.asarray(base, dtype=float)
    cos_tw = [math.cos(a) for a in twists]
    sin_tw = [math.sin(a) for a in twists]

    def resid(v):
        return _loop_gap_vector(lengths, cos_tw, sin_tw, [theta1, *v], base)

    r = resid(x)
    cost = float(np.linalg.norm(r))
    h = 1e-7
    for _ in range(60):
        if cost < 1e-13 * max(lengths):
            break
        J = np.empty((r.size, 3))
        for j in range(3):
            xp = x.copy()
            xp[j] += h
            J[:, j] = (resid(xp) - r) / h
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        lam = 1.0
        for _ in range(12):
            r_new = resid(x + lam * step)
            c_new = float(np.linalg.norm(r_new))
            if c_new < cost:
                x = x + lam * step
                r, cost = r_new, c_new
                break
            lam *= 0.5
        else:
            break
    return np.array([theta1, *x]), cost


def _seed_loop(spec, tol=DEFAULT_TOL):
    """Walk the twisted loop closed near the planar rectangle.

    Returns (seed linkage with motion anchored at the seed configuration,
    attachment points, joint feet, axis directions). The motion is rebuilt
    from the exact walked axes by the linear loop reconstruction, which
    stays well conditioned for near-planar twists (unlike re-factoring the
    norm polynomial, whose quadratic factors coalesce as alpha0 -> 0).
    """
    a0, a1 = spec.a0, spec.a1
    alpha1 = twist_partner_angle(spec)
    lengths = (a0, a1, a0, a1)
    twists = (spec.alpha0, -alpha1, spec.alpha0, -alpha1)
    base = _base_frame(spec.alpha0)

    guess = np.full(3, RECTANGLE_THETA)
    th_seed, r0 = _solve_closure(lengths, twists, RECTANGLE_THETA, guess, base)
    if r0 > 1e-8 * a1:
        raise ClosureFailure(f"loop does not close near the rectangle (gap {r0:.3g})")

    frames_seed, _ = dh_loop_frames(lengths, twists, th_seed, base)
    feet = [F[:3, 3].copy() for F in frames_seed]
    dirs = [F[:3, 2].copy() for F in frames_seed]
    axes = [LinePlucker.from_point_direction(feet[i], dirs[i]) for i in range(4)]
    lk_seed = linkage_from_axes(axes, tol=tol)
    z_off = spec.z_offsets
    attachments = [feet[i] + z_off[i] * dirs[i] for i in range(4)]
    return lk_seed, attachments, feet, dirs


def _area_on_motion(C, attachments, t):
    D = dq_to_pose(C.evaluate(t))
    p0, p1 = attachments[0], attachments[1]
    p2 = D[:3, :3] @ attachments[2] + D[:3, 3]
    p3 = D[:3, :3] @ attachments[3] + D[:3, 3]
    return 0.5 * float(np.linalg.norm(np.cross(p2 - p0, p3 - p1))), (p2, p3)


def _cross3(a, b):
    # np.cross has large fixed overhead on small batches
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _areas_on_grid(C, attachments, ts):
    """Vectorized quadrilateral areas along the motion (hot path of the
    expanded/folded search)."""
    c0, c1, c2 = (c.as_array() for c in C.coefficients)
    ts = np.asarray(ts, dtype=float)
    H = c0[None, :] + np.outer(ts, c1) + np.outer(ts * ts, c2)
    p, q = H[:, :4], H[:, 4:]
    n2 = np.einsum("ij,ij->i", p, p)
    pw, pv = p[:, 0], p[:, 1:]
    qw, qv = q[:, 0], q[:, 1:]
    # translation = -2 (q conj(p))_vec / |p|^2
    tr = (-2.0 / n2)[:, None] * (pw[:, None] * qv - qw[:, None] * pv
                                 - _cross3(qv, pv))

    def rot(v):
        crv = _cross3(pv, np.broadcast_to(v, pv.shape))
        return v + (2.0 / n2)[:, None] * (pw[:, None] * crv + _cross3(pv, crv))

    p0, p1 = np.asarray(attachments[0]), np.asarray(attachments[1])
    p2 = rot(np.asarray(attachments[2], dtype=float)) + tr
    p3 = rot(np.asarray(attachments[3], dtype=float)) + tr
    cr = _cross3(p2 - p0[None, :], p3 - p1[None, :])
    return 0.5 * np.sqrt(np.einsum("ij,ij->i", cr, cr))


def _scan_area_extrema(C, attachments, n=1024):
    """Dense scan over the full closed motion + golden-section refinement."""
    us = np.linspace(-math.pi / 2, math.pi / 2, n, endpoint=False) + math.pi / n
    vals = np.concatenate([
        _areas_on_grid(C, attachments, np.tan(us)),
        [_area_on_motion(C, attachments, T_INFINITY)[0]],
    ])
    i_max = int(np.argmax(vals))
    i_min = int(np.argmin(vals))

    def refine(i, sign):
        if i == len(us):  # extremum at t = infinity: refine around u = pi/2
            lo, hi = us[-1], math.pi / 2 + (math.pi / 2 - us[-1])
        else:
            lo = us[i] - math.pi / n
            hi = us[i] + math.pi / n

        # iterative vectorized grid zoom: 33-point grids, bracket shrinks
        # 16x per pass (extremum localization is noise-limited well before
        # the final bracket width of ~1e-11)
        m = 33
        for _ in range(7):
            grid = np.linspace(lo, hi, m)
            uu = np.remainder(grid + math.pi / 2, math.pi) - math.pi / 2
            at_inf = np.abs(np.abs(uu) - math.pi / 2) < 1e-15
            tvals = np.tan(np.where(at_inf, 0.0, uu))
            vals = sign * _areas_on_grid(C, attachments, tvals)
            if np.any(at_inf):
                vinf = sign * _area_on_motion(C, attachments, T_INFINITY)[0]
                vals = np.where(at_inf, vinf, vals)
            j = int(np.argmin(vals))
            step = (hi - lo) / (m - 1)
            lo = grid[j] - step
            hi = grid[j] + step
            if hi - lo < 1e-11:
                break
        u = 0.5 * (lo + hi)
        uu = math.remainder(u, math.pi)
        if abs(abs(uu) - math.pi / 2) < 1e-11:
            return T_INFINITY
        return math.tan(uu)

    t_max = refine(i_max, -1.0)
    t_min = refine(i_min, +1.0)
    return t_max, t_min


def _planar_linkage(spec, expanded, tol=DEFAULT_TOL):
    """Degenerate zero-twist case: a planar parallelogram four-bar.

    The coupler motion is the circular translation generated by equal and
    opposite rotations about the two base axes; built directly from its
    rotation factors (the generic factorization machinery rejects the
    repeated norm factor of planar motions).
    """
    pts = expanded.as_array()
    zhat = np.array([0.0, 0.0, 1.0])
    axes = tuple(LinePlucker.from_point_direction(p, zhat) for p in pts)
    h1 = rotation_factor_about(axes[1])
    h2 = rotation_factor_about(
        LinePlucker.from_point_direction(pts[2], -zhat))
    k1 = rotation_factor_about(axes[0])
    k2 = rotation_factor_about(
        LinePlucker.from_point_direction(pts[3], -zhat))
    C = linear_factor(h1.h) * linear_factor(h2.h)
    C_b = linear_factor(k1.h) * linear_factor(k2.h)
    if max(np.max(np.abs((C.coefficients[i] - C_b.coefficients[i]).as_array()))
           for i in range(3)) > 1e-9 * C.max_coeff_norm():
        raise ClosureFailure("planar parallelogram factor pairs disagree")
    fac = Factorizations(DualQuaternion.identity(), (h1, h2), (k1, k2))
    dh = axes_to_dh(axes, tol)
    joint_factors = (("b", 0), ("a", 0), ("a", 1), ("b", 1))
    return BennettLinkage(axes=axes, dh=dh, home_coupler=DualQuaternion.identity(),
                          motion=C, factorization=fac, joint_factors=joint_factors)


def apply_twist(spec, tol=DEFAULT_TOL):
    """Inject the twist and return the spatial quadrilateral + linkage.

    alpha0 = 0 reproduces the planar expanded configuration exactly (with a
    planar, degenerate-flagged linkage). Otherwise the twisted loop is
    walked from DH data, its coupler motion reconstructed, and the expanded
    configuration placed at the area maximum of the motion.
    """
    if spec.alpha0 == 0.0:
        expanded, folded = build_planar_quad(spec)
        linkage = _planar_linkage(spec, expanded, tol)
        return TwistedQuad(
            alpha1=0.0, points=expanded.points, linkage=linkage,
            attachments_home=expanded.points,
            folded_parameter=None, folded_points=folded.points,
            expanded_area=quad_area(expanded), folded_area=quad_area(folded))

    alpha1 = twist_partner_angle(spec)
    lk_seed, att_seed, feet_seed, dirs_seed = _seed_loop(spec, tol)
    C_seed = lk_seed.motion
    t_max, t_min = _scan_area_extrema(C_seed, att_seed)

    # anchor the motion at the expanded configuration; the factor transform
    # is analytic (re-factoring the reanchored polynomial is ill-conditioned
    # for near-planar loops)
    fac = reanchor_factorizations(lk_seed.factorization, t_max)
    C = fac.remultiplied("a")
    if max(np.max(np.abs((fac.remultiplied("b").coefficients[i]
                          - C.coefficients[i]).as_array())) for i in range(3)) \
            > 1e-9 * C.max_coeff_norm():
        raise ClosureFailure("reanchored factor pairs disagree")
    D_max = dq_to_pose(C_seed.evaluate(t_max))
    R, tr = D_max[:3, :3], D_max[:3, 3]
    p_exp = [att_seed[0], att_seed[1], R @ att_seed[2] + tr, R @ att_seed[3] + tr]
    s_min = shifted_parameter(t_min, t_max)
    area_exp, _ = _area_on_motion(C_seed, att_seed, t_max)
    area_fold, (p2f, p3f) = _area_on_motion(C_seed, att_seed, t_min)
    p_fold = [att_seed[0], att_seed[1], p2f, p3f]

    linkage = _linkage_in_quad_order(C, fac, lk_seed.joint_factors,
                                     feet_seed, dirs_seed, D_max, tol)

    # construction validation: both printed configurations must be rigid
    # states of the same loop (equal link lengths)
    for i in range(4):
        le = np.linalg.norm(np.asarray(p_exp[i]) - np.asarray(p_exp[(i + 1) % 4]))
        lf = np.linalg.norm(np.asarray(p_fold[i]) - np.asarray(p_fold[(i + 1) % 4]))
        if abs(le - lf) > 1e-6 * max(le, 1.0):
            raise ClosureFailure(
                f"folded configuration is off the motion (link {i} length "
                f"{le:.6f} vs {lf:.6f})")

    residual = check_bennett_condition(linkage.dh)
    if residual > 1e-9:
        raise ClosureFailure(f"constructed loop violates the length/twist "
                             f"compatibility condition (residual {residual:.3g})")

    return TwistedQuad(
        alpha1=alpha1,
        points=tuple(tuple(p) for p in p_exp),
        linkage=linkage,
        attachments_home=tuple(tuple(p) for p in p_exp),
        folded_parameter=s_min,
        folded_points=tuple(tuple(p) for p in p_fold),
        expanded_area=area_exp,
        folded_area=area_fold)


def _linkage_in_quad_order(C, fac, joint_factors, feet_seed, dirs_seed,
                           D_max, tol):
    """Assemble the linkage with axes in quadrilateral loop order.

    The axes are the exactly-walked joint lines carried to the expanded
    configuration (a rigid transform, so the DH data stays exact). The
    factor/joint assignment is inherited from the seed reconstruction
    (reanchoring transforms each factor pair in place); a cheap guard
    verifies the base-joint factor still rotates about the walked base
    axis.
    """
    R, tr = D_max[:3, :3], D_max[:3, 3]
    axes = (
        LinePlucker.from_point_direction(feet_seed[0], dirs_seed[0]),
        LinePlucker.from_point_direction(feet_seed[1], dirs_seed[1]),
        LinePlucker.from_point_direction(R @ feet_seed[2] + tr, R @ dirs_seed[2]),
        LinePlucker.from_point_direction(R @ feet_seed[3] + tr, R @ dirs_seed[3]),
    )
    pair, pos = joint_factors[1]
    base_factor = (fac.pair_a if pair == "a" else fac.pair_b)[pos]
    scale = max(np.linalg.norm(w.point()) for w in axes) + 1.0
    if not _lines_match(axes[1], base_factor.axis(tol), 1e-2 * scale):
        raise ClosureFailure("factor axes do not match the walked loop")
    dh = axes_to_dh(axes, tol)
    return BennettLinkage(axes=axes, dh=dh,
                          home_coupler=DualQuaternion.identity(),
                          motion=C, factorization=fac,
                          joint_factors=tuple(joint_factors))


def _lines_match(a, b, atol):
    da, db = a.d, b.d
    if np.linalg.norm(np.cross(da, db)) > 1e-3:
        return False
    return a.distance_to_point(b.point()) <= atol


def quad_to_linkage(tq, spec=None, tol=DEFAULT_TOL):
    """The Bennett loop realizing a twisted quadrilateral."""
    return tq.linkage
