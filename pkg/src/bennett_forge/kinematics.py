"""Forward kinematics and closure analysis of Bennett loops, plus the
coupled two-loop flapping wing with passive joint stops.

Wing model: the actuated stroke loop carries the passive folding loop on
its coupler (through a fixed mount transform). The folding looposcillates
on the arc of its motion between the expanded (area-maximal) and folded
(area-minimal) configurations, bounded by symmetric stops on one joint.
The surrogate for the airflow-driven switching is kinematic: during the
downstroke phase the folding joint rests at the extended end of the
stop-bounded arc, during upstroke at the folded end, switching
instantaneously at the stroke's turning points.
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
    is_infinite,
)
from .errors import InvalidSpec
from .lines import collinearity_defect, common_perpendicular
from .quad import quad_area
from .synthesis import dh_loop_frames, joint_angle_from_factor, wrap_angle  # noqa: F401

DOWNSTROKE = "downstroke"
UPSTROKE = "upstroke"
EXTENDED = "extended"
FOLDED = "folded"

# attachment-offset designs fold their area minimum a few percent away from
# the exact skeleton-collinear state; gaps this side of the threshold count
# as folded (generic configurations sit near 0.5)
FOLD_GAP_THRESHOLD = 0.05


def coupler_pose(linkage, t, tol=DEFAULT_TOL):
    """Normalized absolute coupler pose at motion parameter t."""
    return (linkage.motion.evaluate(t) * linkage.home_coupler).normalized()


@dataclass(frozen=True)
class LoopConfiguration:
    """State of a loop at one motion parameter.

    joint_angles are the factor angles (rotation away from the home
    configuration, wrapped to (-pi, pi]) of the four joints in loop order.
    """

    t: object
    joint_angles: tuple
    coupler_pose: DualQuaternion


def loop_configuration(linkage, t, tol=DEFAULT_TOL):
    angles = tuple(linkage.factor_for_joint(i).angle_at(t) for i in range(4))
    return LoopConfiguration(t=t, joint_angles=angles,
                             coupler_pose=coupler_pose(linkage, t, tol))


def loop_walk_data(linkage, tol=DEFAULT_TOL):
    """Home DH walk data (lengths, signed twists, home joint angles, frame).

    Walking Tx(a_i) Rx(alpha_i) Rz(theta_{i+1}) from the returned base frame
    with the returned angles closes the loop at the home configuration.
    """
    axes = linkage.axes
    perps = [common_perpendicular(axes[i], axes[(i + 1) % 4], tol) for i in range(4)]
    lengths = tuple(p.distance for p in perps)
    twists = tuple(p.twist for p in perps)
    normals = [p.normal for p in perps]
    thetas = []
    for i in range(4):
        d = axes[i].d
        n_in, n_out = normals[(i - 1) % 4], normals[i]
        thetas.append(math.atan2(float(np.cross(n_in, n_out) @ d),
                                 float(n_in @ n_out)))
    F0 = np.eye(4)
    F0[:3, 3] = perps[0].foot1
    F0[:3, 0] = normals[0]
    F0[:3, 2] = axes[0].d
    F0[:3, 1] = np.cross(F0[:3, 2], F0[:3, 0])
    return lengths, twists, tuple(thetas), F0


def _joint_delta_signs(linkage, tol=DEFAULT_TOL):
    """Map factor angles to DH joint-angle increments.

    Two independent signs per joint: the factor's axis orientation vs the
    stored loop axis, and the chain side. The DH angle at joint i measures
    link(i, i+1) relative to link(i-1, i); a factor rotates its chain's
    distal side (the chain's middle link for a base factor, the coupler for
    a coupler-side factor) relative to the proximal one, so the sign flips
    when the factor's partner joint precedes/follows it in the loop.
    """
    slots = {pf: i for i, pf in enumerate(linkage.joint_factors)}
    signs = []
    for i, (pair, pos) in enumerate(linkage.joint_factors):
        partner = slots[(pair, 1 - pos)]
        if pos == 0:
            chain = 1.0 if partner == (i + 1) % 4 else -1.0
        else:
            chain = 1.0 if partner == (i - 1) % 4 else -1.0
        fd = linkage.factor_for_joint(i).axis(tol).d
        orient = 1.0 if float(fd @ linkage.axes[i].d) >= 0 else -1.0
        signs.append(chain * orient)
    return signs


def closure_residual(linkage, angles, tol=DEFAULT_TOL):
    """Frobenius gap from identity of the DH loop product at the given
    joint angles (factor angles relative to home)."""
    lengths, twists, home, F0 = loop_walk_data(linkage, tol)
    signs = _joint_delta_signs(linkage, tol)
    th = [home[i] + signs[i] * angles[i] for i in range(4)]
    walk_thetas = (th[1], th[2], th[3], th[0])
    _, gap = dh_loop_frames(lengths, twists, walk_thetas, F0)
    return gap


def joint_centers(linkage, t, tol=DEFAULT_TOL):
    """Perpendicular-foot joint centers of the loop at parameter t."""
    axes = linkage.axes_at(t, tol)
    return [np.asarray(common_perpendicular(axes[i], axes[(i + 1) % 4], tol).foot1)
            for i in range(4)]


def detect_folded(linkage, t, tol=DEFAULT_TOL, gap_threshold=FOLD_GAP_THRESHOLD):
    """Folded-configuration test at motion parameter t.

    At folding the loop skeleton collapses onto a single line (the common
    transversal through the joint centers); the returned transversal_gap is
    the relative RMS deviation of the four joint centers from their
    best-fit line (0 when exactly collapsed, ~0.5 in generic
    configurations). Note: mere existence of a common transversal of the
    four axes does not discriminate — the axes of this loop family lie on a
    regulus and admit real transversals in every configuration.
    """
    gap = collinearity_defect(joint_centers(linkage, t, tol))
    return gap < gap_threshold, gap


# ---------------------------------------------------------------------------
# wing assembly


@dataclass(frozen=True)
class WingAssembly:
    """Stroke loop + mounted passive folding loop with joint stops.

    mount maps the folding-base frame into the stroke-coupler frame (world
    pose of the folding base = stroke coupler pose * mount). wing_points
    are the folding-loop attachment points in the folding-base frame at the
    folding home (= expanded) configuration; folded_parameter is the
    folding-motion parameter of the folded configuration. stop_joint is the
    loop index of the stopped folding joint; stop_limit the symmetric stop
    half-range (radians); forward_axis the world direction whose coupler
    sweep defines the stroke phase.
    """

    stroke: object
    mount: DualQuaternion
    folding: object
    wing_points: tuple
    folded_parameter: object
    stop_limit: float = math.radians(75.0)
    stop_joint: int = 1
    forward_axis: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.stop_limit < math.pi:
            raise InvalidSpec(f"stop_limit must be in (0, pi), got {self.stop_limit}")
        if self.stop_joint not in (0, 1, 2, 3):
            raise InvalidSpec("stop_joint must be a loop index 0..3")

    @property
    def drive_factor(self):
        return self.stroke.factor_for_joint(0)

    def fold_arc(self):
        """(factor angle of the folded end, rest magnitude) of the stop arc.

        The stop coordinate is zero at mid-arc; resting states sit at
        +/-rest where rest = min(stop_limit, half-arc). For stop_limit >=
        half-arc the wing rests exactly at the expanded / folded
        configurations (the stops bound but do not truncate the arc).
        """
        factor = self.folding.factor_for_joint(self.stop_joint)
        phi_fold = factor.angle_at(self.folded_parameter)
        half = abs(phi_fold) / 2.0
        rest = min(self.stop_limit, half)
        return phi_fold, rest


@dataclass(frozen=True)
class WingState:
    t: object
    theta_drive: float
    stroke_pose: DualQuaternion
    phase: str
    fold_state: str
    fold_angle: float
    fold_parameter: object
    wing_points: tuple        # world coordinates
    swept_area: float
    frontal_area: float       # |projection along the folding-base normal|
    sweep_coordinate: float


def _sweep_coordinate(assembly, t, tol=DEFAULT_TOL):
    T = dq_to_pose(coupler_pose(assembly.stroke, t, tol), tol)
    return float(T[:3, 3] @ np.asarray(assembly.forward_axis, dtype=float))


def stroke_phase(assembly, t, tol=DEFAULT_TOL, dpsi=1e-6):
    """Phase from the sign of the sweep-coordinate derivative along the cycle.

    The cycle direction is decreasing drive angle (the sampling order of
    sweep_trajectory); downstroke is the arc where the coupler origin's
    forward coordinate increases along it.
    """
    drive = assembly.drive_factor
    psi = drive.unwrapped_angle_at(t)
    s_m = _sweep_coordinate(assembly, drive.t_of_angle(psi + dpsi), tol)
    s_p = _sweep_coordinate(assembly, drive.t_of_angle(psi - dpsi), tol)
    return DOWNSTROKE if s_p >= s_m else UPSTROKE


def wing_state(assembly, stroke_t, tol=DEFAULT_TOL):
    """Full wing state at one stroke parameter.

    The folding joint is clamped to the phase's resting stop; the folding
    loop configuration follows exactly (the loop closes along its entire
    motion, so the stop-bounded arc is always reachable).
    """
    phase = stroke_phase(assembly, stroke_t, tol)
    phi_fold, rest = assembly.fold_arc()
    # stop coordinate j = sigma*(phi - mid): +|half-arc| at expanded (phi=0)
    sigma = 1.0 if phi_fold < 0 else -1.0
    mid = phi_fold / 2.0
    if phase == DOWNSTROKE:
        fold_state, j = EXTENDED, rest
    else:
        fold_state, j = FOLDED, -rest
    phi = mid + sigma * j
    factor = assembly.folding.factor_for_joint(assembly.stop_joint)
    t_fold = factor.t_of_angle(phi)

    # folding-base frame points
    D = dq_to_pose(assembly.folding.motion.evaluate(t_fold), tol)
    pts = np.asarray(assembly.wing_points, dtype=float)
    local = np.vstack([pts[0], pts[1],
                       D[:3, :3] @ pts[2] + D[:3, 3],
                       D[:3, :3] @ pts[3] + D[:3, 3]])
    stroke_pose_dq = coupler_pose(assembly.stroke, stroke_t, tol)
    W = dq_to_pose(stroke_pose_dq, tol) @ dq_to_pose(assembly.mount, tol)
    world = (W[:3, :3] @ local.T).T + W[:3, 3]

    area_vec_local = 0.5 * np.cross(local[2] - local[0], local[3] - local[1])
    frontal = abs(float(area_vec_local[2]))
    return WingState(
        t=stroke_t,
        theta_drive=assembly.drive_factor.angle_at(stroke_t),
        stroke_pose=stroke_pose_dq,
        phase=phase,
        fold_state=fold_state,
        fold_angle=j,
        fold_parameter=t_fold,
        wing_points=tuple(tuple(p) for p in world),
        swept_area=quad_area(world),
        frontal_area=frontal,
        sweep_coordinate=_sweep_coordinate(assembly, stroke_t, tol),
    )


def sweep_trajectory(assembly, n_samples, tol=DEFAULT_TOL):
    """One full cycle sampled uniformly in the driving-joint angle.

    The first sample is the home configuration (t = infinity, drive angle
    0); samples proceed in decreasing drive angle so that doubling
    n_samples keeps every coarse sample (nested sampling).
    """
    if n_samples < 8:
        raise InvalidSpec(f"n_samples must be >= 8, got {n_samples}")
    drive = assembly.drive_factor
    states = []
    for i in range(n_samples):
        psi = -2.0 * math.pi * i / n_samples
        t = T_INFINITY if i == 0 else drive.t_of_angle(psi)
        states.append(wing_state(assembly, t, tol))
    return states


def count_fold_transitions(states):
    n = len(states)
    return sum(1 for i in range(n)
               if states[i].fold_state != states[(i + 1) % n].fold_state)


def trajectory_summary(assembly, states):
    areas = [s.swept_area for s in states]
    frontals = [s.frontal_area for s in states]
    phi_fold, rest = assembly.fold_arc()
    ext = [s.swept_area for s in states if s.fold_state == EXTENDED]
    fld = [s.swept_area for s in states if s.fold_state == FOLDED]
    return {
        "samples": len(states),
        "fold_transitions": count_fold_transitions(states),
        "area_min_mm2": min(areas),
        "area_max_mm2": max(areas),
        "extended_area_mm2": ext[0] if ext else None,
        "folded_area_mm2": fld[0] if fld else None,
        "folded_over_extended_area": (fld[0] / ext[0]) if ext and fld else None,
        "frontal_min_mm2": min(frontals),
        "frontal_max_mm2": max(frontals),
        "folded_over_extended_frontal": (
            min(frontals) / max(frontals) if max(frontals) > 0 else None),
        "fold_arc_deg": math.degrees(abs(phi_fold)),
        "rest_angle_deg": math.degrees(rest),
        "stop_limit_deg": math.degrees(assembly.stop_limit),
    }
