"""bennett-forge: synthesis, construction and simulation of Bennett (spatial
4R) linkages and single-actuator folding flapping wings.

Lengths are millimetres at every external interface; angles are degrees in
files and on the wire, radians internally.
"""

__version__ = "0.1.0"

from .dqcore import (  # noqa: F401
    DEFAULT_TOL,
    DualQuaternion,
    MotionPolynomial,
    Quaternion,
    T_INFINITY,
    Tolerances,
    dq_from_pose,
    dq_multiply,
    dq_to_pose,
    linear_factor,
    motionpoly_eval,
    motionpoly_multiply,
    motionpoly_right_divide,
    orthogonalize_pose,
    study_residual,
)
from .errors import BennettForgeError  # noqa: F401
from .kinematics import (  # noqa: F401
    LoopConfiguration,
    WingAssembly,
    WingState,
    closure_residual,
    coupler_pose,
    detect_folded,
    joint_angle_from_factor,
    loop_configuration,
    sweep_trajectory,
    trajectory_summary,
    wing_state,
)
from .lines import LinePlucker, common_perpendicular  # noqa: F401
from .quad import (  # noqa: F401
    QuadConfiguration,
    QuadSpec,
    TwistedQuad,
    apply_twist,
    build_planar_quad,
    quad_area,
    quad_to_linkage,
)
from .synthesis import (  # noqa: F401
    BennettDH,
    BennettLinkage,
    Factorizations,
    RotationFactor,
    axes_to_dh,
    check_bennett_condition,
    extract_axis,
    factorize_motion,
    interpolate_three_poses,
    linkage_from_axes,
    linkage_from_motion,
    synthesize_stroke_linkage,
)
