"""Exception hierarchy with stable machine-readable codes.

Every error carries a ``code`` string that is used verbatim by the CLI
(stderr error JSON) and the HTTP service (error body), so user-facing
tooling can match on it.
"""

from __future__ import annotations


class BennettForgeError(Exception):
    """Base class; ``code`` is a stable kebab-case identifier."""

    code = "internal-error"

    def __init__(self, message="", **details):
        super().__init__(message or self.__doc__)
        self.details = details

    def as_dict(self):
        return {"error": self.code, "message": str(self), **(
            {"details": self.details} if self.details else {})}


class NonOrthogonalInput(BennettForgeError):
    """Rotation block deviates from orthonormal beyond repairable tolerance."""
    code = "non-orthogonal-input"


class DegeneratePrimal(BennettForgeError):
    """Dual quaternion primal part is (numerically) zero."""
    code = "degenerate-primal"


class OffQuadric(BennettForgeError):
    """Dual quaternion violates the pose constraint surface."""
    code = "off-quadric"


class NonMonicDivisor(BennettForgeError):
    """Polynomial divisor is not monic."""
    code = "non-monic-divisor"


class CollinearPoses(BennettForgeError):
    """Input poses are projectively dependent; no unique interpolating conic."""
    code = "collinear-poses"


class NoBennettMotion(BennettForgeError):
    """The plane of the three poses meets the pose quadric degenerately."""
    code = "no-bennett-motion"


class DegenerateNorm(BennettForgeError):
    """Norm polynomial has no two distinct real quadratic factors."""
    code = "degenerate-norm"


class NonQuadratic(BennettForgeError):
    """Motion polynomial is not of degree 2."""
    code = "non-quadratic"


class PureTranslationFactor(BennettForgeError):
    """Linear factor has no rotational part; no fixed axis exists."""
    code = "pure-translation-factor"


class CoincidentAxes(BennettForgeError):
    """Consecutive joint axes coincide; DH parameters undefined."""
    code = "coincident-axes"


class InvalidSpec(BennettForgeError):
    """Quadrilateral design parameters violate their invariants."""
    code = "invalid-spec"


class TwistInfeasible(BennettForgeError):
    """sin(alpha0) exceeds the Bennett ratio; no feasible second twist."""
    code = "twist-infeasible"


class ClosureFailure(BennettForgeError):
    """A required configuration does not lie on the linkage's motion."""
    code = "closure-failure"


class UnreachableStop(BennettForgeError):
    """Folding loop cannot close at the clamped joint angle."""
    code = "unreachable-stop"

    def __init__(self, message="", nearest_angle=None, **details):
        super().__init__(message, **details)
        self.nearest_angle = nearest_angle


class ConfigError(BennettForgeError):
    """Project configuration is invalid."""
    code = "config-error"
