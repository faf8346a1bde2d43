"""Project configuration (TOML or JSON) and input resolution.

A project file describes the two linkages (by synthesis inputs or by
previously exported files), the mounting transform, the joint-stop setup
and sampling. Lengths are millimetres, angles degrees; pose matrices are
row-major 4x4 (a 3x4 without the homogeneous row is accepted).
"""

from __future__ import annotations

import json
import math

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from .dqcore import DualQuaternion, dq_from_pose
from .errors import ConfigError
from .quad import QuadSpec, apply_twist, quad_area
from .synthesis import synthesize_stroke_linkage


def _as_pose(rows):
    M = np.asarray(rows, dtype=float)
    if M.shape == (3, 4):
        M = np.vstack([M, [0.0, 0.0, 0.0, 1.0]])
    if M.shape != (4, 4):
        raise ValueError(f"pose must be 3x4 or 4x4, got {M.shape}")
    return M


class QuadSpecModel(BaseModel):
    a0_mm: float = Field(gt=0)
    bennett_ratio: float = Field(gt=0, le=1)
    z_mm: List[float] = Field(min_length=3, max_length=3)
    alpha0_deg: float = Field(ge=0, lt=90)

    def to_spec(self):
        return QuadSpec(a0=self.a0_mm, bennett_ratio=self.bennett_ratio,
                        z1=self.z_mm[0], z2=self.z_mm[1], z3=self.z_mm[2],
                        alpha0=math.radians(self.alpha0_deg))


class StrokeInput(BaseModel):
    poses: Optional[List[List[List[float]]]] = None
    mechanism: Optional[str] = None

    @field_validator("poses")
    @classmethod
    def _check_three(cls, v):
        if v is not None and len(v) != 3:
            raise ValueError("exactly three poses are required")
        return v

    def model_post_init(self, _ctx):
        if (self.poses is None) == (self.mechanism is None):
            raise ValueError("give exactly one of 'poses' or 'mechanism'")


class FoldingInput(BaseModel):
    quadspec: Optional[QuadSpecModel] = None
    mechanism: Optional[str] = None
    configurations: Optional[str] = None

    def model_post_init(self, _ctx):
        if (self.quadspec is None) == (self.mechanism is None):
            raise ValueError("give exactly one of 'quadspec' or 'mechanism'")
        if self.mechanism is not None and self.configurations is None:
            raise ValueError("'mechanism' input also needs 'configurations'")


class ProjectConfig(BaseModel):
    units: Literal["mm"] = "mm"
    stroke: Optional[StrokeInput] = None
    folding: Optional[FoldingInput] = None
    mount: Optional[List[List[float]]] = None
    stop_limit_deg: float = Field(default=75.0, gt=0, lt=180)
    stop_joint: int = Field(default=1, ge=0, le=3)
    forward_axis: List[float] = Field(default=[1.0, 0.0, 0.0],
                                      min_length=3, max_length=3)
    samples: int = Field(default=256, ge=8)

    @field_validator("forward_axis")
    @classmethod
    def _unit(cls, v):
        n = float(np.linalg.norm(v))
        if n == 0:
            raise ValueError("forward_axis must be nonzero")
        return [x / n for x in v]

    def mount_pose(self):
        if self.mount is None:
            return np.eye(4)
        return _as_pose(self.mount)

    def mount_dq(self):
        return dq_from_pose(self.mount_pose())


def load_project_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path.name}: {exc}")
    try:
        cfg = ProjectConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {exc}")
    return cfg, path.parent


def _resolve_path(base_dir, ref):
    p = Path(ref)
    if not p.is_absolute():
        p = Path(base_dir) / p
    if not p.exists():
        raise ConfigError(f"referenced file not found: {p}")
    return p


def resolve_stroke(cfg, base_dir):
    """The stroke linkage from config: synthesized from poses or loaded."""
    from .serialize import load_mechanism

    if cfg.stroke is None:
        raise ConfigError("config has no 'stroke' section")
    if cfg.stroke.poses is not None:
        poses = [_as_pose(p) for p in cfg.stroke.poses]
        return synthesize_stroke_linkage(*poses)
    return load_mechanism(_resolve_path(base_dir, cfg.stroke.mechanism))


class FoldingBundle:
    """Folding linkage + attachment data needed by the wing assembly."""

    def __init__(self, linkage, attachments, folded_parameter,
                 expanded_area, folded_area, alpha1=None, twisted=None):
        self.linkage = linkage
        self.attachments = attachments
        self.folded_parameter = folded_parameter
        self.expanded_area = expanded_area
        self.folded_area = folded_area
        self.alpha1 = alpha1
        self.twisted = twisted


def folding_bundle_from_twist(tq):
    return FoldingBundle(tq.linkage, tq.attachments_home, tq.folded_parameter,
                         tq.expanded_area, tq.folded_area, alpha1=tq.alpha1,
                         twisted=tq)


def resolve_folding(cfg, base_dir):
    """The folding linkage bundle from config: constructed or loaded."""
    from .quad import _areas_on_grid, _scan_area_extrema
    from .serialize import load_configurations, load_mechanism

    if cfg.folding is None:
        raise ConfigError("config has no 'folding' section")
    if cfg.folding.quadspec is not None:
        return folding_bundle_from_twist(apply_twist(cfg.folding.quadspec.to_spec()))

    linkage = load_mechanism(_resolve_path(base_dir, cfg.folding.mechanism))
    expanded, folded = load_configurations(
        _resolve_path(base_dir, cfg.folding.configurations))
    attachments = [np.asarray(p, dtype=float) for p in expanded.points]
    # the serialized home configuration is the expanded one; locate the
    # folded configuration on the motion (area minimum)
    _, t_min = _scan_area_extrema(linkage.motion, attachments)
    return FoldingBundle(linkage, tuple(tuple(p) for p in attachments), t_min,
                         expanded_area=quad_area(expanded),
                         folded_area=quad_area(folded))


def build_assembly(cfg, base_dir, stroke=None, folding=None):
    from .kinematics import WingAssembly

    stroke = stroke if stroke is not None else resolve_stroke(cfg, base_dir)
    folding = folding if folding is not None else resolve_folding(cfg, base_dir)
    return WingAssembly(
        stroke=stroke,
        mount=cfg.mount_dq(),
        folding=folding.linkage,
        wing_points=tuple(tuple(p) for p in folding.attachments),
        folded_parameter=folding.folded_parameter,
        stop_limit=math.radians(cfg.stop_limit_deg),
        stop_joint=cfg.stop_joint,
        forward_axis=tuple(cfg.forward_axis),
    ), stroke, folding
