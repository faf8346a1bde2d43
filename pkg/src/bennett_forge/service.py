"""Local HTTP JSON service consumed by the designer UI.

Stateless: every request carries its full input. Errors mirror the CLI's
machine-readable codes (HTTP 400); schema violations are FastAPI's native
422. CORS is open for localhost origins so the browser UI can talk to it.
"""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .config import QuadSpecModel, _as_pose
from .dqcore import dq_from_pose
from .errors import BennettForgeError, ConfigError
from .kinematics import WingAssembly, sweep_trajectory, trajectory_summary
from .quad import apply_twist, quad_area
from .serialize import (
    configurations_from_dict,
    configurations_to_dict,
    mechanism_from_dict,
    mechanism_to_dict,
    round12,
)
from .synthesis import check_bennett_condition, synthesize_stroke_linkage

Pose = List[List[float]]


class StrokeBody(BaseModel):
    poses: List[Pose] = Field(min_length=3, max_length=3)


class MechanismData(BaseModel):
    axes: List[dict]
    dh: dict
    home_coupler: List[float]
    units: Optional[str] = "mm"


class FoldingData(BaseModel):
    quadspec: Optional[QuadSpecModel] = None
    mechanism: Optional[dict] = None
    configurations: Optional[dict] = None


class SimulateBody(BaseModel):
    stroke: Optional[StrokeBody] = None
    stroke_mechanism: Optional[dict] = None
    folding: FoldingData
    mount: Optional[Pose] = None
    stop_limit_deg: float = Field(default=75.0, gt=0, lt=180)
    stop_joint: int = Field(default=1, ge=0, le=3)
    forward_axis: List[float] = Field(default=[1.0, 0.0, 0.0],
                                      min_length=3, max_length=3)
    samples: int = Field(default=256, ge=8)


def _report(linkage):
    dh = linkage.dh
    return {
        "dh": {
            "a0": round12(dh.a0),
            "alpha0_deg": round12(math.degrees(dh.alpha0)),
            "a1": round12(dh.a1),
            "alpha1_deg": round12(math.degrees(dh.alpha1)),
        },
        "bennett_residual": round12(check_bennett_condition(dh)),
        "degenerate": dh.degenerate,
    }


def _resolve_stroke(body: SimulateBody):
    if (body.stroke is None) == (body.stroke_mechanism is None):
        raise ConfigError("give exactly one of 'stroke' or 'stroke_mechanism'")
    if body.stroke is not None:
        poses = [_as_pose(p) for p in body.stroke.poses]
        return synthesize_stroke_linkage(*poses)
    return mechanism_from_dict(body.stroke_mechanism)


def _resolve_folding(data: FoldingData):
    from .config import FoldingBundle, folding_bundle_from_twist
    from .quad import _scan_area_extrema

    if (data.quadspec is None) == (data.mechanism is None):
        raise ConfigError("give exactly one of 'quadspec' or 'mechanism'")
    if data.quadspec is not None:
        return folding_bundle_from_twist(apply_twist(data.quadspec.to_spec()))
    if data.configurations is None:
        raise ConfigError("'mechanism' folding input also needs 'configurations'")
    linkage = mechanism_from_dict(data.mechanism)
    expanded, folded = configurations_from_dict(data.configurations)
    attachments = [np.asarray(p, dtype=float) for p in expanded.points]
    _, t_min = _scan_area_extrema(linkage.motion, attachments)
    return FoldingBundle(linkage, tuple(tuple(p) for p in attachments), t_min,
                         expanded_area=quad_area(expanded),
                         folded_area=quad_area(folded))


def create_app():
    app = FastAPI(title="bennett-forge service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(BennettForgeError)
    async def _toolkit_error(_req: Request, exc: BennettForgeError):
        return JSONResponse(status_code=400, content=exc.as_dict())

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/synthesize/stroke")
    def synthesize_stroke(body: StrokeBody):
        poses = [_as_pose(p) for p in body.poses]
        linkage = synthesize_stroke_linkage(*poses)
        return {
            "mechanism": mechanism_to_dict(linkage),
            "report": _report(linkage),
        }

    @app.post("/synthesize/fold")
    def synthesize_fold(spec: QuadSpecModel):
        tq = apply_twist(spec.to_spec())
        report = _report(tq.linkage)
        report.update({
            "alpha1_deg": round12(math.degrees(tq.alpha1)),
            "expanded_area_mm2": round12(tq.expanded_area),
            "folded_area_mm2": round12(tq.folded_area),
            "folded_over_expanded_area": round12(tq.folded_area / tq.expanded_area),
        })
        return {
            "mechanism": mechanism_to_dict(tq.linkage),
            "configurations": configurations_to_dict(tq),
            "report": report,
        }

    @app.post("/simulate")
    def simulate(body: SimulateBody):
        stroke = _resolve_stroke(body)
        folding = _resolve_folding(body.folding)
        mount = (dq_from_pose(_as_pose(body.mount)) if body.mount is not None
                 else dq_from_pose(np.eye(4)))
        assembly = WingAssembly(
            stroke=stroke, mount=mount, folding=folding.linkage,
            wing_points=tuple(tuple(p) for p in folding.attachments),
            folded_parameter=folding.folded_parameter,
            stop_limit=math.radians(body.stop_limit_deg),
            stop_joint=body.stop_joint,
            forward_axis=tuple(body.forward_axis))
        states = sweep_trajectory(assembly, body.samples)
        rows = []
        for s in states:
            rows.append({
                "t": None if not isinstance(s.t, float) else round12(s.t),
                "theta_drive_rad": round12(s.theta_drive),
                "phase": s.phase,
                "fold_state": s.fold_state,
                "fold_angle_rad": round12(s.fold_angle),
                "wing_points": [[round12(v) for v in p] for p in s.wing_points],
                "area_mm2": round12(s.swept_area),
                "frontal_area_mm2": round12(s.frontal_area),
            })
        summary = {k: (round12(v) if isinstance(v, float) else v)
                   for k, v in trajectory_summary(assembly, states).items()}
        return {"trajectory": rows, "summary": summary}

    return app
