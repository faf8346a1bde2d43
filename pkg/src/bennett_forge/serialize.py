"""File formats: mechanism / configuration / quadspec JSON, trajectory CSV,
OBJ scene export.

All JSON numbers are rounded to 12 significant digits before writing and
files carry no timestamps, so identical inputs produce byte-identical
outputs. Angles are degrees in every file (radians internally); lengths are
millimetres.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .dqcore import DualQuaternion, T_INFINITY, is_infinite
from .errors import ConfigError
from .lines import LinePlucker
from .quad import QuadConfiguration, QuadSpec, quad_area
from .synthesis import check_bennett_condition, linkage_from_axes

SCHEMA_NOTE = "axes are in loop order; axes[0] and axes[1] are the base joints"


def round12(x):
    x = float(x)
    if not math.isfinite(x):
        return x
    if x == 0.0:
        return 0.0  # normalize -0.0
    return float(f"{x:.12g}")


def _r12(obj):
    if isinstance(obj, float):
        return round12(obj)
    if isinstance(obj, (list, tuple)):
        return [_r12(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _r12(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating,)):
        return round12(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_r12(v) for v in obj.tolist()]
    return obj


def dumps_canonical(obj):
    """Deterministic JSON text (12 significant digits, fixed layout)."""
    return json.dumps(_r12(obj), indent=2, ensure_ascii=False,
                      separators=(",", ": ")) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj))


# ---------------------------------------------------------------------------
# mechanism.json


def mechanism_to_dict(linkage):
    dh = linkage.dh
    return {
        "units": "mm",
        "axes": [{"dir": list(a.d), "moment": list(a.m)} for a in linkage.axes],
        "dh": {
            "a0": dh.a0,
            "alpha0_deg": math.degrees(dh.alpha0),
            "a1": dh.a1,
            "alpha1_deg": math.degrees(dh.alpha1),
        },
        "home_coupler": list(linkage.home_coupler.normalized().as_array()),
    }


def mechanism_from_dict(data, tol=None):
    try:
        axes = [LinePlucker.from_arrays(a["dir"], a["moment"]) for a in data["axes"]]
        home = DualQuaternion.from_array(np.asarray(data["home_coupler"], dtype=float))
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"malformed mechanism data: {exc}")
    kwargs = {} if tol is None else {"tol": tol}
    return linkage_from_axes(axes, home, **kwargs)


def load_mechanism(path):
    with open(path, encoding="utf-8") as fh:
        return mechanism_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# quadspec.json / configurations.json


def quadspec_to_dict(spec):
    return {
        "a0_mm": spec.a0,
        "bennett_ratio": spec.bennett_ratio,
        "z_mm": [spec.z1, spec.z2, spec.z3],
        "alpha0_deg": math.degrees(spec.alpha0),
    }


def quadspec_from_dict(data):
    try:
        z = data["z_mm"]
        return QuadSpec(a0=float(data["a0_mm"]),
                        bennett_ratio=float(data["bennett_ratio"]),
                        z1=float(z[0]), z2=float(z[1]), z3=float(z[2]),
                        alpha0=math.radians(float(data["alpha0_deg"])))
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"malformed quadspec data: {exc}")


def configurations_to_dict(tq):
    return {
        "units": "mm",
        "alpha1_deg": math.degrees(tq.alpha1),
        "expanded": {
            "points": [list(p) for p in tq.points],
            "area_mm2": tq.expanded_area,
        },
        "folded": {
            "points": [list(p) for p in tq.folded_points],
            "area_mm2": tq.folded_area,
        },
    }


def configurations_from_dict(data):
    try:
        exp = QuadConfiguration(tuple(tuple(p) for p in data["expanded"]["points"]),
                                "expanded")
        fold = QuadConfiguration(tuple(tuple(p) for p in data["folded"]["points"]),
                                 "folded")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed configurations data: {exc}")
    return exp, fold


def load_configurations(path):
    with open(path, encoding="utf-8") as fh:
        return configurations_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# trajectory CSV

TRAJECTORY_COLUMNS = (
    ["t", "theta_drive_rad", "phase", "fold_state", "fold_angle_rad"]
    + [f"{c}{i}" for i in range(4) for c in "xyz"]
    + ["area_mm2"]
)


def trajectory_to_csv(states):
    # full float precision (shortest round-trip repr): the re-parse
    # contract promises areas recomputable from the points to 1e-9
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for s in states:
        t = math.inf if is_infinite(s.t) else float(s.t)
        row = [repr(t) if math.isfinite(t) else "inf",
               repr(float(s.theta_drive)), s.phase, s.fold_state,
               repr(float(s.fold_angle))]
        for p in s.wing_points:
            row.extend(repr(float(v)) for v in p)
        row.append(repr(float(s.swept_area)))
        w.writerow(row)
    return buf.getvalue()


def trajectory_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != TRAJECTORY_COLUMNS:
        raise ConfigError("unexpected trajectory CSV header")
    out = []
    for raw in rows[1:]:
        rec = dict(zip(TRAJECTORY_COLUMNS, raw))
        rec["t"] = float(rec["t"])
        rec["theta_drive_rad"] = float(rec["theta_drive_rad"])
        rec["fold_angle_rad"] = float(rec["fold_angle_rad"])
        for k in TRAJECTORY_COLUMNS[5:]:
            rec[k] = float(rec[k])
        out.append(rec)
    return out


def trajectory_points(record):
    return np.array([[record[f"{c}{i}"] for c in "xyz"] for i in range(4)])


# ---------------------------------------------------------------------------
# OBJ export


def scene_obj(linkage, t_values, wing_points=None, tol=None):
    """Wavefront OBJ: per configuration, the four links as line segments
    (through the joint centers) and, when attachment points are given, the
    wing quadrilateral as a face. Vertices in mm."""
    from .kinematics import joint_centers
    from .dqcore import dq_to_pose

    lines = ["# bennett-forge scene", "# lengths in mm"]
    vcount = 0
    for t in t_values:
        centers = joint_centers(linkage, t)
        base = vcount
        for c in centers:
            lines.append("v " + " ".join(f"{round12(v):.12g}" for v in c))
        vcount += 4
        for i in range(4):
            a = base + 1 + i
            b = base + 1 + (i + 1) % 4
            lines.append(f"l {a} {b}")
        if wing_points is not None:
            D = dq_to_pose(linkage.motion.evaluate(t))
            pts = np.asarray(wing_points, dtype=float)
            world = np.vstack([pts[0], pts[1],
                               D[:3, :3] @ pts[2] + D[:3, 3],
                               D[:3, :3] @ pts[3] + D[:3, 3]])
            fbase = vcount
            for p in world:
                lines.append("v " + " ".join(f"{round12(v):.12g}" for v in p))
            vcount += 4
            lines.append("f " + " ".join(str(fbase + 1 + i) for i in range(4)))
    return "\n".join(lines) + "\n"


def parse_obj_quad_faces(text):
    """Vertices and quad faces back from an OBJ string (testing aid)."""
    verts = []
    faces = []
    for ln in text.splitlines():
        parts = ln.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x) - 1 for x in parts[1:]])
    verts = np.array(verts)
    return verts, [verts[f] for f in faces]
