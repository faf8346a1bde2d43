"""Matplotlib figure rendering for the CLI report path.

Figures are written next to the delimited/JSON outputs. The Agg backend is
forced so rendering works headless; PNG metadata is pinned so repeated runs
produce identical bytes.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dqcore import T_INFINITY, dq_to_pose  # noqa: E402
from .kinematics import joint_centers  # noqa: E402

_PNG_META = {"Software": "bennett-forge"}

_AX_COLOR = "tab:red"
_LINK_COLOR = "0.25"
_WING_COLOR = "tab:blue"


def _axis_segment(line, center, half_length):
    c = np.asarray(center)
    d = line.d
    return np.vstack([c - half_length * d, c + half_length * d])


def _draw_linkage(ax, linkage, t, wing_points=None, wing_alpha=0.35,
                  label_axes=False):
    centers = joint_centers(linkage, t)
    axes_t = linkage.axes_at(t)
    scale = max(np.linalg.norm(centers[i] - centers[(i + 1) % 4])
                for i in range(4))
    for i, (line, c) in enumerate(zip(axes_t, centers)):
        seg = _axis_segment(line, c, 0.35 * scale)
        ax.plot(seg[:, 0], seg[:, 1], seg[:, 2], color=_AX_COLOR, lw=1.0,
                alpha=0.8)
        if label_axes:
            ax.text(*seg[1], f"z{i}", fontsize=8, color=_AX_COLOR)
    loop = np.vstack(centers + [centers[0]])
    ax.plot(loop[:, 0], loop[:, 1], loop[:, 2], color=_LINK_COLOR, lw=2.5)
    if wing_points is not None:
        D = dq_to_pose(linkage.motion.evaluate(t))
        pts = np.asarray(wing_points, dtype=float)
        world = np.vstack([pts[0], pts[1],
                           D[:3, :3] @ pts[2] + D[:3, 3],
                           D[:3, :3] @ pts[3] + D[:3, 3]])
        quad = np.vstack([world, world[:1]])
        ax.plot(quad[:, 0], quad[:, 1], quad[:, 2], color=_WING_COLOR, lw=1.0)
        try:
            from mpl_toolkits.mplot3d.art3d import Poly3DCollection
            ax.add_collection3d(Poly3DCollection([world], alpha=wing_alpha,
                                                 facecolor=_WING_COLOR))
        except Exception:
            pass


def _finish_3d(ax, title):
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("x (mm)", fontsize=8)
    ax.set_ylabel("y (mm)", fontsize=8)
    ax.set_zlabel("z (mm)", fontsize=8)
    ax.tick_params(labelsize=7)
    ax.set_box_aspect((1, 1, 1))


def save_linkage_figure(path, linkage, wing_points=None, title="linkage"):
    """Home configuration: joint axes as lines, links as bars, wing quad."""
    fig = plt.figure(figsize=(5.5, 5.0))
    ax = fig.add_subplot(projection="3d")
    _draw_linkage(ax, linkage, T_INFINITY, wing_points, label_axes=True)
    _finish_3d(ax, title)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def save_configurations_figure(path, linkage, wing_points, folded_parameter,
                               title="expanded vs folded"):
    fig = plt.figure(figsize=(9.0, 4.6))
    for k, (t, sub) in enumerate([(T_INFINITY, "expanded"),
                                  (folded_parameter, "folded")]):
        ax = fig.add_subplot(1, 2, k + 1, projection="3d")
        _draw_linkage(ax, linkage, t, wing_points)
        _finish_3d(ax, sub)
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def save_cycle_figure(path, states, title="flap cycle"):
    """Swept area and fold angle across one cycle, transitions marked."""
    n = len(states)
    idx = np.arange(n)
    areas = np.array([s.swept_area for s in states])
    fold = np.degrees([s.fold_angle for s in states])
    phases = [s.phase for s in states]
    trans = [i for i in range(n)
             if states[i].fold_state != states[(i + 1) % n].fold_state]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.2), sharex=True)
    ax1.plot(idx, areas, color=_WING_COLOR, lw=1.5)
    ax1.set_ylabel("swept area (mm$^2$)", fontsize=9)
    ax2.step(idx, fold, where="post", color="tab:orange", lw=1.5)
    ax2.set_ylabel("fold angle (deg)", fontsize=9)
    ax2.set_xlabel("cycle sample", fontsize=9)
    down = np.array([p == "downstroke" for p in phases])
    for ax in (ax1, ax2):
        ax.fill_between(idx, 0, 1, where=down, transform=ax.get_xaxis_transform(),
                        color="tab:green", alpha=0.08, linewidth=0)
        for i in trans:
            ax.axvline(i + 0.5, color="k", lw=0.8, ls="--", alpha=0.6)
        ax.tick_params(labelsize=8)
    ax1.set_title(f"{title} ({len(trans)} fold transitions; "
                  "shaded: downstroke)", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)


def save_wing_snapshot_figure(path, states, title="wing through one cycle"):
    """3D overlay of the wing quadrilateral at a few cycle samples."""
    fig = plt.figure(figsize=(5.5, 5.0))
    ax = fig.add_subplot(projection="3d")
    n = len(states)
    picks = [0, n // 4, n // 2, (3 * n) // 4]
    cmap = plt.get_cmap("viridis")
    for j, i in enumerate(picks):
        pts = np.asarray(states[i].wing_points)
        quad = np.vstack([pts, pts[:1]])
        ax.plot(quad[:, 0], quad[:, 1], quad[:, 2],
                color=cmap(j / max(len(picks) - 1, 1)), lw=1.6,
                label=f"sample {i} ({states[i].fold_state})")
    ax.legend(fontsize=7, loc="upper left")
    _finish_3d(ax, title)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
