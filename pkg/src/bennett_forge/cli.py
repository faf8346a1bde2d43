"""Command line front end.

Subcommands: synth-stroke, synth-fold, simulate, export-obj, serve.
Exit codes: 0 success, 1 internal error, 2 user/input error (with a
machine-readable error JSON on stderr). Set BENNETT_FORGE_LOG to control
log verbosity.
"""

from __future__ import annotations

import functools
import json
import logging
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import (
    build_assembly,
    folding_bundle_from_twist,
    load_project_config,
    resolve_folding,
    resolve_stroke,
)
from .dqcore import T_INFINITY
from .errors import BennettForgeError
from .kinematics import sweep_trajectory, trajectory_summary
from .quad import apply_twist
from .serialize import (
    configurations_to_dict,
    dumps_canonical,
    load_configurations,
    load_mechanism,
    mechanism_to_dict,
    quadspec_to_dict,
    scene_obj,
    trajectory_to_csv,
    write_json,
)
from .synthesis import check_bennett_condition

log = logging.getLogger("bennett_forge")


def _setup_logging():
    level = os.environ.get("BENNETT_FORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _input_errors(fn):
    """Map toolkit errors to exit code 2 with error JSON on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BennettForgeError as exc:
            sys.stderr.write(json.dumps(exc.as_dict()) + "\n")
            sys.exit(2)

    return wrapper


def _outdir(out):
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _motion_report(linkage):
    dh = linkage.dh
    abs_motion = linkage.motion.right_multiplied(linkage.home_coupler)
    return {
        "motion_coefficients": [list(c.as_array())
                                for c in abs_motion.coefficients],
        "dh": {
            "a0": dh.a0,
            "alpha0_deg": math.degrees(dh.alpha0),
            "a1": dh.a1,
            "alpha1_deg": math.degrees(dh.alpha1),
            "d_residual": dh.d_residual,
            "degenerate": dh.degenerate,
        },
        "bennett_residual": check_bennett_condition(dh),
        "quadric_residual": linkage.motion.max_study_residual(),
    }


@click.group()
@click.version_option(__version__, prog_name="bennett-forge")
def main():
    """Bennett 4R synthesis, folding-linkage construction and wing simulation."""
    _setup_logging()


@main.command("synth-stroke")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True), help="Project config (toml/json).")
@click.option("--out", default=".", help="Output directory.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_input_errors
def cmd_synth_stroke(config_path, out, figures):
    """Synthesize the stroke linkage from three poses."""
    cfg, base = load_project_config(config_path)
    from .errors import ConfigError

    if cfg.stroke is None or cfg.stroke.poses is None:
        raise ConfigError("synth-stroke needs 'stroke.poses' in the config")
    linkage = resolve_stroke(cfg, base)
    outdir = _outdir(out)
    write_json(outdir / "mechanism.json", mechanism_to_dict(linkage))
    report = _motion_report(linkage)
    write_json(outdir / "stroke_report.json", report)
    if figures:
        from .report import save_linkage_figure
        save_linkage_figure(outdir / "stroke_linkage.png", linkage,
                            title="stroke linkage (home)")
    dh = report["dh"]
    click.echo(f"stroke linkage: a0 = {dh['a0']:.3f} mm, "
               f"alpha0 = {dh['alpha0_deg']:.3f} deg, "
               f"a1 = {dh['a1']:.3f} mm, alpha1 = {dh['alpha1_deg']:.3f} deg")
    click.echo(f"bennett residual: {report['bennett_residual']:.3e}")
    click.echo(f"wrote {outdir / 'mechanism.json'}")


@main.command("synth-fold")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", default=".", help="Output directory.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_input_errors
def cmd_synth_fold(config_path, out, figures):
    """Construct the folding linkage from quadrilateral parameters."""
    cfg, base = load_project_config(config_path)
    from .errors import ConfigError

    if cfg.folding is None or cfg.folding.quadspec is None:
        raise ConfigError("synth-fold needs 'folding.quadspec' in the config")
    spec = cfg.folding.quadspec.to_spec()
    tq = apply_twist(spec)
    outdir = _outdir(out)
    write_json(outdir / "mechanism.json", mechanism_to_dict(tq.linkage))
    write_json(outdir / "configurations.json", configurations_to_dict(tq))
    write_json(outdir / "quadspec.json", quadspec_to_dict(spec))
    report = _motion_report(tq.linkage)
    report.update({
        "alpha1_deg": math.degrees(tq.alpha1),
        "expanded_points": [list(p) for p in tq.points],
        "folded_points": [list(p) for p in tq.folded_points],
        "expanded_area_mm2": tq.expanded_area,
        "folded_area_mm2": tq.folded_area,
        "folded_over_expanded_area": tq.folded_area / tq.expanded_area,
    })
    write_json(outdir / "fold_report.json", report)
    if figures:
        from .report import save_configurations_figure
        save_configurations_figure(outdir / "folding_configurations.png",
                                   tq.linkage, tq.attachments_home,
                                   tq.folded_parameter)
    click.echo(f"alpha1 = {math.degrees(tq.alpha1):.3f} deg")
    click.echo("p2'' = [" + ", ".join(f"{v:.2f}" for v in tq.points[2]) + "]")
    click.echo("p3'' = [" + ", ".join(f"{v:.2f}" for v in tq.points[3]) + "]")
    click.echo(f"areas: expanded {tq.expanded_area:.1f} mm^2, "
               f"folded {tq.folded_area:.1f} mm^2")
    click.echo(f"wrote {outdir / 'mechanism.json'}")


@main.command("simulate")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", default=".", help="Output directory.")
@click.option("--samples", type=int, default=None,
              help="Override config sample count.")
@click.option("--allow-nearest-stop", is_flag=True, default=False,
              help="Accept the nearest reachable stop angle when the stop "
                   "range exceeds the linkage's fold arc. The exact-closure "
                   "wing model always rests on the stop-bounded arc, so "
                   "this is accepted for interface compatibility.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_input_errors
def cmd_simulate(config_path, out, samples, allow_nearest_stop, figures):
    """Simulate the coupled wing over one stroke cycle."""
    cfg, base = load_project_config(config_path)
    if samples is not None:
        cfg = cfg.model_copy(update={"samples": samples})
    assembly, _stroke, _folding = build_assembly(cfg, base)
    states = sweep_trajectory(assembly, cfg.samples)
    summary = trajectory_summary(assembly, states)
    outdir = _outdir(out)
    (outdir / "trajectory.csv").write_text(trajectory_to_csv(states),
                                           encoding="utf-8")
    write_json(outdir / "simulation_summary.json", summary)
    if figures:
        from .report import save_cycle_figure, save_wing_snapshot_figure
        save_cycle_figure(outdir / "cycle.png", states)
        save_wing_snapshot_figure(outdir / "wing_snapshots.png", states)
    click.echo(f"fold transitions per cycle: {summary['fold_transitions']}")
    click.echo(f"swept area: min {summary['area_min_mm2']:.1f}, "
               f"max {summary['area_max_mm2']:.1f} mm^2 "
               f"(folded/extended = {summary['folded_over_extended_area']:.4f})")
    click.echo(f"frontal area folded/extended = "
               f"{summary['folded_over_extended_frontal']:.4f}")
    click.echo(f"wrote {outdir / 'trajectory.csv'}")


@main.command("export-obj")
@click.option("--mechanism", "mechanism_path", required=True,
              type=click.Path(exists=True), help="mechanism.json to export.")
@click.option("--configurations", "config_path", default=None,
              type=click.Path(exists=True),
              help="configurations.json for the wing quadrilateral.")
@click.option("--t", "t_values", multiple=True, type=float,
              help="Motion parameter values (repeatable); 'inf' via --home.")
@click.option("--home/--no-home", default=True,
              help="Include the home configuration (t = infinity).")
@click.option("--out", default="scene.obj", help="Output OBJ path.")
@_input_errors
def cmd_export_obj(mechanism_path, config_path, t_values, home, out):
    """Export link skeleton (and wing quad) geometry as Wavefront OBJ."""
    linkage = load_mechanism(mechanism_path)
    wing_points = None
    if config_path:
        expanded, _folded = load_configurations(config_path)
        wing_points = expanded.points
    ts = ([T_INFINITY] if home else []) + list(t_values)
    if not ts:
        from .errors import ConfigError
        raise ConfigError("no configurations selected (use --home or --t)")
    text = scene_obj(linkage, ts, wing_points)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text, encoding="utf-8")
    click.echo(f"wrote {out} ({len(ts)} configuration(s))")


@main.command("serve")
@click.option("--port", type=int, default=8707, show_default=True)
@click.option("--bind", default="127.0.0.1", show_default=True,
              help="Bind address (local tool; widen deliberately).")
@_input_errors
def cmd_serve(port, bind):
    """Run the local JSON service for the designer UI."""
    import uvicorn

    from .service import create_app

    app = create_app()
    click.echo(f"serving on http://{bind}:{port}")
    uvicorn.run(app, host=bind, port=port, log_level="warning")


if __name__ == "__main__":
    main()
