import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from bennett_forge.cli import main
from bennett_forge.serialize import trajectory_from_csv, trajectory_points
from bennett_forge.quad import quad_area

from conftest import POSE_B, POSE_C, mm

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")


def wing_config(tmp_path, **over):
    cfg = {
        "units": "mm",
        "stroke": {"poses": [np.eye(4).tolist(), mm(POSE_B).tolist(),
                             mm(POSE_C).tolist()]},
        "folding": {"quadspec": {"a0_mm": 80, "bennett_ratio": 0.5,
                                 "z_mm": [10, 40, -50], "alpha0_deg": 10}},
        "stop_limit_deg": 75,
        "samples": 64,
    }
    cfg.update(over)
    p = tmp_path / "wing.json"
    p.write_text(json.dumps(cfg))
    return p


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


class TestSynthStroke:
    def test_reference_run(self, tmp_path):
        cfg = wing_config(tmp_path)
        r = run("synth-stroke", "--config", str(cfg), "--out",
                str(tmp_path / "s"), "--no-figures")
        assert r.exit_code == 0, r.output
        mech = json.loads((tmp_path / "s" / "mechanism.json").read_text())
        a_vals = sorted([mech["dh"]["a0"], mech["dh"]["a1"]])
        assert a_vals[0] == pytest.approx(32.5, abs=0.2)
        assert a_vals[1] == pytest.approx(54.2, abs=0.2)
        tw = sorted([mech["dh"]["alpha0_deg"], mech["dh"]["alpha1_deg"]])
        assert tw[0] == pytest.approx(91.5, abs=0.2)
        assert tw[1] == pytest.approx(143.1, abs=0.2)
        report = json.loads((tmp_path / "s" / "stroke_report.json").read_text())
        assert report["bennett_residual"] < 1e-9

    def test_collinear_poses_exit2(self, tmp_path):
        cfg = wing_config(tmp_path, stroke={"poses": [np.eye(4).tolist()] * 3})
        r = CliRunner().invoke(main, ["synth-stroke", "--config", str(cfg),
                                 "--out", str(tmp_path / "s")])
        assert r.exit_code == 2
        err = json.loads(r.stderr.strip().splitlines()[-1])
        assert err["error"] == "collinear-poses"


class TestSynthFold:
    def test_reference_run(self, tmp_path):
        cfg = wing_config(tmp_path)
        r = run("synth-fold", "--config", str(cfg), "--out",
                str(tmp_path / "f"), "--no-figures")
        assert r.exit_code == 0, r.output
        report = json.loads((tmp_path / "f" / "fold_report.json").read_text())
        assert report["alpha1_deg"] == pytest.approx(20.32, abs=0.05)
        confs = json.loads((tmp_path / "f" / "configurations.json").read_text())
        assert len(confs["expanded"]["points"]) == 4

    def test_zero_twist_planar(self, tmp_path):
        cfg = wing_config(tmp_path, folding={"quadspec": {
            "a0_mm": 80, "bennett_ratio": 0.5, "z_mm": [10, 40, -50],
            "alpha0_deg": 0}})
        r = run("synth-fold", "--config", str(cfg), "--out",
                str(tmp_path / "f0"), "--no-figures")
        assert r.exit_code == 0, r.output
        confs = json.loads((tmp_path / "f0" / "configurations.json").read_text())
        assert confs["expanded"]["points"][2] == [160.0, 80.0, 40.0]
        assert confs["folded"]["points"][2] == [0.0, 240.0, 40.0]
        assert confs["alpha1_deg"] == 0.0

    def test_twist_infeasible_exit2(self, tmp_path):
        cfg = wing_config(tmp_path, folding={"quadspec": {
            "a0_mm": 80, "bennett_ratio": 0.1, "z_mm": [10, 40, -50],
            "alpha0_deg": 30}})
        r = CliRunner().invoke(main, ["synth-fold", "--config", str(cfg),
                                 "--out", str(tmp_path / "f")])
        assert r.exit_code == 2
        err = json.loads(r.stderr.strip().splitlines()[-1])
        assert err["error"] in ("twist-infeasible", "invalid-spec")


class TestSimulate:
    def test_from_quadspec_and_poses(self, tmp_path):
        cfg = wing_config(tmp_path)
        r = run("simulate", "--config", str(cfg), "--out",
                str(tmp_path / "sim"), "--no-figures")
        assert r.exit_code == 0, r.output
        summary = json.loads(
            (tmp_path / "sim" / "simulation_summary.json").read_text())
        assert summary["fold_transitions"] == 2
        rows = trajectory_from_csv(
            (tmp_path / "sim" / "trajectory.csv").read_text())
        assert len(rows) == 64
        for rec in rows[:8]:
            assert quad_area(trajectory_points(rec)) == pytest.approx(
                rec["area_mm2"], abs=1e-9)

    def test_too_few_samples_exit2(self, tmp_path):
        cfg = wing_config(tmp_path, samples=4)
        r = CliRunner().invoke(main, ["simulate", "--config", str(cfg),
                                 "--out", str(tmp_path / "sim")])
        assert r.exit_code == 2
        err = json.loads(r.stderr.strip().splitlines()[-1])
        assert err["error"] == "config-error"

    def test_zero_stop_limit_exit2(self, tmp_path):
        cfg = wing_config(tmp_path, stop_limit_deg=0.0)
        r = CliRunner().invoke(main, ["simulate", "--config", str(cfg),
                                 "--out", str(tmp_path / "sim")])
        assert r.exit_code == 2

    def test_from_mechanism_files(self, tmp_path):
        cfg = wing_config(tmp_path)
        assert run("synth-stroke", "--config", str(cfg), "--out",
                   str(tmp_path / "s"), "--no-figures").exit_code == 0
        assert run("synth-fold", "--config", str(cfg), "--out",
                   str(tmp_path / "f"), "--no-figures").exit_code == 0
        sim_cfg = tmp_path / "sim.json"
        sim_cfg.write_text(json.dumps({
            "units": "mm",
            "stroke": {"mechanism": "s/mechanism.json"},
            "folding": {"mechanism": "f/mechanism.json",
                        "configurations": "f/configurations.json"},
            "samples": 32,
        }))
        r = run("simulate", "--config", str(sim_cfg), "--out",
                str(tmp_path / "sim2"), "--no-figures")
        assert r.exit_code == 0, r.output
        summary = json.loads(
            (tmp_path / "sim2" / "simulation_summary.json").read_text())
        assert summary["fold_transitions"] == 2
        assert summary["folded_over_extended_area"] == pytest.approx(0.4349,
                                                                     abs=2e-3)


class TestExportObj:
    def test_export_and_reparse(self, tmp_path, demo_twisted):
        from bennett_forge.serialize import (mechanism_to_dict, write_json,
                                             configurations_to_dict)
        write_json(tmp_path / "m.json", mechanism_to_dict(demo_twisted.linkage))
        write_json(tmp_path / "c.json", configurations_to_dict(demo_twisted))
        r = run("export-obj", "--mechanism", str(tmp_path / "m.json"),
                "--configurations", str(tmp_path / "c.json"),
                "--t", "0.5", "--out", str(tmp_path / "scene.obj"))
        assert r.exit_code == 0, r.output
        text = (tmp_path / "scene.obj").read_text()
        assert text.count("\nf ") == 2  # home + t=0.5

    def test_unreadable_mechanism_exit2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"axes\": []}")
        r = CliRunner().invoke(main, ["export-obj", "--mechanism", str(bad),
                                 "--out", str(tmp_path / "x.obj")])
        assert r.exit_code == 2


class TestDeterminism:
    def test_byte_identical_outputs(self, tmp_path):
        cfg = wing_config(tmp_path)
        for d in ("a", "b"):
            assert run("synth-stroke", "--config", str(cfg), "--out",
                       str(tmp_path / d), "--no-figures").exit_code == 0
            assert run("synth-fold", "--config", str(cfg), "--out",
                       str(tmp_path / d / "fold"), "--no-figures").exit_code == 0
        for rel in ("mechanism.json", "stroke_report.json",
                    "fold/mechanism.json", "fold/configurations.json"):
            assert (tmp_path / "a" / rel).read_bytes() == \
                (tmp_path / "b" / rel).read_bytes()
