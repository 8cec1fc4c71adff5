import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from dehnlab.cli import main
from dehnlab.experiments import (DegenerateSeries, ExperimentManifest, fit_growth, load_config,
                                 run_suite)
from dehnlab.experiments import cusp_loop_word
from dehnlab.mesh import adaptive_mesh, constant_field, mesh_svg
from dehnlab.templates import build_template


def test_fit_squares():
    fit = fit_growth([1, 2, 3, 4, 5], [1, 4, 9, 16, 25])
    assert fit.slope == pytest.approx(2.0, abs=1e-9)
    assert fit.residual == pytest.approx(0.0, abs=1e-9)


def test_fit_cubes():
    assert fit_growth([2, 4, 8, 16], [8, 64, 512, 4096]).slope == pytest.approx(3.0, abs=1e-9)


@given(st.floats(0.1, 4), st.floats(0.01, 100))
def test_fit_recovers_power_laws(k, c):
    xs = [2, 3, 5, 8, 13]
    fit = fit_growth(xs, [c * x ** k for x in xs])
    assert fit.slope == pytest.approx(k, abs=1e-7)


@pytest.mark.parametrize("sizes,costs", [([1, 2, 3], [1, 4, 9]), ([1, 2, 3, 4], [1, 0, 9, 16]),
                                          ([2, 2, 2, 2], [1, 2, 3, 4])])
def test_fit_degenerate(sizes, costs):
    with pytest.raises(DegenerateSeries):
        fit_growth(sizes, costs)


def test_unit_mesh_render_has_all_triangles():
    assert mesh_svg(adaptive_mesh(8, constant_field(1))).count("<polygon") == 128
    assert mesh_svg(adaptive_mesh(8, constant_field(8))).count("<polygon") == 2


def test_cusp_loop_render_marks_parabolic_faces():
    tpl = build_template(cusp_loop_word(12, 5))
    svg = tpl.svg()
    twin = json.loads(tpl.to_json())
    n_para = sum(c.startswith("Parabolic") for c in twin["classes"])
    assert n_para > 0
    assert svg.count('fill="#6080e0"') == n_para


def _read(out):
    return {name: (out / name).read_bytes() for name in sorted(p.name for p in out.iterdir())}


def test_reruns_are_byte_identical(tmp_path):
    man = ExperimentManifest("witness", sizes=(12,), seed=3, out=str(tmp_path))
    run_suite(man)
    first = _read(tmp_path)
    run_suite(man)
    assert _read(tmp_path) == first
    assert set(first) == {"report.json", "data.csv"}


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_suite(ExperimentManifest("reduction", sizes=(20, 20), seed=1, out=str(a)))
    run_suite(ExperimentManifest("reduction", sizes=(20, 20), seed=1, out=str(b), jobs=2))
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()


def test_report_embeds_config(tmp_path):
    res = run_suite(ExperimentManifest("mesh", sizes=(4, 16), seed=2, out=str(tmp_path)))
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["ok"] == res.ok
    assert rep["config"]["seed"] == 2 and rep["config"]["sizes"] == [4, 16]
    assert "C_Add" in rep["config"]["model"]
    assert (tmp_path / "mesh_cone.svg").exists()


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite(ExperimentManifest("nope"))


def test_config_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed = 9\nsizes = 3, 5\nC_Com = 2.5  # override\nname = x\n")
    assert load_config(cfg) == {"seed": 9, "sizes": [3, 5], "C_Com": 2.5, "name": "x"}


def test_cli_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 9\nsizes = 30\nC_Com = 2.5\n")
    out = tmp_path / "out"
    code = main(["witness", "--config", str(cfg), "--sizes", "6", "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["config"]["seed"] == 9
    assert rep["config"]["sizes"] == [6]
    assert rep["config"]["model"]["C_Com"] == 2.5
    assert "PASS" in capsys.readouterr().out


def test_cli_nonzero_exit_on_failed_check(tmp_path):
    # an envelope constant far below the measured ratios must fail the check
    cfg = tmp_path / "tight.cfg"
    cfg.write_text("C_NP = 1e-6\n")
    code = main(["triangular", "--p", "3", "--sizes", "4,8", "--config", str(cfg), "--no-render"])
    assert code == 1


def test_console_script_runs(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dehnlab.cli", "mesh", "--sizes", "2,8",
                           "--out", str(tmp_path), "--no-render"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert (tmp_path / "report.json").exists() and (tmp_path / "data.csv").exists()
    assert not (tmp_path / "mesh_cone.svg").exists()
