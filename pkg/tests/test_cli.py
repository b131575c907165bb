import json
import math
import os
import subprocess
import sys

import pytest

from cubical.cli import main
from cubical.families import FAMILIES
from cubical.shapes import load_shape

from oracles import disk_cube_count_bruteforce

DISK = '{"kind": "disk", "center": [0, 0], "radius": 1}'
CIRCLE = '{"kind": "boundary", "of": {"kind": "disk", "center": [0, 0], "radius": 1}}'
SEGMENT = '{"kind": "polyline", "vertices": [[0, 0.3333333333333333], [1, 0.3333333333333333]]}'
DIAMOND = '{"kind": "polygon", "vertices": [[0.5, 0], [1, 0.5], [0.5, 1], [0, 0.5]]}'


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    summary = out / "summary.json"
    return code, (json.loads(summary.read_text()) if summary.exists() else None), out


def test_cover_with_mink_check(tmp_path):
    code, s, out = run(tmp_path, "cover", "--shape", DISK, "--depth", "8", "--check", "mink-bound", "--svg")
    assert code == 0
    assert s["passed"] is True
    assert s["cover_volume"] <= s["bound"]
    assert (out / "results.csv").read_text().splitlines()[0] == "d,m1,m2"
    assert (out / "figure.svg").read_text().startswith("<svg")


def test_boundary_ratio_diamond(tmp_path):
    code, s, out = run(tmp_path, "boundary-ratio", "--shape", DIAMOND, "--depths", "4..12", "--check")
    assert code == 0
    assert abs(s["last_ratio"] - math.sqrt(2)) < 0.02
    assert len((out / "results.csv").read_text().splitlines()) == 10


def test_beta_segment_total_zero(tmp_path):
    code, s, _ = run(tmp_path, "beta", "--shape", SEGMENT, "--depths", "2..7")
    assert code == 0
    assert s["total"] == 0.0
    assert s["truncated"] is True


def test_reach_and_failed_check(tmp_path):
    shape = '{"kind": "disk", "center": [0, 0], "radius": 2}'
    code, s, _ = run(tmp_path, "reach", "--shape", shape, "--spacing", "0.01", "--check")
    assert code == 0 and 1.98 <= s["reach_estimate"] <= 2.0
    code, s, _ = run(tmp_path, "reach", "--shape", shape, "--spacing", "0.01", "--check",
                     "--check-tol", "1e-15")
    assert code == 3
    assert s["passed"] is False


def test_unattainable_tolerance_exit_3(tmp_path):
    code, _, _ = run(tmp_path, "minkowski", "--shape", CIRCLE, "--radii", "0.05",
                     "--rtol", "1e-9", "--max-depth", "4")
    assert code == 3


def test_minkowski_circle(tmp_path):
    code, s, _ = run(tmp_path, "minkowski", "--shape", CIRCLE, "--radii", "0.1,0.05", "--check")
    assert code == 0
    assert s["estimates"][1] == pytest.approx(2 * math.pi, rel=0.01)


def test_lift_and_density(tmp_path):
    code, s, out = run(tmp_path, "lift", "--shape", DISK, "--spacing", "0.015625", "--depth", "4", "--check")
    assert code == 0
    assert s["theta_runs"] == 2
    assert s["max_deviation"] <= s["half_diagonal"]
    assert (out / "quantized.csv").exists()
    bu = '{"kind": "ball_union", "centers": [[0, 0], [1.5, 0.2]], "radius": 1}'
    code, s, _ = run(tmp_path, "density", "--shape", bu, "--depth", "5", "--check")
    assert code == 0 and s["chain_holds"]


def test_flatnorm_and_beta_flat(tmp_path):
    code, s, out = run(tmp_path, "flatnorm", "--shape", DISK, "--grid-depth", "5", "--lambda", "0.5",
                       "--check", "--svg")
    assert code == 0
    dec = json.loads((out / "decomposition.json").read_text())
    assert dec["value"] == pytest.approx(s["value"])
    assert len(dec["cells_of_S"]) == s["S_cells"] == s["region_cells"]
    code, s, _ = run(tmp_path, "beta-flat", "--shape", DISK, "--grid-depth", "7", "--depths", "1..3")
    assert code == 0 and s["total"] >= 0


def test_flatnorm_region_pbm(tmp_path):
    pbm = tmp_path / "r.pbm"
    pbm.write_text("P1\n# depth 3 offset 0 0\n3 3\n0 1 0\n1 1 1\n0 1 0\n")
    code, s, _ = run(tmp_path, "flatnorm", "--region", str(pbm), "--lambda", "100")
    assert code == 0
    assert s["value"] == pytest.approx(12 / 8)


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["beta", "--shape", DISK, "--depths", "2..5", "--out", str(out)]) == 0
        outs.append((out / "results.csv").read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("family", FAMILIES)
def test_generate_shape_roundtrip(tmp_path, family):
    params = ["--param", "K=10"] if family == "eps-rational-balls" else []
    code, s, out = run(tmp_path, "generate-shape", family, *params, "--max-depth", "5")
    assert code == 0
    shape = load_shape(out / "shape.json")
    assert shape.kind == s["kind"]
    # the written file is accepted back as a CLI input
    code, _, _ = run(tmp_path, "cover", "--shape", str(out / "shape.json"), "--depth", "3")
    assert code == 0


def test_koch_generation_segments(tmp_path):
    code, s, _ = run(tmp_path, "generate-shape", "koch", "--param", "level=3")
    assert code == 0 and s["segments"] == 64


@pytest.mark.parametrize("args,needle", [
    (["cover", "--shape", '{"kind": "disk", "center": [0, 0]}', "--depth", "3"], "radius"),
    (["cover", "--shape", '{"kind": "disk", ', "--depth", "3"], "JSON"),
    (["cover", "--shape", "/nonexistent.json", "--depth", "3"], "not found"),
    (["density", "--shape", DISK, "--depth", "4"], "ball_union"),
    (["beta-flat", "--shape", DISK, "--grid-depth", "4", "--depths", "2..3"], "grid depth"),
])
def test_precondition_errors_exit_2(tmp_path, capsys, args, needle):
    code = main([*args, "--out", str(tmp_path)])
    assert code == 2
    assert needle in capsys.readouterr().err


def test_unknown_command_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CUBICAL_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["cover", "--shape", DISK, "--depth", "2"]) == 0
    assert (tmp_path / "env" / "summary.json").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "cubical", "cover", "--shape", DISK, "--depth", "3",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["command"] == "cover"
    assert s["cube_count"] == disk_cube_count_bruteforce(0, 0, 1, 3)
