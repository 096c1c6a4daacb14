"""Scene schema, verification reports, CSV export, CLI contract."""

import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pasurf.cli import main
from pasurf.gallery import Expectation, GalleryCase, gallery, gallery_case
from pasurf.scenes import SceneError, compile_scene, load_scene, scene_from_dict
from pasurf.verify import (compute_bundle, export_csv, report_to_json,
                           run_verify)


def hemisphere_dict(**overrides):
    d = json.loads(json.dumps(gallery_case("hemisphere-H3").scene_dict))
    d.update(overrides)
    return d


# -- schema validation ---------------------------------------------------------


def test_scene_roundtrip_through_dump(tmp_path):
    d = hemisphere_dict()
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(d))
    scene = load_scene(path)
    compiled = compile_scene(scene)
    assert compiled.chart.dim == 3
    assert compiled.immersion.n_params == 2


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.pop("chart"), "chart"),
    (lambda d: d.update(schemaVersion=99), "schemaVersion"),
    (lambda d: d["surface"].update(parameters=["u"]), "parameters"),
    (lambda d: d["surface"].update(map=["u", "v"]), "map"),
    (lambda d: d["chart"]["metric"][0].__setitem__(1, "z"), "symmetric"),
    (lambda d: d["surface"].update(domain=[[3.0, 0.2], [0.05, 6.2]]), "lo < hi"),
    (lambda d: d["surface"].update(grid=[0, 20]), "grid"),
    (lambda d: d["field"].update(components=["0", "0", "w"]), "w"),
    (lambda d: d["options"].update(orientation=2), "orientation"),
    (lambda d: d["chart"].update(coordinates=["x", "y", "2z"]), "identifier"),
    (lambda d: d["chart"]["domain"].update(bounds={"w": [0, None]}), "unknown"),
])
def test_scene_validation_errors(mutate, fragment):
    d = hemisphere_dict()
    mutate(d)
    with pytest.raises(SceneError) as err:
        scene_from_dict(d)
    assert fragment.lower() in str(err.value).lower()


def test_field_may_reference_chart_coordinates():
    scene = scene_from_dict(hemisphere_dict())
    # the -z component was spliced through the map: z(u,v) = sech(u)
    compiled = compile_scene(scene)
    val = compiled.field.values_at([0.7, 0.3])
    assert val[2] == pytest.approx(-1.0 / math.cosh(0.7), abs=1e-15)


def test_non_unit_declared_field_exits_2():
    d = hemisphere_dict()
    d["field"]["components"] = ["0", "0", "-2*z"]
    report, code = run_verify(scene=scene_from_dict(d), grid=(4, 4))
    assert code == 2
    assert "declared unit" in report["error"]
    assert "3.0" in report["error"]          # max | |V|^2 - 1 | = 3


def test_plain_scene_verifies_without_expectations():
    d = hemisphere_dict()
    report, code = run_verify(scene=scene_from_dict(d), grid=(8, 8))
    assert code == 0
    assert report["expectations"] == []
    assert report["pass"] is True
    assert report["field"]["classes"] == ["antiTorqued"]


def test_failing_expectation_exits_1():
    case = gallery_case("hemisphere-H3")
    bogus = GalleryCase(case.id, case.scene_dict, (
        Expectation("wrong-theta", "theta_value", 1e-9,
                    "deliberately wrong target", {"target": 0.5}),
    ))
    report, code = run_verify(case=bogus, grid=(6, 6))
    assert code == 1
    assert report["expectations"][0]["pass"] is False


# -- report and CSV -------------------------------------------------------------


@pytest.fixture(scope="module")
def hemi_small():
    case = gallery_case("hemisphere-H3")
    compiled = compile_scene(case.scene())
    return case, compute_bundle(compiled, grid_shape=(8, 8))


def test_report_deterministic_across_runs_and_workers(hemi_small):
    from pasurf.verify import build_report

    case, _ = hemi_small
    compiled = compile_scene(case.scene())
    texts = []
    for workers in (None, 1, 4):
        bundle = compute_bundle(compiled, grid_shape=(6, 6), workers=workers)
        texts.append(report_to_json(build_report(bundle, [])))
    assert texts[0] == texts[1] == texts[2]


def test_report_json_keys_sorted(hemi_small):
    from pasurf.verify import build_report

    _, bundle = hemi_small
    text = report_to_json(build_report(bundle, []))
    data = json.loads(text)
    assert list(data.keys()) == sorted(data.keys())
    assert "NaN" not in text and "Infinity" not in text
    assert text.endswith("\n")


def test_export_csv_format(hemi_small):
    _, bundle = hemi_small
    buf = io.StringIO()
    export_csv(buf, bundle, "theta")
    lines = buf.getvalue().split("\n")
    assert lines[0] == "u,v,theta"
    assert lines[-1] == ""                      # trailing LF
    rows = [l.split(",") for l in lines[1:-1]]
    assert len(rows) == 64
    # row-major: v varies fastest
    us = [float(r[0]) for r in rows]
    vs = [float(r[1]) for r in rows]
    assert us[0] == us[1] and vs[1] > vs[0]
    # theta = acos(sech u) to high precision
    for r in rows[:: 13]:
        u, _, theta = (float(x) for x in r)
        assert theta == pytest.approx(math.acos(1.0 / math.cosh(u)), abs=1e-9)
    # full double precision survives the round trip
    assert float(rows[0][2]) == pytest.approx(
        math.acos(1.0 / math.cosh(float(rows[0][0]))), abs=1e-12)


def test_export_kint_constant_column():
    case = gallery_case("cylinder-H3")
    bundle = compute_bundle(compile_scene(case.scene()), grid_shape=(6, 6))
    buf = io.StringIO()
    export_csv(buf, bundle, "K_int")
    vals = [float(l.split(",")[2]) for l in buf.getvalue().strip().split("\n")[1:]]
    assert max(abs(v + 1.0) for v in vals) <= 1e-9


def test_export_single_point_grid():
    case = gallery_case("plane-z1-R3")
    bundle = compute_bundle(compile_scene(case.scene()), grid_shape=(1, 1))
    buf = io.StringIO()
    export_csv(buf, bundle, "theta")
    lines = buf.getvalue().strip().split("\n")
    assert len(lines) == 2


def test_export_unknown_and_undefined(hemi_small):
    from pasurf.charts import GeometryError

    _, bundle = hemi_small
    with pytest.raises(SceneError):
        export_csv(io.StringIO(), bundle, "nonsense")
    case = gallery_case("sphere-R3-normal")
    nb = compute_bundle(compile_scene(case.scene()), grid_shape=(3, 3))
    with pytest.raises(GeometryError):
        export_csv(io.StringIO(), nb, "B")


# -- CLI ------------------------------------------------------------------------


def test_cli_gallery_list(capsys):
    assert main(["gallery", "list"]) == 0
    out = capsys.readouterr().out
    for case in gallery():
        assert case.id in out


def test_cli_gallery_dump_roundtrip(tmp_path, capsys):
    out = tmp_path / "hemi.json"
    assert main(["gallery", "dump", "hemisphere-H3", "--out", str(out)]) == 0
    scene = load_scene(out)
    assert scene.name == "hemisphere-H3"


def test_cli_verify_json_and_exit(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["verify", "cone-R3", "--grid", "10x10", "--json", str(out)])
    captured = capsys.readouterr().out
    assert code == 0
    assert "cone-R3: pass" in captured
    report = json.loads(out.read_text())
    assert report["pass"] is True
    assert report["gridShape"] == [10, 10]


def test_cli_verify_determinism_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "plane-z1-R3", "--grid", "8x8", "--json", str(a)])
    main(["verify", "plane-z1-R3", "--grid", "8x8", "--json", str(b),
          "--workers", "4"])
    assert a.read_bytes() == b.read_bytes()


def test_cli_bad_scene_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_cli_family_eval_inadmissible(capsys):
    code = main(["family", "eval", "--kind", "F", "--K0", "0.5", "--c1", "0.2",
                 "--c2", "0", "--u", "0:1:0.5"])
    assert code == 2
    assert "c1 > K0" in capsys.readouterr().err


def test_cli_family_eval_and_fit(tmp_path, capsys):
    samples = tmp_path / "samples.csv"
    code = main(["family", "eval", "--kind", "B", "--K0", "0", "--q", "0.0",
                 "--u", "0.1:5:0.1", "--out", str(samples)])
    assert code == 0
    text = samples.read_text()
    assert text.startswith("u,value,d1,d2")
    # keep only (u, value) columns for the fit
    rows = [line.split(",")[:2] for line in text.strip().split("\n")[1:]]
    fit_in = tmp_path / "fit.csv"
    fit_in.write_text("u,B\n" + "\n".join(",".join(r) for r in rows) + "\n")
    code = main(["family", "fit", str(fit_in), "--kind", "B"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "ok"
    assert abs(out["family"]["K0"]) <= 1e-9
    assert abs(out["family"]["q"]) <= 1e-9


def test_cli_family_oracle(capsys):
    code = main(["family", "oracle", "--K0", "1.0", "--u0", "0", "--s0", "0",
                 "--sp0", "1", "--u1", "0.5", "--step", "0.01"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "u,S,Sp"
    last = [float(x) for x in lines[-1].split(",")]
    assert last[1] == pytest.approx(math.sin(0.5), abs=1e-9)


def test_cli_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "pasurf.cli", "gallery", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "hemisphere-H3" in proc.stdout
