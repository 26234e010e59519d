"""CLI contract: exit codes, reports, mesh export, determinism, schemas."""

import json

import numpy as np
import pytest

from spinorforge import fixtures, lie_algebra as la
from spinorforge.cli import main
from spinorforge.meshexport import (export_mesh, grid_faces,
                                    read_obj_vertices, read_ply_vertices)
from spinorforge.lie_group import model_for
from spinorforge.serialization import (cmc_to_dict, dump_json, load_json,
                                       problem_to_dict)


def write_problem(tmp_path, fx, name="problem.json"):
    path = tmp_path / name
    dump_json(problem_to_dict(fx.data, fx.alg, base_point=fx.F[0, 0]), path)
    return path


# =============================================================================
# Mesh export
# =============================================================================

def test_two_by_two_grid_mesh(tmp_path):
    faces = grid_faces(2, 2)
    assert faces.shape == (2, 3)
    F = np.zeros((2, 2, 3))
    F[..., 0], F[..., 1] = np.meshgrid([0.0, 1.0], [0.0, 1.0], indexing="ij")
    model = model_for(la.rn(3))
    verts = export_mesh(F, model, "obj", tmp_path / "m.obj")
    assert verts.shape == (4, 3)
    text = (tmp_path / "m.obj").read_text().splitlines()
    assert sum(1 for ln in text if ln.startswith("v ")) == 4
    assert sum(1 for ln in text if ln.startswith("f ")) == 2


def test_face_indices_in_bounds():
    fx = fixtures.sphere_r3(9)
    faces = grid_faces(9, 9)
    assert faces.min() >= 0 and faces.max() < 81
    # every interior vertex is used
    assert len(np.unique(faces)) == 81


def test_obj_ply_identical_vertices(tmp_path):
    fx = fixtures.sphere_r3(9)
    model = model_for(fx.alg)
    export_mesh(fx.F, model, "obj", tmp_path / "s.obj")
    export_mesh(fx.F, model, "ply", tmp_path / "s.ply")
    vo = read_obj_vertices(tmp_path / "s.obj")
    vp = read_ply_vertices(tmp_path / "s.ply")
    assert np.max(np.abs(vo - vp)) <= 1e-12


def test_s3_stereographic_pole(tmp_path):
    fx = fixtures.s3_equator(9)
    model = fx.model
    v1 = export_mesh(fx.F, model, "obj", tmp_path / "a.obj")
    v2 = export_mesh(fx.F, model, "obj", tmp_path / "b.obj",
                     pole=(0.0, 1.0, 0.0, 0.0))
    assert np.all(np.isfinite(v1)) and np.all(np.isfinite(v2))
    assert np.max(np.abs(v1 - v2)) > 1e-3   # genuinely different charts
    with pytest.raises(ValueError):
        export_mesh(fx.F, model, "obj", tmp_path / "c.obj",
                    pole=(2.0, 0.0, 0.0, 0.0))


# =============================================================================
# CLI commands
# =============================================================================

def test_catalog_prints_sol3_constants(capsys):
    assert main(["catalog", "--group", "sol3"]) == 0
    out = capsys.readouterr().out
    assert "Gamma[1,1]^3 = -1" in out
    assert "Gamma[2,2]^3 = 1" in out


def test_catalog_unknown_group():
    assert main(["catalog", "--group", "nope"]) == 3


def test_schema_flag(capsys):
    assert main(["--schema", "problem"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert "frames" in payload["properties"]


def test_check_algebra_roundtrip(tmp_path):
    path = tmp_path / "alg.json"
    dump_json(la.algebra_to_dict(la.sol3()), path)
    out = tmp_path / "report.json"
    assert main(["check-algebra", str(path), "-o", str(out)]) == 0
    report = load_json(out)
    assert report["pass"] and report["jacobi"] <= 1e-12


def test_check_algebra_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["check-algebra", str(path)]) == 3
    path2 = tmp_path / "bad2.json"
    dump_json({"c": [[[0.0]]]}, path2)     # missing tag
    assert main(["check-algebra", str(path2)]) == 3


def test_check_gcr_sphere_fixture_passes(tmp_path):
    out = tmp_path / "gcr.json"
    assert main(["check-gcr", "--fixture", "sphere-r3", "--grid-n", "17",
                 "-o", str(out)]) == 0
    report = load_json(out)
    assert report["pass"]
    field = load_json(report["residuals"]["gauss"]["field_path"])
    assert len(field) == 17 * 17


def test_check_gcr_broken_fixture_fails(tmp_path):
    out = tmp_path / "gcr.json"
    assert main(["check-gcr", "--fixture", "sphere-r3-broken",
                 "--grid-n", "17", "-o", str(out)]) == 2
    assert not load_json(out)["pass"]


def test_check_frame_file_input(tmp_path):
    fx = fixtures.sol3_plane(17)
    path = write_problem(tmp_path, fx)
    out = tmp_path / "frame.json"
    assert main(["check-frame", str(path), "-o", str(out)]) == 0


def test_check_frame_hn_structure_field(tmp_path):
    out = tmp_path / "horo.json"
    assert main(["check-frame", "--fixture", "horosphere-h3", "--grid-n", "9",
                 "-o", str(out)]) == 0
    report = load_json(out)
    assert report["residuals"]["structure_field"]["max"] <= 1e-12


def test_solve_and_reports(tmp_path):
    out = tmp_path / "solve.json"
    assert main(["solve", "--fixture", "s3-sphere", "--grid-n", "17",
                 "-o", str(out)]) == 0
    report = load_json(out)
    assert report["integrable"]
    spinor = load_json(report["spinor_path"])
    assert len(spinor) == 17 * 17 * 8


def test_solve_broken_exits_two(tmp_path):
    out = tmp_path / "solve.json"
    assert main(["solve", "--fixture", "sphere-r3-broken", "--grid-n", "17",
                 "-o", str(out)]) == 2


def test_reconstruct_writes_mesh_and_report(tmp_path):
    out = tmp_path / "rec.json"
    assert main(["reconstruct", "--fixture", "sphere-r3", "--grid-n", "17",
                 "-o", str(out), "--format", "ply"]) == 0
    report = load_json(out)
    assert report["isometry_error"] <= 5 * (0.5 / 16) ** 2
    verts = read_ply_vertices(report["mesh_path"])
    assert verts.shape == (17 * 17, 3)
    # the surface JSON re-exports to identical coordinates
    out2 = tmp_path / "again.obj"
    assert main(["export", report["surface_path"], "-o", str(out2),
                 "--format", "obj"]) == 0
    vo = read_obj_vertices(out2)
    assert np.max(np.abs(vo - verts)) <= 1e-12


def test_reconstruct_not_integrable_exits_two(tmp_path):
    out = tmp_path / "rec.json"
    assert main(["reconstruct", "--fixture", "sphere-r3-broken",
                 "--grid-n", "17", "-o", str(out)]) == 2
    report = load_json(out)
    assert not report["integrable"]


def test_reconstruct_missing_input_is_input_error(tmp_path):
    assert main(["reconstruct"]) == 3
    assert main(["reconstruct", str(tmp_path / "absent.json")]) == 3


def test_empty_grid_rejected(tmp_path):
    fx = fixtures.sphere_r3(5)
    blob = problem_to_dict(fx.data, fx.alg)
    blob["grid"]["nx"] = 1
    path = tmp_path / "bad.json"
    dump_json(blob, path)
    assert main(["reconstruct", str(path)]) == 3


def test_cmc_fixture_and_file(tmp_path):
    out = tmp_path / "cmc.json"
    assert main(["cmc", "--fixture", "cmc-sphere", "--grid-n", "33",
                 "-o", str(out)]) == 0
    report = load_json(out)
    assert report["pde"]["max"] <= 1e-12
    assert "mesh_path" in report
    # same data through a file
    from spinorforge.cmc import HPotential, WeierstrassData
    from spinorforge.grid import ParamGrid
    n, half = 17, 0.75
    h = 2 * half / (n - 1)
    base = ParamGrid(n, n, h, x0=-half, y0=-half)
    X, Y = base.mesh()
    z = X + 1j * Y
    grid = ParamGrid(n, n, h, mu=2.0 / (1 + np.abs(z) ** 2), x0=-half, y0=-half)
    data = WeierstrassData(grid, z)
    path = tmp_path / "cmc-in.json"
    dump_json(cmc_to_dict(data, HPotential(1.0, (0, 0, 0))), path)
    out2 = tmp_path / "cmc2.json"
    assert main(["cmc", str(path), "-o", str(out2)]) == 0


def test_cmc_singular_potential_exits_four(tmp_path):
    from spinorforge.cmc import HPotential, WeierstrassData
    from spinorforge.grid import ParamGrid
    grid = ParamGrid(5, 5, 0.1)
    data = WeierstrassData(grid, np.zeros(grid.shape, dtype=complex))
    path = tmp_path / "sing.json"
    dump_json(cmc_to_dict(data, HPotential(0.0, (0.0, 0.0, 0.0))), path)
    assert main(["cmc", str(path), "-o", str(tmp_path / "r.json")]) == 4


def test_reports_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["check-gcr", "--fixture", "s3-sphere", "--grid-n", "9",
                 "-o", str(a)]) == 0
    assert main(["check-gcr", "--fixture", "s3-sphere", "--grid-n", "9",
                 "-o", str(b)]) == 0
    # identical up to the output paths baked into field_path entries
    ra = a.read_bytes().replace(str(tmp_path / "a").encode(), b"OUT")
    rb = b.read_bytes().replace(str(tmp_path / "b").encode(), b"OUT")
    assert ra == rb
