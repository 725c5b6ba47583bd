"""Mesh and field export formats."""

import numpy as np
import pytest

import lightcone.chart as ch
import lightcone.export as ex
import lightcone.surface as sf


@pytest.fixture()
def patch():
    grid = ch.ChartGrid(0, 1, 0, 1, 5, 6)
    X, Y = grid.meshgrid()
    pts = np.stack([X, Y, X * Y], axis=-1)
    return grid, pts


def test_obj_export(tmp_path, patch):
    grid, pts = patch
    path = tmp_path / "m.obj"
    ex.export_obj(path, pts, grid)
    lines = path.read_text().strip().splitlines()
    verts = [l for l in lines if l.startswith("v ")]
    faces = [l for l in lines if l.startswith("f ")]
    assert len(verts) == 30
    assert len(faces) == 4 * 5
    # OBJ indices are 1-based
    idx = [int(t) for f in faces for t in f.split()[1:]]
    assert min(idx) == 1 and max(idx) == 30


def test_ply_export(tmp_path, patch):
    grid, pts = patch
    path = tmp_path / "m.ply"
    ex.export_ply(path, pts, grid)
    text = path.read_text()
    assert text.startswith("ply\nformat ascii 1.0\n")
    assert "element vertex 30" in text
    assert f"element face {4 * 5}" in text
    body = text.split("end_header\n", 1)[1].strip().splitlines()
    assert len(body) == 30 + 20
    assert body[30].startswith("4 ")


def test_periodic_faces_wrap():
    grid = ch.ChartGrid(0, 1, 0, 1, 5, 5, periodic_x=True, periodic_y=True)
    faces = ex._grid_faces(grid)
    assert len(faces) == 25  # every cell, wrapping both axes
    flat = {v for f in faces for v in f}
    assert flat == set(range(25))


def test_csv_export(tmp_path, patch):
    grid, pts = patch
    path = tmp_path / "m.csv"
    ex.export_points("csv", path, pts, grid)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "i,j,x,y,px,py,pz"
    assert len(rows) == 31


def test_unknown_format(tmp_path, patch):
    grid, pts = patch
    with pytest.raises(ValueError):
        ex.export_points("stl", tmp_path / "m.stl", pts, grid)


def test_export_zoo_surface(tmp_path):
    s = sf.zoo("cylinder", nx=9, ny=9)
    pts = sf.euclidean_graph(s)
    path = tmp_path / "c.obj"
    ex.export_points("obj", path, pts, s.grid)
    assert path.exists() and path.stat().st_size > 0
