"""Geometry export: OBJ and PLY meshes from structured grids, CSV fields.

Meshes use the grid connectivity (quads), closing up across periodic axes;
CSV goes through chart.export_field_csv so external plotters can consume
any field.
"""

import numpy as np

from . import chart as ch


def _grid_faces(grid):
    """Quad faces (4 vertex indices each) of the structured grid, with
    vertex index p = i * ny + j and wrap-around on periodic axes."""
    nx, ny = grid.nx, grid.ny
    imax = nx if grid.periodic_x else nx - 1
    jmax = ny if grid.periodic_y else ny - 1
    faces = []
    for i in range(imax):
        i1 = (i + 1) % nx
        for j in range(jmax):
            j1 = (j + 1) % ny
            faces.append((i * ny + j, i1 * ny + j, i1 * ny + j1, i * ny + j1))
    return faces


def export_obj(path, points, grid):
    """Write an OBJ mesh of a (nx, ny, 3) point field."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    with open(path, "w") as fh:
        for p in pts:
            fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
        for f in _grid_faces(grid):
            fh.write("f " + " ".join(str(v + 1) for v in f) + "\n")


def export_ply(path, points, grid):
    """Write an ASCII PLY mesh of a (nx, ny, 3) point field."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    faces = _grid_faces(grid)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(pts)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        fh.write(f"element face {len(faces)}\n")
        fh.write("property list uchar int vertex_indices\nend_header\n")
        for p in pts:
            fh.write(f"{p[0]!r} {p[1]!r} {p[2]!r}\n")
        for f in faces:
            fh.write("4 " + " ".join(str(v) for v in f) + "\n")


def export_csv(path, field, grid, header_components=None):
    ch.export_field_csv(path, field, grid, header_components)


def export_points(fmt, path, points, grid):
    if fmt == "obj":
        export_obj(path, points, grid)
    elif fmt == "ply":
        export_ply(path, points, grid)
    elif fmt == "csv":
        export_csv(path, points, grid, ["px", "py", "pz"][: np.shape(points)[-1]])
    else:
        raise ValueError(f"unknown export format {fmt!r}")
