"""Mesh and table writers.

Floats are written with Python's shortest round-trip representation, so a
reader that parses them back as binary64 recovers every value exactly.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import numpy as np

from .sampling import GridMesh

log = logging.getLogger(__name__)


class IoError(OSError):
    pass


def fmt(x) -> str:
    return repr(float(x))


def _write(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc


def obj_text(mesh: GridMesh) -> str:
    lines = [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in mesh.vertices]
    lines += ["f " + " ".join(str(int(i) + 1) for i in q) for q in mesh.quads]
    return "\n".join(lines) + "\n"


def ply_text(mesh: GridMesh) -> str:
    names = list(mesh.fields)
    head = ["ply", "format ascii 1.0", f"element vertex {len(mesh.vertices)}",
            "property double x", "property double y", "property double z"]
    head += [f"property double {n}" for n in names]
    head += [f"element face {len(mesh.quads)}", "property list uchar int vertex_indices", "end_header"]
    cols = [mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.vertices[:, 2]] + [mesh.fields[n] for n in names]
    rows = [" ".join(fmt(c[i]) for c in cols) for i in range(len(mesh.vertices))]
    faces = ["4 " + " ".join(str(int(i)) for i in q) for q in mesh.quads]
    return "\n".join(head + rows + faces) + "\n"


def export_mesh(mesh: GridMesh, path, format: str = "ply") -> Path:
    """Write ``mesh`` as OBJ or ASCII PLY; OBJ drops the scalar fields."""
    if len(mesh.vertices) == 0:
        raise ValueError("refusing to export an empty mesh")
    format = format.lower()
    if format == "obj":
        if mesh.fields:
            log.warning("OBJ cannot carry per-vertex fields; dropped %s", ", ".join(mesh.fields))
        _write(path, obj_text(mesh))
    elif format == "ply":
        _write(path, ply_text(mesh))
    else:
        raise ValueError(f"unknown mesh format {format!r}")
    return Path(path)


def read_ply(path):
    """(vertices, fields, faces) from an ASCII PLY written by :func:`export_mesh`."""
    lines = Path(path).read_text().splitlines()
    if lines[:2] != ["ply", "format ascii 1.0"]:
        raise ValueError("not an ascii 1.0 PLY file")
    props, counts, element = {}, {}, None
    i = 2
    while lines[i] != "end_header":
        parts = lines[i].split()
        if parts[0] == "element":
            element = parts[1]
            counts[element] = int(parts[2])
            props[element] = []
        elif parts[0] == "property":
            props[element].append(parts[-1])
        i += 1
    i += 1
    nv, nf = counts.get("vertex", 0), counts.get("face", 0)
    table = np.array([[float(t) for t in ln.split()] for ln in lines[i:i + nv]]).reshape(nv, len(props["vertex"]))
    faces = np.array([[int(t) for t in ln.split()[1:]] for ln in lines[i + nv:i + nv + nf]], dtype=np.int64)
    names = props["vertex"]
    verts = table[:, :3]
    fields = {n: table[:, k] for k, n in enumerate(names) if k >= 3}
    return verts, fields, faces


def write_fields_csv(meshes: dict, path) -> Path:
    """One row per regular node of every sheet: sheet, u, v, x, y, z and the scalar fields."""
    names = []
    for m in meshes.values():
        names += [n for n in m.fields if n not in ("u", "v") and n not in names]
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["sheet", "u", "v", "x", "y", "z"] + names)
            for sheet, m in meshes.items():
                for i in range(len(m.vertices)):
                    extra = [fmt(m.fields[n][i]) if n in m.fields else "" for n in names]
                    w.writerow([sheet, fmt(m.fields["u"][i]), fmt(m.fields["v"][i])]
                               + [fmt(x) for x in m.vertices[i]] + extra)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc
    return Path(path)


def write_table_csv(header, rows, path) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc
    return Path(path)
