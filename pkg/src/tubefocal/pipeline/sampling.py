"""Uniform-grid sampling of a tube or focal sheet into a quad mesh."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..theorems import Grid, TubeSpec, _map_chunks

# class name stored per grid node; "" marks a regular node
REGULAR = ""


class EmptyMesh(ValueError):
    pass


@dataclass
class GridMesh:
    vertices: np.ndarray  # (n_vertices, 3), regular nodes in row-major (u, v) order
    quads: np.ndarray  # (n_quads, 4) zero-based vertex indices
    mask: np.ndarray  # (n_u, n_v) True where the node is regular
    classes: np.ndarray  # (n_u, n_v) singularity class name per node
    fields: dict = field(default_factory=dict)  # name -> (n_vertices,)
    u: np.ndarray | None = None  # (n_u, n_v) parameter grids
    v: np.ndarray | None = None

    @property
    def masked_counts(self) -> dict:
        names, counts = np.unique(self.classes[~self.mask], return_counts=True)
        return {str(k): int(c) for k, c in zip(names, counts)}


def grid_mesh(positions: np.ndarray, regular: np.ndarray, classes=None, fields=None, u=None, v=None) -> GridMesh:
    """Quad mesh over a grid of positions, dropping every cell that touches a masked node.

    Vertex ``(i, j)`` is numbered row-major among the regular nodes.  A cell is
    wound ``(i, j), (i, j+1), (i+1, j+1), (i+1, j)``, so a single 2x2 cell
    reads ``1 2 4 3`` in one-based indices.
    """
    regular = np.asarray(regular, dtype=bool)
    n_u, n_v = regular.shape
    index = np.full(regular.shape, -1, dtype=np.int64)
    index[regular] = np.arange(int(regular.sum()))
    a, b = index[:-1, :-1], index[:-1, 1:]
    c, d = index[1:, 1:], index[1:, :-1]
    cells = np.stack([a, b, c, d], axis=-1).reshape(-1, 4)
    quads = cells[np.all(cells >= 0, axis=1)]
    if classes is None:
        classes = np.where(regular, REGULAR, "singular")
    return GridMesh(np.asarray(positions)[regular], quads, regular, np.asarray(classes, dtype=object),
                    {k: np.asarray(val) for k, val in (fields or {}).items()}, u, v)


def _fields_for(spec: TubeSpec, which: str):
    def fn(u, v):
        cf = spec.closed(which, u, v)
        out = {"X": spec.surface(which).position(u, v), "W": cf.W}
        if which == "tube":
            out.update(K=cf.curv.K, H=cf.curv.H, kappa1=cf.curv.kappa1, kappa2=cf.curv.kappa2)
        else:
            X_uu, X_vv, N = cf.jet.X_uu, cf.jet.X_vv, cf.forms.N
            out.update(K_star=cf.curv.K, H_star=cf.curv.H,
                       u_geodesic_residual=np.linalg.norm(np.cross(X_uu, N), axis=-1),
                       v_geodesic_residual=np.linalg.norm(np.cross(X_vv, N), axis=-1))
        return out

    return fn


def sample_surface(spec: TubeSpec, grid: Grid, which: str, workers: int = 1) -> GridMesh:
    """Evaluate a sheet on ``grid``; masked nodes keep their singularity class."""
    if which not in ("tube", "focal"):
        raise ValueError(f"which must be tube or focal, not {which!r}")
    U, V = grid.nodes()
    masks = spec.masks(which, U, V)
    classes = np.full(U.shape, REGULAR, dtype=object)
    for name, m in masks.items():
        m = np.broadcast_to(m, U.shape)
        classes[m & (classes == REGULAR)] = name
    regular = classes == REGULAR
    if not np.any(regular):
        raise EmptyMesh(f"every node of the {which} grid is masked ({', '.join(sorted(set(classes.ravel())))})")
    with np.errstate(all="ignore"):
        vals = _map_chunks(_fields_for(spec, which), U[regular], V[regular], workers)
    positions = np.zeros(U.shape + (3,))
    positions[regular] = vals.pop("X")
    mesh = grid_mesh(positions, regular, classes, None, U, V)
    mesh.fields = {"u": U[regular], "v": V[regular], **vals}
    return mesh
