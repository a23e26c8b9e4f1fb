"""Flat binary container for fields plus a human-readable sidecar.

Layout (little-endian):
  magic   8 bytes  b"HSFIELD1"
  int64   ncomp, n_tangential, n_vertical
  float64 box_length, z_max
  float64 nodes[n_vertical], weights[n_vertical]
  complex pairs (float64 re, im) interleaved, C order (ncomp, n, n, nz)
Sidecar <path>.meta holds grid metadata and component roles as text.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fields import Field3D
from .grids import TangentialGrid, VerticalGrid

MAGIC = b"HSFIELD1"


def write_field(path, f: Field3D) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        np.array([f.ncomp, f.tan.n, f.vert.n], dtype="<i8").tofile(fh)
        np.array([f.tan.box_length, f.vert.z_max], dtype="<f8").tofile(fh)
        f.vert.nodes.astype("<f8").tofile(fh)
        f.vert.weights.astype("<f8").tofile(fh)
        f.coeffs.astype("<c16").tofile(fh)
    meta = [
        "halfstokes field container v1",
        f"components: {' '.join(f.roles)}",
        f"tangential: {f.tan.n} modes, box_length {f.tan.box_length!r}",
        f"vertical: {f.vert.n} nodes, z_max {f.vert.z_max!r}",
        "layout: header(int64 x3, float64 x2), nodes, weights, complex128 coeffs (C order)",
    ]
    Path(str(path) + ".meta").write_text("\n".join(meta) + "\n")


def read_field(path, roles=None) -> Field3D:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise IOError(f"not a halfstokes field container: {path}")
        ncomp, n, nz = np.fromfile(fh, dtype="<i8", count=3)
        box_length, z_max = np.fromfile(fh, dtype="<f8", count=2)
        nodes = np.fromfile(fh, dtype="<f8", count=int(nz))
        weights = np.fromfile(fh, dtype="<f8", count=int(nz))
        coeffs = np.fromfile(fh, dtype="<c16", count=int(ncomp * n * n * nz))
    tan = TangentialGrid(int(n), float(box_length))
    vert = VerticalGrid(nodes, weights, float(z_max))
    coeffs = coeffs.reshape(int(ncomp), int(n), int(n), int(nz))
    if roles is None:
        meta = Path(str(path) + ".meta")
        if meta.exists():
            for line in meta.read_text().splitlines():
                if line.startswith("components:"):
                    roles = tuple(line.split(":", 1)[1].split())
    if roles is None:
        roles = tuple(f"c{i}" for i in range(int(ncomp)))
    return Field3D(tan, vert, coeffs, tuple(roles))


def write_norm_csv(path, rows) -> None:
    """CSV of per-cell norms: cell_eta_x,cell_eta_y,cell_eta_z,q,rho,norm."""
    with open(path, "w", newline="\n") as fh:
        fh.write("cell_eta_x,cell_eta_y,cell_eta_z,q,rho,norm\n")
        for r in rows:
            fh.write(",".join(format(v, ".17g") if isinstance(v, float) else str(v)
                              for v in r) + "\n")
