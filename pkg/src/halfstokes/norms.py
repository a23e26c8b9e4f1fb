"""Locally uniform Lebesgue norms and divergence diagnostics.

The uloc norm is the sup over cells eta + (0, rho)^3 of local L^q norms.
Cells tile the periodic tangential box (wrapping at the edge) and the
vertical interval [0, Z]. Tangential cell integrals use a midpoint lattice
aligned with the cells; vertical cell integrals resample the collocation
interpolant onto per-cell Gauss nodes, which is exact for resolved fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .fields import Field3D, velocity_divergence
from .grids import TangentialGrid, VerticalGrid, vertical_ops


class NormError(ValueError):
    pass


@dataclass(frozen=True)
class UlocSpec:
    q: float
    rho: float = 1.0

    def __post_init__(self):
        if not self.q >= 1:
            raise NormError(f"exponent q must be >= 1, got {self.q}")
        if not self.rho > 0:
            raise NormError(f"cell size rho must be positive, got {self.rho}")

    @property
    def is_sup(self) -> bool:
        return math.isinf(self.q)


class _CellRule:
    """Cached cell partition + quadrature for one (grids, rho, oversample)."""

    def __init__(self, tan: TangentialGrid, vert: VerticalGrid, rho: float, oversample: int):
        self.nc_t = max(1, round(tan.box_length / rho))
        per_cell = max(2, math.ceil(oversample * tan.n / self.nc_t))
        self.n_samp = self.nc_t * per_cell
        self.per_cell = per_cell
        self.dx = tan.box_length / self.n_samp
        self.shift = 0.5 * self.dx            # midpoint lattice
        # vertical: cells [k rho, min((k+1) rho, Z)), resampled to Gauss nodes
        z_edges = list(np.arange(0.0, vert.z_max, rho)) + [vert.z_max]
        if len(z_edges) < 2:
            z_edges = [0.0, vert.z_max]
        self.z_edges = np.asarray(z_edges)
        self.nc_z = len(z_edges) - 1
        gx, gw = np.polynomial.legendre.leggauss(8)
        vops = vertical_ops(vert)
        rows, wz, owners = [], [], []
        for k in range(self.nc_z):
            a, b = z_edges[k], z_edges[k + 1]
            zk = a + (gx + 1.0) * (b - a) / 2.0
            rows.append(vops.resample_rows(zk))
            wz.append(gw * (b - a) / 2.0)
            owners.append(np.full(len(zk), k))
        self.resample = np.vstack(rows)                  # (nc_z*8, nz)
        self.wz = np.concatenate(wz)
        self.z_owner = np.concatenate(owners)

    def cell_reduce(self, vals_q: np.ndarray, power: float | None) -> np.ndarray:
        """Aggregate |f|^q (or max |f|) samples into per-cell values.

        vals_q: (n_samp, n_samp, nzs) array of |f|^q or |f| samples.
        Returns (nc_t, nc_t, nc_z).
        """
        m, p = self.n_samp, self.per_cell
        v = vals_q.reshape(self.nc_t, p, self.nc_t, p, len(self.wz))
        if power is None:            # sup norm
            out = np.zeros((self.nc_t, self.nc_t, self.nc_z))
            for k in range(self.nc_z):
                sel = self.z_owner == k
                out[:, :, k] = v[:, :, :, :, sel].max(axis=(1, 3, 4))
            return out
        v = v * self.wz[None, None, None, None, :]
        s = v.sum(axis=(1, 3)) * self.dx**2              # (nc_t, nc_t, nzs) partial
        out = np.zeros((self.nc_t, self.nc_t, self.nc_z))
        for k in range(self.nc_z):
            out[:, :, k] = s[:, :, self.z_owner == k].sum(axis=2)
        return out


_rule_cache: dict[tuple, _CellRule] = {}


def cell_rule(tan: TangentialGrid, vert: VerticalGrid, rho: float, oversample: int) -> _CellRule:
    key = (tan.key(), vert.key(), float(rho), oversample)
    r = _rule_cache.get(key)
    if r is None:
        r = _CellRule(tan, vert, rho, oversample)
        _rule_cache[key] = r
    return r


def uloc_cell_values(f: Field3D, spec: UlocSpec, oversample: int = 2) -> np.ndarray:
    """Per-cell L^q norms of the euclidean magnitude over components."""
    rule = cell_rule(f.tan, f.vert, spec.rho, oversample)
    samp = f.physical_on(rule.n_samp, shift=rule.shift)          # (ncomp, m, m, nz)
    prof = np.einsum("czk,sk->czs", samp.reshape(f.ncomp, -1, f.vert.n),
                     rule.resample).reshape(f.ncomp, rule.n_samp, rule.n_samp, -1)
    mag = np.sqrt(np.sum(np.abs(prof) ** 2, axis=0))
    if spec.is_sup:
        return rule.cell_reduce(mag, None)
    cells = rule.cell_reduce(mag**spec.q, spec.q)
    return cells ** (1.0 / spec.q)


def uloc_norm(f, spec: UlocSpec, oversample: int = 2, support=None) -> float:
    """sup over cells eta + (0, rho)^3 of the L^q cell norm.

    Accepts a Field3D (grid quadrature) or a 1-D callable sampled field
    (adaptive quadrature over cells of `support`, for closed-form examples).
    """
    if callable(f):
        return uloc_norm_1d(f, spec, support)
    cells = uloc_cell_values(f, spec, oversample)
    if cells.size == 0:
        raise NormError("empty cell set")
    return float(cells.max())


def uloc_norm_1d(fn, spec: UlocSpec, support, breakpoints=None) -> float:
    """1-D locally uniform norm of a callable over [lo, hi] by adaptive quadrature."""
    if support is None:
        raise NormError("callable fields need an explicit support interval")
    lo, hi = support
    if not hi > lo:
        raise NormError("empty cell set")
    edges = np.arange(lo, hi, spec.rho)
    if len(edges) == 0:
        raise NormError("empty cell set")
    best = 0.0
    for a in edges:
        b = min(a + spec.rho, hi)
        if spec.is_sup:
            xs = np.linspace(a, b, 2001)
            val = float(np.max(np.abs([fn(x) for x in xs])))
        else:
            pts = None
            if breakpoints is not None:
                pts = sorted({p for p in breakpoints if a < p < b})
                pts = pts or None
            integ = quad(lambda x: abs(fn(x)) ** spec.q, a, b,
                         points=pts, limit=200)[0]
            val = integ ** (1.0 / spec.q)
        best = max(best, val)
    return best


def weak_divergence_residual(f: Field3D) -> float:
    """max |i xi . f' + d3 f3| over modes/nodes plus the extrapolated |f3(.,0)|.

    Zero means divergence-free with vanishing normal trace in the weak sense.
    """
    if f.ncomp != 3:
        raise NormError("weak divergence needs 3 velocity components")
    div = velocity_divergence(f)
    trace3 = f.wall_values()[2]
    return float(np.abs(div).max() + np.abs(trace3).max())


# ball quadrature ------------------------------------------------------------

class BallRule:
    """Product Gauss rule on the unit ball, scalable to any radius/center.

    When the scaled ball is clipped by the wall z=0, clipped points get zero
    weight (conservative for sup-type functionals).
    """

    def __init__(self, n_r: int = 12, n_mu: int = 8, n_phi: int = 12):
        # radial: integrate r^2 dr exactly via Gauss on u = r^3
        gu, wu = np.polynomial.legendre.leggauss(n_r)
        u = (gu + 1.0) / 2.0
        self.r = u ** (1.0 / 3.0)
        wr = wu / 2.0 / 3.0
        gm, wm = np.polynomial.legendre.leggauss(n_mu)
        phi = (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
        wphi = 2 * np.pi / n_phi
        R, MU, PH = np.meshgrid(self.r, gm, phi, indexing="ij")
        WR, WM, _ = np.meshgrid(wr, wm, phi, indexing="ij")
        st = np.sqrt(1 - MU**2)
        self.points = np.stack([(R * st * np.cos(PH)).ravel(),
                                (R * st * np.sin(PH)).ravel(),
                                (R * MU).ravel()], axis=1)
        self.weights = (WR * WM * wphi).ravel()

    def scaled(self, center, radius):
        pts = center[None, :] + radius * self.points
        w = self.weights * radius**3
        w = np.where(pts[:, 2] > 0, w, 0.0)
        return pts, w


_ball_rule: BallRule | None = None


def ball_rule() -> BallRule:
    global _ball_rule
    if _ball_rule is None:
        _ball_rule = BallRule()
    return _ball_rule


def ball_lq_norm(f: Field3D, center: np.ndarray, radius: float, q: float) -> float:
    """L^q norm of |f| over B(center, radius) intersected with the half-space."""
    pts, w = ball_rule().scaled(np.asarray(center, float), radius)
    vals = f.eval_points(pts)
    mag = np.sqrt(np.sum(np.abs(vals) ** 2, axis=0))
    if math.isinf(q):
        return float(np.max(mag[w > 0])) if np.any(w > 0) else 0.0
    return float(np.sum(w * mag**q) ** (1.0 / q))
