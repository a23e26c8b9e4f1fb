"""Discretization of the half-space surrogate: periodic tangential box x vertical interval.

Tangential directions use a Fourier basis on a periodic box of length L
(surrogate for the unbounded tangential plane; all non-decaying behaviour is
represented within one period). The vertical direction uses global
Legendre-Gauss collocation on (0, Z] with ghost endpoints at 0 and Z for
boundary closures; differentiation is barycentric on the global node set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_BOX = 2.0 * np.pi * 8.0
DEFAULT_ZMAX = 16.0


class GridError(ValueError):
    pass


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Weights w_j = 1/prod(z_j - z_k), normalized, computed in log space."""
    d = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(d, 1.0)
    logw = -np.sum(np.log(np.abs(d)), axis=1)
    sgn = np.prod(np.sign(d), axis=1)
    logw -= logw.max()
    return sgn * np.exp(logw)


def differentiation_matrix(nodes: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """First-derivative collocation matrix of the polynomial interpolant."""
    if weights is None:
        weights = barycentric_weights(nodes)
    n = len(nodes)
    dd = nodes[:, None] - nodes[None, :] + np.eye(n)
    D = (weights[None, :] / weights[:, None]) / dd
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def interpolation_row(nodes: np.ndarray, weights: np.ndarray, x: float) -> np.ndarray:
    """Row vector mapping node values to the interpolant value at x."""
    d = x - nodes
    hit = np.flatnonzero(d == 0.0)
    if hit.size:
        row = np.zeros_like(nodes)
        row[hit[0]] = 1.0
        return row
    c = weights / d
    return c / c.sum()


@dataclass(frozen=True)
class TangentialGrid:
    """Periodic Fourier box: modes xi = (2 pi / L) * k, k in {-N/2 .. N/2-1}^2.

    The Nyquist row k = -N/2 carries no smooth-field content and is zeroed on
    input, so the retained mode set is closed under xi -> -xi.
    """

    modes_per_axis: int
    box_length: float = DEFAULT_BOX

    def __post_init__(self):
        if self.modes_per_axis < 4 or self.modes_per_axis % 2:
            raise GridError(f"modes_per_axis must be even and >= 4, got {self.modes_per_axis}")
        if not self.box_length > 0:
            raise GridError("box_length must be positive")

    @property
    def n(self) -> int:
        return self.modes_per_axis

    @property
    def spacing(self) -> float:
        return self.box_length / self.modes_per_axis

    def wavenumbers(self) -> np.ndarray:
        """Integer mode numbers in FFT order, shape (n,)."""
        n = self.modes_per_axis
        return np.fft.fftfreq(n, d=1.0 / n)

    def xi(self) -> tuple[np.ndarray, np.ndarray]:
        """Mode vectors (xi1, xi2) on the (n, n) FFT-ordered grid."""
        k = self.wavenumbers() * (2.0 * np.pi / self.box_length)
        return np.meshgrid(k, k, indexing="ij")

    def xi_sq(self) -> np.ndarray:
        x1, x2 = self.xi()
        return x1**2 + x2**2

    def nyquist_mask(self) -> np.ndarray:
        """True on modes retained for smooth fields (Nyquist row excluded)."""
        k = self.wavenumbers()
        keep = k != -self.modes_per_axis // 2
        return keep[:, None] & keep[None, :]

    def points(self) -> np.ndarray:
        return np.arange(self.modes_per_axis) * self.spacing

    def key(self) -> tuple:
        return (self.modes_per_axis, self.box_length)


@dataclass(frozen=True)
class VerticalGrid:
    """Legendre-Gauss nodes on (0, Z] with positive quadrature weights.

    Nodes cluster quadratically at both ends; the wall z=0 and the truncation
    height Z are not nodes but are reachable through barycentric ghost rows.
    """

    nodes: np.ndarray
    weights: np.ndarray
    z_max: float

    def __post_init__(self):
        z = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if z.ndim != 1 or np.any(np.diff(z) <= 0):
            raise GridError("nodes must be strictly increasing")
        if z[0] <= 0 or z[-1] > self.z_max:
            raise GridError("nodes must lie in (0, z_max]")
        if np.any(w <= 0):
            raise GridError("weights must be positive")
        if abs(w.sum() - self.z_max) > 1e-10 * self.z_max:
            raise GridError("weights must sum to z_max")
        object.__setattr__(self, "nodes", z)
        object.__setattr__(self, "weights", w)

    @classmethod
    def gauss(cls, n: int = 112, z_max: float = DEFAULT_ZMAX) -> "VerticalGrid":
        x, w = np.polynomial.legendre.leggauss(n)
        return cls(nodes=z_max * (x + 1.0) / 2.0, weights=w * z_max / 2.0, z_max=z_max)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def scaled(self, factor: float) -> "VerticalGrid":
        """Grid for z -> z/factor (same node pattern on [0, z_max/factor])."""
        return VerticalGrid(self.nodes / factor, self.weights / factor, self.z_max / factor)

    def key(self) -> tuple:
        return (self.n, float(self.z_max), float(self.nodes[0]))

    def __eq__(self, other):
        return isinstance(other, VerticalGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


class VerticalOps:
    """Barycentric differentiation/evaluation machinery on a VerticalGrid.

    Ghost-augmented node set is (0, z_1..z_n, Z). Three closures are used:
      * free: interpolant through the interior nodes only (data fields),
      * dir:  ghost values pinned to 0 at both ends (wall-vanishing fields),
      * neu:  derivative pinned at 0, value pinned at Z (pressure Neumann).
    The Dirichlet and Neumann second-derivative operators are eigendecomposed
    once per grid; both spectra are real and negative (asserted).
    """

    def __init__(self, vert: VerticalGrid):
        self.vert = vert
        z, Z = vert.nodes, vert.z_max
        self.z, self.wq = z, vert.weights
        zg = np.concatenate(([0.0], z, [Z]))
        wg = barycentric_weights(zg)
        Dg = differentiation_matrix(zg, wg)
        D2g = Dg @ Dg
        self.w_free = barycentric_weights(z)
        self.D1_free = differentiation_matrix(z, self.w_free)
        self.D2_free = self.D1_free @ self.D1_free
        self.eval0_free = interpolation_row(z, self.w_free, 0.0)
        self.evalZ_free = interpolation_row(z, self.w_free, Z)

        # ghost-row pieces (index 0 = wall ghost, -1 = top ghost)
        self.D2_int = D2g[1:-1, 1:-1]
        self.D2_col0 = D2g[1:-1, 0]
        self.D2_colZ = D2g[1:-1, -1]
        self.D1_int = Dg[1:-1, 1:-1]
        self.D1_col0 = Dg[1:-1, 0]
        self.D1_colZ = Dg[1:-1, -1]
        self.d1_row0 = Dg[0, :]      # derivative at wall, ghost-full columns
        self.d1_rowZ = Dg[-1, :]

        # Dirichlet closure (both ghost values zero)
        self.D1_dir_row0 = Dg[0, 1:-1]
        mu, Q = np.linalg.eig(self.D2_int)
        if np.abs(mu.imag).max() > 1e-8 * np.abs(mu.real).max():
            raise GridError("Dirichlet vertical operator has non-real spectrum")
        order = np.argsort(-mu.real)
        self.mu = mu.real[order]
        self.Q = np.ascontiguousarray(Q[:, order].real)
        self.Qi = np.ascontiguousarray(np.linalg.inv(self.Q))
        if self.mu.max() >= 0:
            raise GridError("Dirichlet vertical operator must be negative definite")

        # transparent (Robin) closure at Z: v'(Z) + omega v(Z) = 0 eliminates
        # the top ghost value; rank-1 data for Sherman-Morrison in eigenspace
        self.robin_dZZ = self.d1_rowZ[-1]
        self.robin_row = -self.d1_rowZ[1:-1]            # vZ = robin_row @ v / (omega + dZZ)
        self.robin_row_eig = self.robin_row @ self.Q
        self.colZ_eig = self.Qi @ self.D2_colZ
        self.d1_dir_row0_eig = self.D1_dir_row0 @ self.Q
        self.d1_dir_rowZ_eig = Dg[-1, 1:-1] @ self.Q

        # Neumann-bottom / Dirichlet-top closure: wall ghost value
        # v0 = (b - d1_row0[1:-1] @ v) / d1_row0[0] for derivative datum b
        d00 = self.d1_row0[0]
        self.neu_M = self.D2_int - np.outer(self.D2_col0, self.d1_row0[1:-1]) / d00
        self.neu_inject = self.D2_col0 / d00
        self.neu_D1 = self.D1_int - np.outer(self.D1_col0, self.d1_row0[1:-1]) / d00
        self.neu_D1_inject = self.D1_col0 / d00
        mun, Qn = np.linalg.eig(self.neu_M)
        if np.abs(mun.imag).max() > 1e-8 * np.abs(mun.real).max():
            raise GridError("Neumann vertical operator has non-real spectrum")
        order = np.argsort(-mun.real)
        self.neu_mu = mun.real[order]
        self.neu_Q = np.ascontiguousarray(Qn[:, order].real)
        self.neu_Qi = np.ascontiguousarray(np.linalg.inv(self.neu_Q))
        if self.neu_mu.max() >= 0:
            raise GridError("Neumann vertical operator must be negative definite")

    def eval_at(self, x: float) -> np.ndarray:
        """Free-interpolant evaluation row at height x."""
        return interpolation_row(self.z, self.w_free, x)

    def resample_rows(self, targets: np.ndarray) -> np.ndarray:
        """Matrix mapping node values to interpolant values at targets."""
        return np.array([self.eval_at(float(x)) for x in targets])


@lru_cache(maxsize=8)
def _vertical_ops_cached(key: tuple, n: int, z_max: float) -> VerticalOps:
    return VerticalOps(VerticalGrid.gauss(n, z_max))


_ops_registry: dict[tuple, VerticalOps] = {}


def vertical_ops(vert: VerticalGrid) -> VerticalOps:
    key = vert.key()
    ops = _ops_registry.get(key)
    if ops is None:
        ops = VerticalOps(vert)
        _ops_registry[key] = ops
    return ops


class ModeOps:
    """Per-(tangential, vertical) flattened mode tables used by solvers."""

    def __init__(self, tan: TangentialGrid, vert: VerticalGrid):
        self.tan, self.vert = tan, vert
        self.v = vertical_ops(vert)
        x1, x2 = tan.xi()
        self.xi1 = x1.ravel()
        self.xi2 = x2.ravel()
        self.ksq = self.xi1**2 + self.xi2**2
        self.axi = np.sqrt(self.ksq)
        self.nonzero = self.ksq > 0
        # strip-harmonic pressure profiles per mode, (M, nz): decaying from
        # the wall and from the truncation height respectively
        self.E = np.exp(-np.outer(self.axi, vert.nodes))
        self.E_eig = self.E @ self.v.Qi.T
        self.E_plus = np.exp(np.outer(self.axi, vert.nodes - vert.z_max))
        self.E_plus_eig = self.E_plus @ self.v.Qi.T

    @property
    def n_modes(self) -> int:
        return len(self.ksq)


_mode_registry: dict[tuple, ModeOps] = {}


def mode_ops(tan: TangentialGrid, vert: VerticalGrid) -> ModeOps:
    key = (tan.key(), vert.key())
    ops = _mode_registry.get(key)
    if ops is None:
        ops = ModeOps(tan, vert)
        _mode_registry[key] = ops
    return ops


def default_grids(n_modes: int = 64, n_vertical: int = 112,
                  box_length: float = DEFAULT_BOX,
                  z_max: float = DEFAULT_ZMAX) -> tuple[TangentialGrid, VerticalGrid]:
    return TangentialGrid(n_modes, box_length), VerticalGrid.gauss(n_vertical, z_max)
