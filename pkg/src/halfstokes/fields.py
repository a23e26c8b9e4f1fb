"""Complex fields sampled on tangential Fourier modes x vertical collocation nodes.

Coefficient convention: u(x', z_j) = sum_k coeffs[:, k1, k2, j] e^{i xi_k . x'},
with FFT mode ordering in the tangential axes. Real physical fields carry
Hermitian symmetry coeffs(-k) = conj(coeffs(k)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import TangentialGrid, VerticalGrid, GridError, vertical_ops

VELOCITY = ("u1", "u2", "u3")
SCALAR = ("s",)
#: symmetric 3x3 tensor storage order
TENSOR_SYM = ("t11", "t12", "t13", "t22", "t23", "t33")
_SYM_INDEX = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (0, 2): 2, (2, 0): 2,
              (1, 1): 3, (1, 2): 4, (2, 1): 4, (2, 2): 5}


class FieldError(ValueError):
    pass


@dataclass
class Field3D:
    tan: TangentialGrid
    vert: VerticalGrid
    coeffs: np.ndarray           # (ncomp, n, n, nz) complex128
    roles: tuple[str, ...]

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        n, nz = self.tan.n, self.vert.n
        if c.shape != (len(self.roles), n, n, nz):
            raise FieldError(f"coeff shape {c.shape} != ({len(self.roles)}, {n}, {n}, {nz})")
        if not np.all(np.isfinite(c)):
            raise FieldError("non-finite coefficients")
        mask = self.tan.nyquist_mask()
        c = c * mask[None, :, :, None]
        self.coeffs = c

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, tan, vert, roles=VELOCITY) -> "Field3D":
        return cls(tan, vert, np.zeros((len(roles), tan.n, tan.n, vert.n), np.complex128), roles)

    @classmethod
    def from_physical(cls, tan, vert, values: np.ndarray, roles=VELOCITY) -> "Field3D":
        """values: (ncomp, n, n, nz) physical samples on the tensor grid."""
        v = np.asarray(values)
        coeffs = np.fft.fft2(v, axes=(1, 2)) / tan.n**2
        return cls(tan, vert, coeffs, roles)

    @classmethod
    def from_profile(cls, tan, vert, profiles, roles=VELOCITY) -> "Field3D":
        """Tangentially constant field from vertical profiles (ncomp, nz)."""
        c = np.zeros((len(roles), tan.n, tan.n, vert.n), np.complex128)
        c[:, 0, 0, :] = np.asarray(profiles, dtype=np.complex128)
        return cls(tan, vert, c, roles)

    # basics ---------------------------------------------------------------

    @property
    def ncomp(self) -> int:
        return len(self.roles)

    def copy(self) -> "Field3D":
        return Field3D(self.tan, self.vert, self.coeffs.copy(), self.roles)

    def component(self, i: int) -> np.ndarray:
        return self.coeffs[i]

    def __add__(self, other: "Field3D") -> "Field3D":
        self._check_same(other)
        return Field3D(self.tan, self.vert, self.coeffs + other.coeffs, self.roles)

    def __sub__(self, other: "Field3D") -> "Field3D":
        self._check_same(other)
        return Field3D(self.tan, self.vert, self.coeffs - other.coeffs, self.roles)

    def __mul__(self, a) -> "Field3D":
        return Field3D(self.tan, self.vert, self.coeffs * a, self.roles)

    __rmul__ = __mul__

    def _check_same(self, other):
        if self.tan.key() != other.tan.key() or self.vert.key() != other.vert.key():
            raise FieldError("fields live on different grids")
        if self.roles != other.roles:
            raise FieldError(f"role mismatch: {self.roles} vs {other.roles}")

    # transforms -----------------------------------------------------------

    def physical(self, oversample: int = 1, midpoint: bool = False) -> np.ndarray:
        """Physical samples, optionally on an oversampled (and half-shifted) grid."""
        n = self.tan.n
        if oversample == 1 and not midpoint:
            return np.fft.ifft2(self.coeffs, axes=(1, 2)) * n**2
        no = oversample * n
        return self.physical_on(no)

    def physical_on(self, no: int, shift: float = 0.0) -> np.ndarray:
        """Evaluate on a uniform no x no tangential grid offset by `shift`."""
        n = self.tan.n
        half = n // 2
        pad = np.zeros(self.coeffs.shape[:1] + (no, no, self.vert.n), np.complex128)
        sl = np.r_[0:half, no - half:no]
        src = np.r_[0:half, n - half:n]
        pad[:, sl[:, None], sl[None, :], :] = self.coeffs[:, src[:, None], src[None, :], :]
        if shift:
            k = np.fft.fftfreq(no, d=1.0 / no) * (2 * np.pi / self.tan.box_length)
            tw = np.exp(1j * k * shift)
            pad *= tw[None, :, None, None] * tw[None, None, :, None]
        return np.fft.ifft2(pad, axes=(1, 2)) * no**2

    def eval_points(self, pts: np.ndarray, components=None) -> np.ndarray:
        """Direct evaluation at arbitrary points (npts, 3) by Fourier sum +
        vertical barycentric interpolation. O(n_modes * npts)."""
        from .grids import mode_ops
        ops = mode_ops(self.tan, self.vert)
        comps = range(self.ncomp) if components is None else components
        pts = np.atleast_2d(pts)
        vops = ops.v
        rows = vops.resample_rows(pts[:, 2])                       # (npts, nz)
        phase = np.exp(1j * (np.outer(pts[:, 0], ops.xi1) + np.outer(pts[:, 1], ops.xi2)))
        out = np.empty((len(list(comps)), len(pts)), np.complex128)
        for i, ci in enumerate(comps):
            flat = self.coeffs[ci].reshape(ops.n_modes, self.vert.n)    # (M, nz)
            prof = rows @ flat.T                                        # (npts, M)
            out[i] = np.sum(phase * prof, axis=1)
        return out

    # symmetry & reality ---------------------------------------------------

    def hermitian_symmetrize(self) -> "Field3D":
        c = self.coeffs
        cf = np.conj(c[:, ::-1, ::-1, :])
        cf = np.roll(cf, 1, axis=1)
        cf = np.roll(cf, 1, axis=2)
        return Field3D(self.tan, self.vert, 0.5 * (c + cf), self.roles)

    def hermitian_defect(self) -> float:
        c = self.coeffs
        cf = np.conj(np.roll(np.roll(c[:, ::-1, ::-1, :], 1, axis=1), 1, axis=2))
        scale = np.abs(c).max() or 1.0
        return float(np.abs(c - cf).max() / scale)

    def max_abs(self) -> float:
        """Sup over the collocation tensor grid of the physical magnitude."""
        p = self.physical()
        return float(np.abs(p).max())

    # calculus -------------------------------------------------------------

    def dx(self, axis: int) -> "Field3D":
        """Tangential derivative along axis 0 or 1 (spectral)."""
        x1, x2 = self.tan.xi()
        m = (x1 if axis == 0 else x2)[None, :, :, None]
        return Field3D(self.tan, self.vert, 1j * m * self.coeffs, self.roles)

    def dz(self) -> "Field3D":
        D1 = vertical_ops(self.vert).D1_free
        return Field3D(self.tan, self.vert, self.coeffs @ D1.T, self.roles)

    def dzz(self) -> "Field3D":
        D2 = vertical_ops(self.vert).D2_free
        return Field3D(self.tan, self.vert, self.coeffs @ D2.T, self.roles)

    def laplacian(self) -> "Field3D":
        ks = self.tan.xi_sq()[None, :, :, None]
        D2 = vertical_ops(self.vert).D2_free
        return Field3D(self.tan, self.vert, -ks * self.coeffs + self.coeffs @ D2.T, self.roles)

    def gradient(self) -> "Field3D":
        """Gradient of each component; roles expand componentwise."""
        parts = [self.dx(0).coeffs, self.dx(1).coeffs, self.dz().coeffs]
        c = np.concatenate(parts, axis=0)
        roles = tuple(f"d{ax}_{r}" for ax in (1, 2, 3) for r in self.roles)
        return Field3D(self.tan, self.vert, c, roles)

    def wall_values(self) -> np.ndarray:
        """Extrapolated boundary values at z=0, shape (ncomp, n, n)."""
        row = vertical_ops(self.vert).eval0_free
        return self.coeffs @ row

    def wall_gradient(self) -> np.ndarray:
        """Extrapolated d/dz at z=0 (free interpolant), shape (ncomp, n, n)."""
        v = vertical_ops(self.vert)
        return (self.coeffs @ v.D1_free.T) @ v.eval0_free


def velocity_divergence(u: Field3D) -> np.ndarray:
    """Spectral divergence i xi . u' + d3 u3, shape (n, n, nz)."""
    if u.ncomp != 3:
        raise FieldError("divergence needs a 3-component velocity field")
    x1, x2 = u.tan.xi()
    D1 = vertical_ops(u.vert).D1_free
    return (1j * x1[:, :, None] * u.coeffs[0]
            + 1j * x2[:, :, None] * u.coeffs[1]
            + u.coeffs[2] @ D1.T)


def tensor_divergence(F: Field3D) -> Field3D:
    """Row divergence (div F)_i = d_j F_ij of a symmetric tensor field."""
    if F.roles != TENSOR_SYM:
        raise FieldError("tensor_divergence expects symmetric tensor roles")
    x1, x2 = F.tan.xi()
    D1 = vertical_ops(F.vert).D1_free
    out = np.empty((3, F.tan.n, F.tan.n, F.vert.n), np.complex128)
    for i in range(3):
        c = (1j * x1[:, :, None] * F.coeffs[_SYM_INDEX[i, 0]]
             + 1j * x2[:, :, None] * F.coeffs[_SYM_INDEX[i, 1]]
             + F.coeffs[_SYM_INDEX[i, 2]] @ D1.T)
        out[i] = c
    return Field3D(F.tan, F.vert, out, VELOCITY)


def symmetric_product(u: Field3D, v: Field3D) -> Field3D:
    """Physical-space symmetric tensor (u ox v + v ox u)/2 as a 6-component field."""
    u._check_same(v)
    up, vp = u.physical(), v.physical()
    n, nz = u.tan.n, u.vert.n
    out = np.empty((6, n, n, nz), np.complex128)
    for k, (i, j) in enumerate([(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]):
        out[k] = 0.5 * (up[i] * vp[j] + up[j] * vp[i])
    return Field3D.from_physical(u.tan, u.vert, out, TENSOR_SYM)


def convective_term(u: Field3D, v: Field3D) -> Field3D:
    """(u . grad) v in physical space, spectral derivatives."""
    u._check_same(v)
    up = u.physical()
    d1 = v.dx(0).physical()
    d2 = v.dx(1).physical()
    d3 = v.dz().physical()
    conv = up[0][None] * d1 + up[1][None] * d2 + up[2][None] * d3
    return Field3D.from_physical(u.tan, u.vert, conv, v.roles)


def scale_field(u: Field3D, lam: float) -> Field3D:
    """Navier-Stokes rescaling u_lam(y) = lam * u(lam y) on the scaled grids.

    Mode indices are preserved (box L/lam), vertical nodes map to z/lam, so
    the rescaling is exact: coefficients are lam * original coefficients.
    """
    if not lam > 0:
        raise FieldError("scale factor must be positive")
    tan2 = TangentialGrid(u.tan.modes_per_axis, u.tan.box_length / lam)
    vert2 = u.vert.scaled(lam)
    return Field3D(tan2, vert2, lam * u.coeffs, u.roles)


def resample_to(u: Field3D, tan2: TangentialGrid, vert2: VerticalGrid) -> Field3D:
    """Resample onto commensurate grids (same box length and z_max).

    Modes must coincide; vertical values are interpolated barycentrically.
    """
    if abs(tan2.box_length - u.tan.box_length) > 1e-12 * u.tan.box_length:
        raise FieldError(
            f"incommensurate tangential boxes: {u.tan.box_length} vs {tan2.box_length}")
    if abs(vert2.z_max - u.vert.z_max) > 1e-12 * u.vert.z_max:
        raise FieldError(f"incommensurate z_max: {u.vert.z_max} vs {vert2.z_max}")
    if tan2.n != u.tan.n:
        raise FieldError("mode-count change not supported in resample_to")
    rows = vertical_ops(u.vert).resample_rows(vert2.nodes)
    return Field3D(tan2, vert2, u.coeffs @ rows.T, u.roles)
