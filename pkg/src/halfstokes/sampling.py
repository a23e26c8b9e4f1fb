"""Seeded construction of test fields. All randomness flows from one 64-bit
seed through a counter-based Philox generator for reproducibility."""

from __future__ import annotations

import numpy as np

from .fields import Field3D, VELOCITY
from .grids import TangentialGrid, VerticalGrid, vertical_ops


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def bump_profile(z: np.ndarray, center: float, width: float) -> np.ndarray:
    """Smooth profile vanishing to all orders at the wall, negligible at Z."""
    return (z / width) ** 2 * np.exp(-(((z - center) / width) ** 2))


def divergence_free_field(tan: TangentialGrid, vert: VerticalGrid, seed: int,
                          n_active: int = 12, max_wave: int = 6,
                          amplitude: float = 1.0, real: bool = True) -> Field3D:
    """Random band-limited divergence-free field with vanishing normal trace.

    Built from a horizontal vector potential A = (A1, A2, 0) with profiles
    psi(0) = psi'(0) = 0, so f = curl A satisfies both conditions exactly.
    """
    g = rng(seed)
    z = vert.nodes
    D1 = vertical_ops(vert).D1_free
    coeffs = np.zeros((3, tan.n, tan.n, vert.n), np.complex128)
    kmax = min(max_wave, tan.n // 2 - 1)
    xi_unit = 2 * np.pi / tan.box_length
    for _ in range(n_active):
        k1 = int(g.integers(-kmax, kmax + 1))
        k2 = int(g.integers(-kmax, kmax + 1))
        center = float(g.uniform(1.0, 5.0))
        width = float(g.uniform(0.8, 1.8))
        psi = bump_profile(z, center, width)
        # derivative by the module's rule, so curl identities hold exactly
        dpsi = D1 @ psi
        a1 = complex(g.normal(), g.normal())
        a2 = complex(g.normal(), g.normal())
        # curl(A1, A2, 0) = (-d3 A2, d3 A1, d1 A2 - d2 A1)
        xi1 = xi_unit * k1
        xi2 = xi_unit * k2
        coeffs[0, k1, k2, :] += -a2 * dpsi
        coeffs[1, k1, k2, :] += a1 * dpsi
        coeffs[2, k1, k2, :] += (1j * xi1 * a2 - 1j * xi2 * a1) * psi
    f = Field3D(tan, vert, coeffs, VELOCITY)
    if real:
        f = f.hermitian_symmetrize()
    scale = f.max_abs()
    if scale > 0:
        f = f * (amplitude / scale)
    return f


def single_mode_field(tan: TangentialGrid, vert: VerticalGrid, k: tuple[int, int],
                      center: float = 2.5, width: float = 1.2,
                      amplitude: float = 1.0, real: bool = True) -> Field3D:
    """Divergence-free single-mode field at mode k (plus conjugate if real)."""
    z = vert.nodes
    psi = bump_profile(z, center, width)
    dpsi = vertical_ops(vert).D1_free @ psi
    xi_unit = 2 * np.pi / tan.box_length
    coeffs = np.zeros((3, tan.n, tan.n, vert.n), np.complex128)
    k1, k2 = k
    coeffs[0, k1, k2, :] = -dpsi
    coeffs[1, k1, k2, :] = dpsi
    coeffs[2, k1, k2, :] = 1j * xi_unit * (k1 + k2) * psi
    f = Field3D(tan, vert, coeffs, VELOCITY)
    if real:
        f = f.hermitian_symmetrize()
    scale = f.max_abs()
    return f * (amplitude / scale) if scale > 0 else f


def tangentially_constant_field(tan: TangentialGrid, vert: VerticalGrid,
                                profile_a, profile_b=None) -> Field3D:
    """Field (a(z), b(z), 0): divergence-free, parasitic-compatible."""
    z = vert.nodes
    a = np.asarray(profile_a(z) if callable(profile_a) else profile_a, np.complex128)
    b = np.zeros_like(a) if profile_b is None else \
        np.asarray(profile_b(z) if callable(profile_b) else profile_b, np.complex128)
    return Field3D.from_profile(tan, vert, np.stack([a, b, np.zeros_like(a)]))


def latin_hypercube(g: np.random.Generator, n: int, dims: int) -> np.ndarray:
    """Latin hypercube sample in [0,1)^dims."""
    out = np.empty((n, dims))
    for d in range(dims):
        perm = g.permutation(n)
        out[:, d] = (perm + g.uniform(size=n)) / n
    return out
