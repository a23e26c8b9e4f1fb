"""Stokes semigroup via sectorial contour quadrature of the resolvent, the
Oseen operator e^{-tA} P div, and sweeps of their estimates.

The discrete resolvent is rational in lam with real-negative poles, so the
default contour is Weideman's cotangent (Talbot) contour, which converges
like e^{-c N}. The spec-style two-ray geometric contour is available as
method="rays" and is used by the contour-invariance checks. The tangential
zero mode is propagated by the exact matrix exponential of the 1-D Dirichlet
heat operator in both paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _contour_kernel as _kern
from .fields import (Field3D, VELOCITY, TENSOR_SYM, tensor_divergence,
                     convective_term)
from .grids import mode_ops, ModeOps
from .norms import UlocSpec, uloc_norm
from .report import SolveReport, endpoint_log_slope


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    """Quadrature contour for the Dunford integral.

    method "talbot": cotangent contour, n_points total nodes.
    method "rays":   two rays at angles +-(pi - eps'), geometric radial grid
                     r = x/t with x in [r_min, r_max], n_points per ray.
    """
    epsilon: float = np.pi / 4
    r_min: float = 1e-12
    r_max: float = 64.0
    n_points: int = 32
    method: str = "talbot"
    eps_prime: float | None = None

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ContourError("need 0 < r_min < r_max")
        if self.n_points < 16:
            raise ContourError("n_points must be >= 16")
        if self.method not in ("talbot", "rays"):
            raise ContourError(f"unknown contour method {self.method!r}")

    def resolved_eps_prime(self) -> float:
        return self.eps_prime if self.eps_prime is not None else self.epsilon / math.sqrt(2.0)

    def nodes(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        if self.method == "talbot":
            return talbot_contour(self.n_points, t)
        return ray_contour(self.n_points, t, self.resolved_eps_prime(),
                           self.r_min, self.r_max)


DEFAULT_CONTOUR = ContourSpec()


def talbot_contour(N: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Weideman's cotangent contour; weights absorb e^{lam t} dlam/(2 pi i)."""
    theta = -np.pi + (np.arange(N) + 0.5) * 2 * np.pi / N
    lam = (N / t) * (-0.6122 + 0.5017 * theta / np.tan(0.6407 * theta) + 0.2645j * theta)
    dlam = (N / t) * (0.5017 / np.tan(0.6407 * theta)
                      - 0.5017 * 0.6407 * theta / np.sin(0.6407 * theta) ** 2
                      + 0.2645j)
    w = np.exp(lam * t) * dlam * (2 * np.pi / N) / (2j * np.pi)
    return lam, w


def ray_contour(N: int, t: float, eps_prime: float,
                x_min: float, x_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Two-ray sector boundary, trapezoid on a geometric radial grid r = x/t."""
    u = np.linspace(np.log(x_min), np.log(x_max), N)
    h = u[1] - u[0]
    x = np.exp(u)
    wt = np.full(N, h)
    wt[0] *= 0.5
    wt[-1] *= 0.5
    phi = np.pi - eps_prime
    lam_up = (x / t) * np.exp(1j * phi)
    lam_dn = (x / t) * np.exp(-1j * phi)
    w_up = np.exp(lam_up * t) * lam_up * wt / (2j * np.pi)
    w_dn = -np.exp(lam_dn * t) * lam_dn * wt / (2j * np.pi)
    return np.concatenate([lam_up, lam_dn]), np.concatenate([w_up, w_dn])


# -- core contour application -------------------------------------------------

def _dunford_modes(mo: ModeOps, nodes: np.ndarray, wts: np.ndarray,
                   coeffs: np.ndarray, chunk: int = 8) -> np.ndarray:
    """sum_j w_j R(lam_j) g over tangential modes xi != 0.

    Uses the fully discrete (rational-in-lambda) resolvent on the truncated
    strip: Dirichlet closure for the velocity and a two-parameter harmonic
    pressure a e^{-|xi| z} + b e^{|xi|(z - Z)} fixed by killing the normal
    trace gradient at both ends, so the output divergence vanishes
    identically in the continuum strip problem. The family satisfies the
    resolvent identity to machine precision, so the quadrature inherits the
    semigroup law. Mode (0,0) of the output is zeroed here (the exact heat
    exponential handles it outside). Vectorized over contour-node chunks.
    """
    v = mo.v
    M, nz = mo.n_modes, len(v.z)
    g_eig = np.ascontiguousarray(coeffs.reshape(3, M, nz) @ v.Qi.T)
    r0 = v.d1_dir_row0_eig
    rZ = v.d1_dir_rowZ_eig
    nonzero = mo.nonzero
    acc = np.zeros((3, M, nz), np.complex128)
    if _kern.HAS_NUMBA:
        _kern.contour_sum(v.mu.astype(np.complex128), mo.ksq, mo.xi1, mo.xi2,
                          mo.axi, nonzero, mo.E_eig, mo.E_plus_eig,
                          r0, rZ, g_eig, np.ascontiguousarray(nodes),
                          np.ascontiguousarray(wts), acc)
        out = acc @ v.Q.T
        out[:, 0, :] = 0.0
        return out.reshape(coeffs.shape)
    axi_safe = np.where(nonzero, mo.axi, 1.0)
    ux1 = np.where(nonzero, mo.xi1 / axi_safe, 0.0)[None, :, None]
    ux2 = np.where(nonzero, mo.xi2 / axi_safe, 0.0)[None, :, None]
    for j0 in range(0, len(nodes), chunk):
        lam = nodes[j0:j0 + chunk][:, None, None]          # (J,1,1)
        w = wts[j0:j0 + chunk][:, None, None]
        c = lam + mo.ksq[None, :, None]
        rc = 1.0 / (c - v.mu[None, None, :])               # (J,M,nz)
        ym = rc * mo.E_eig[None]
        yp = rc * mo.E_plus_eig[None]
        # forcing of v3 from the pressure: +A e^{-|xi| z} - B e^{|xi|(z-Z)}
        # with A = |xi| a, B = |xi| b; kill d3 v3 at both walls
        g0 = (rc * g_eig[2][None]) @ r0
        gZ = (rc * g_eig[2][None]) @ rZ
        m00, m0Z = ym @ r0, -(yp @ r0)
        mZ0, mZZ = ym @ rZ, -(yp @ rZ)
        det = m00 * mZZ - m0Z * mZ0
        det = np.where(nonzero[None, :], det, 1.0)
        A = np.where(nonzero[None, :], (-g0 * mZZ + gZ * m0Z) / det, 0.0)[:, :, None]
        B = np.where(nonzero[None, :], (-m00 * gZ + mZ0 * g0) / det, 0.0)[:, :, None]
        acc[0] += np.sum(w * (rc * g_eig[0][None] - 1j * ux1 * (A * ym + B * yp)), axis=0)
        acc[1] += np.sum(w * (rc * g_eig[1][None] - 1j * ux2 * (A * ym + B * yp)), axis=0)
        acc[2] += np.sum(w * (rc * g_eig[2][None] + A * ym - B * yp), axis=0)
    out = acc @ v.Q.T
    out[:, 0, :] = 0.0
    return out.reshape(coeffs.shape)


def _heat_mode0(mo: ModeOps, t: float, prof: np.ndarray) -> np.ndarray:
    """Exact 1-D Dirichlet heat evolution of zero-mode profiles (k, nz)."""
    v = mo.v
    return (prof @ v.Qi.T) * np.exp(t * v.mu)[None, :] @ v.Q.T


def apply_semigroup(u0: Field3D, t: float, contour: ContourSpec = DEFAULT_CONTOUR,
                    check_convergence: bool = False) -> Field3D:
    """e^{-tA} u0 by Dunford quadrature (exact heat at the zero mode)."""
    if not t > 0:
        raise ContourError(f"time must be positive, got {t}")
    if u0.roles != VELOCITY:
        raise ContourError("semigroup acts on velocity fields")
    out = _semigroup_coeffs(u0, t, contour)
    if check_convergence:
        finer = ContourSpec(contour.epsilon, contour.r_min, contour.r_max,
                            2 * contour.n_points, contour.method, contour.eps_prime)
        out2 = _semigroup_coeffs(u0, t, finer)
        scale = np.abs(out2).max() or 1.0
        if np.abs(out - out2).max() > 1e-6 * scale:
            raise ContourError("contour too coarse: node-doubling discrepancy "
                               f"{np.abs(out - out2).max() / scale:.2e}")
        out = out2
    return Field3D(u0.tan, u0.vert, out, VELOCITY)


def _semigroup_coeffs(u0: Field3D, t: float, contour: ContourSpec) -> np.ndarray:
    mo = mode_ops(u0.tan, u0.vert)
    nodes, wts = contour.nodes(t)
    out = _dunford_modes(mo, nodes, wts, u0.coeffs)
    out[:2, 0, 0, :] = _heat_mode0(mo, t, u0.coeffs[:2, 0, 0, :])
    out[2, 0, 0, :] = 0.0
    return out


# -- Oseen operator -----------------------------------------------------------

def helmholtz_split(g: Field3D) -> tuple[Field3D, Field3D]:
    """g = g_sol + grad(phi) with div g_sol = 0 and g_sol . e3 = 0 at the wall.

    phi solves the mode-wise Neumann problem Delta phi = div g,
    d3 phi(0) = g3(., 0); lam-independent, used by the Oseen operator.
    """
    mo = mode_ops(g.tan, g.vert)
    v = mo.v
    n, nz = g.tan.n, g.vert.n
    M = mo.n_modes
    gm = g.coeffs.reshape(3, M, nz)
    divg = (1j * mo.xi1[:, None] * gm[0] + 1j * mo.xi2[:, None] * gm[1]
            + gm[2] @ v.D1_free.T)
    b = gm[2] @ v.eval0_free                            # (M,) wall data of g3
    # (|xi|^2 - d33) phi = -div g with d3 phi(0) = b, phi(Z) = 0
    rhs = -divg + v.neu_inject[None, :] * b[:, None]
    phi_eig = (rhs @ v.neu_Qi.T) / (mo.ksq[:, None] - v.neu_mu[None, :])
    phi = phi_eig @ v.neu_Q.T
    dz_phi = phi @ v.neu_D1.T + v.neu_D1_inject[None, :] * b[:, None]
    grad = np.empty((3, M, nz), np.complex128)
    grad[0] = 1j * mo.xi1[:, None] * phi
    grad[1] = 1j * mo.xi2[:, None] * phi
    grad[2] = dz_phi
    # zero mode: the vertical forcing is entirely gradient
    grad[0, 0] = 0.0
    grad[1, 0] = 0.0
    grad[2, 0] = gm[2, 0]
    sol = gm - grad
    g_sol = Field3D(g.tan, g.vert, sol.reshape(3, n, n, nz), VELOCITY)
    g_phi = Field3D(g.tan, g.vert, grad.reshape(3, n, n, nz), VELOCITY)
    return g_sol, g_phi


def apply_oseen(F: Field3D, t: float, contour: ContourSpec = DEFAULT_CONTOUR) -> Field3D:
    """e^{-tA} P div F for a symmetric tensor field F (velocity output).

    Computed as the Dunford contour of the resolvent applied to the
    solenoidal Helmholtz part of div F; the gradient part drops out of the
    velocity (it shifts only the pressure).
    """
    if not t > 0:
        raise ContourError(f"time must be positive, got {t}")
    if F.roles != TENSOR_SYM:
        raise ContourError("apply_oseen expects a symmetric tensor field "
                           f"(roles {TENSOR_SYM}), got {F.roles}")
    g = tensor_divergence(F)
    g_sol, _ = helmholtz_split(g)
    return apply_semigroup(g_sol, t, contour)


# -- traces and sweeps --------------------------------------------------------

@dataclass
class EvolutionTrace:
    times: np.ndarray
    fields: list
    norms: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, float)
        if np.any(np.diff(t) <= 0) or np.any(t < 0):
            raise ContourError("times must be strictly increasing and nonnegative")
        self.times = t

    def at(self, t: float) -> Field3D:
        i = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[i], t, rel_tol=1e-12):
            raise ContourError(f"time {t} not stored in trace")
        return self.fields[i]


def evolve_stokes(u0: Field3D, times, contour: ContourSpec = DEFAULT_CONTOUR,
                  spec: UlocSpec | None = None) -> EvolutionTrace:
    spec = spec or UlocSpec(2.0, 1.0)
    fields = [apply_semigroup(u0, float(t), contour) for t in times]
    norms = {
        "uloc": np.array([uloc_norm(f, spec) for f in fields]),
        "sup": np.array([f.max_abs() for f in fields]),
    }
    return EvolutionTrace(np.asarray(times, float), fields, norms)


def analyticity_sweep(u0: Field3D, times, contour: ContourSpec = DEFAULT_CONTOUR,
                      spec: UlocSpec | None = None, fd_step: float = 0.05) -> SolveReport:
    """Record ||e^{-tA} u0|| and t ||A e^{-tA} u0|| over a time sweep.

    A-application by centered finite differences of the semigroup in t.
    Boundedness is asserted via endpoint log-log slopes and a long-time
    non-increase check on the semigroup norm.
    """
    spec = spec or UlocSpec(2.0, 1.0)
    times = np.asarray(sorted(times), float)
    report = SolveReport("evolve-stokes",
                         params={"q": spec.q, "rho": spec.rho, "fd_step": fd_step},
                         columns=("t", "norm_name", "value", "ratio"))
    semi, tA = [], []
    for t in times:
        u_t = apply_semigroup(u0, t, contour)
        h = fd_step * t
        up = apply_semigroup(u0, t + h, contour)
        dn = apply_semigroup(u0, t - h, contour)
        du = (up - dn) * (1.0 / (2 * h))
        n1 = uloc_norm(u_t, spec)
        n2 = t * uloc_norm(du, spec)
        semi.append(n1)
        tA.append(n2)
        report.add_row(float(t), "semigroup_uloc", n1, 0.0)
        report.add_row(float(t), "t_A_semigroup_uloc", n2, 0.0)
    semi, tA = np.array(semi), np.array(tA)
    report.extras["max_semigroup"] = float(semi.max())
    report.extras["max_tA"] = float(tA.max())
    lo, hi = endpoint_log_slope(times, np.maximum(semi, 1e-300))
    report.add_check("semigroup_slope_high", abs(hi), 0.05)
    lo2, hi2 = endpoint_log_slope(times, np.maximum(tA, 1e-300))
    report.add_check("tA_slope_low", abs(lo2), 0.05)
    report.add_check("tA_slope_high", abs(hi2), 0.05)
    late = semi[times >= 1.0]
    if len(late) >= 2:
        growth = np.max(np.diff(late) / np.maximum(late[:-1], 1e-300))
        report.add_check("longtime_nonincreasing", float(growth), 1e-8)
    return report


def bilinear_sweep(u: Field3D, v: Field3D, times, q: float, p: float,
                   rho: float = 1.0, contour: ContourSpec = DEFAULT_CONTOUR) -> SolveReport:
    """Ratios of || grad^a e^{-tA} P div (u x v) ||_p against the bilinear
    bounds, a in {0, 1}, plus the convective-form bound."""
    if not (1 <= q <= p):
        raise ContourError(f"need 1 <= q <= p, got q={q}, p={p}")
    if q == 1 and p == 1:
        raise ContourError("q = p = 1 is outside the bilinear estimate range")
    from .fields import symmetric_product
    F = symmetric_product(u, v)
    spec_q, spec_p = UlocSpec(q, rho), UlocSpec(p, rho)
    Fq = uloc_norm(F, spec_q)
    conv = uloc_norm(convective_term(u, v), spec_q) + uloc_norm(convective_term(v, u), spec_q)
    invgap = (0.0 if math.isinf(q) else 1.0 / q) - (0.0 if math.isinf(p) else 1.0 / p)
    times = np.asarray(sorted(times), float)
    report = SolveReport("bilinear-sweep",
                         params={"q": q, "p": p, "rho": rho, "F_norm": Fq},
                         columns=("t", "norm_name", "value", "ratio"))
    names = ("bilinear_a0", "bilinear_a1", "bilinear_conv")
    series = {name: [] for name in names}
    for t in times:
        w = apply_oseen(F, float(t), contour)
        gw = w.gradient()
        mix = t ** (-1.5 * invgap) + 1.0
        n0 = uloc_norm(w, spec_p)
        n1 = uloc_norm(gw, spec_p)
        nqc = uloc_norm(gw, spec_q)
        r0 = n0 / (t ** -0.5 * mix * Fq) if Fq else 0.0
        r1 = n1 / (t ** -1.0 * mix * Fq) if Fq else 0.0
        r2 = nqc / (t ** -0.5 * conv) if conv else 0.0
        for name, nval, rval in (("bilinear_a0", n0, r0), ("bilinear_a1", n1, r1),
                                 ("bilinear_conv", nqc, r2)):
            series[name].append(rval)
            report.add_row(float(t), name, nval, rval)
    for name in names:
        vals = np.array(series[name])
        report.extras[f"max_{name}"] = float(vals.max(initial=0.0))
        if len(times) >= 6 and vals.max(initial=0.0) > 0:
            lo, hi = endpoint_log_slope(times, np.maximum(vals, 1e-300))
            report.add_check(f"slope_low_{name}", abs(lo), 0.05)
            report.add_check(f"slope_high_{name}", abs(hi), 0.05)
    return report
