"""Stokes resolvent problem lam v - Delta v + grad p = f on the half-space
surrogate, solved per tangential mode through the explicit formulas.

Per mode xi != 0 the pressure is harmonic, p_hat = p0_hat(xi) e^{-|xi| z},
with p0_hat fixed by the vanishing normal trace of v (equivalently the
divergence-free constraint). The velocity splits into a Dirichlet-Laplace
part (1-D resolvent of the data, transparent closure at the truncation
height) and a nonlocal part carried in closed form by the profile
(e^{-|xi| z} - e^{-omega z}) / lam with omega = sqrt(lam + |xi|^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Field3D, VELOCITY
from .grids import mode_ops
from .norms import UlocSpec, uloc_norm, weak_divergence_residual
from .report import SolveReport, endpoint_log_slope

DIV_TOL = 1e-7


class SectorError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SectorPoint:
    """Resolvent parameter lam restricted to the sector |arg lam| <= pi - epsilon."""

    lam: complex
    epsilon: float = np.pi / 4

    def __post_init__(self):
        if not 0 < self.epsilon < np.pi:
            raise SectorError(f"epsilon must lie in (0, pi), got {self.epsilon}")
        if self.lam == 0:
            raise SectorError("lam = 0 is not in the sector")
        if abs(np.angle(complex(self.lam))) > np.pi - self.epsilon + 1e-14:
            raise SectorError(
                f"lam = {self.lam} outside sector |arg| <= pi - {self.epsilon}")

    @property
    def modulus(self) -> float:
        return abs(self.lam)


def omega(xi, lam) -> complex:
    """Principal branch of sqrt(lam + |xi|^2); Re omega > 0 on the sector."""
    lam = lam.lam if isinstance(lam, SectorPoint) else complex(lam)
    if lam.imag == 0 and lam.real < 0:
        raise SectorError(f"lam = {lam} lies on the negative real axis")
    xi = np.asarray(xi, dtype=float)
    ksq = float(xi @ xi) if xi.ndim else float(xi) ** 2
    return complex(np.sqrt(lam + ksq))


@dataclass
class ResolventSolution:
    v: Field3D
    grad_p: Field3D
    p0_trace: np.ndarray        # (n, n) boundary pressure symbol
    lam: complex


def _resolvent_modes(mo, lam: complex, coeffs: np.ndarray,
                     with_pressure: bool = True):
    """Vectorized per-mode solve. coeffs: (3, n, n, nz) spectral data.

    Returns (v_coeffs, p0_flat). Pure Dirichlet-Laplace solve when
    with_pressure is False (all modes, no p0 term).
    """
    v = mo.v
    n, nz = mo.tan.n, len(v.z)
    M = mo.n_modes
    g = coeffs.reshape(3, M, nz)

    c = lam + mo.ksq                                   # (M,)
    rc = 1.0 / (c[:, None] - v.mu[None, :])            # (M, nz) eigen multipliers
    om = np.sqrt(c.astype(np.complex128))
    alpha = 1.0 / (om + v.robin_dZZ)
    alpha = np.where(mo.ksq > 0, alpha, 0.0)           # zero mode: plain Dirichlet
    rcolZ = rc * v.colZ_eig[None, :]
    denom_rob = 1.0 - alpha * (rcolZ @ v.robin_row_eig)

    g_eig = g @ v.Qi.T                                 # (3, M, nz)
    v_eig = np.empty_like(g_eig)
    for k in range(3):
        v0 = rc * g_eig[k]
        s = alpha * (v0 @ v.robin_row_eig) / denom_rob
        v_eig[k] = v0 + rcolZ * s[:, None]
    out = v_eig @ v.Q.T                                # node space

    p0 = np.zeros(M, np.complex128)
    if with_pressure:
        nzero = mo.nonzero
        axi_safe = np.where(nzero, mo.axi, 1.0)
        eom = np.exp(-om[:, None] * v.z[None, :])
        I3 = (eom * (v.wq[None, :] * g[2])).sum(axis=1)
        p0 = np.where(nzero, -(om + mo.axi) / axi_safe * I3, 0.0)
        psi = (mo.E - eom) / lam
        contrib = p0[:, None] * psi
        out[0] -= 1j * mo.xi1[:, None] * contrib
        out[1] -= 1j * mo.xi2[:, None] * contrib
        out[2] += axi_safe[:, None] * np.where(nzero, 1.0, 0.0)[:, None] * contrib
    # zero mode carries no vertical velocity (divergence-free + zero trace)
    out[2, 0, :] = 0.0
    return out.reshape(3, n, n, nz), p0


def solve_resolvent(f: Field3D, lam, check_data: bool = True,
                    div_tol: float = DIV_TOL) -> ResolventSolution:
    """Solve lam v - Delta v + grad p = f, div v = 0, v(.,0) = 0."""
    pt = lam if isinstance(lam, SectorPoint) else SectorPoint(complex(lam))
    if f.roles != VELOCITY:
        raise PreconditionError("resolvent data must be a velocity field")
    if check_data:
        scale = f.max_abs() or 1.0
        resid = weak_divergence_residual(f)
        if resid > div_tol * scale:
            raise PreconditionError(
                f"data not divergence-free with vanishing normal trace: "
                f"residual {resid:.3e} exceeds {div_tol:.1e} x scale {scale:.3e}")
    mo = mode_ops(f.tan, f.vert)
    v_coeffs, p0 = _resolvent_modes(mo, complex(pt.lam), f.coeffs)
    n, nz = f.tan.n, f.vert.n
    pz = p0[:, None] * mo.E                             # (M, nz)
    gp = np.empty((3, mo.n_modes, nz), np.complex128)
    gp[0] = 1j * mo.xi1[:, None] * pz
    gp[1] = 1j * mo.xi2[:, None] * pz
    gp[2] = -mo.axi[:, None] * pz
    v = Field3D(f.tan, f.vert, v_coeffs, VELOCITY)
    grad_p = Field3D(f.tan, f.vert, gp.reshape(3, n, n, nz), VELOCITY)
    return ResolventSolution(v=v, grad_p=grad_p, p0_trace=p0.reshape(n, n),
                             lam=complex(pt.lam))


def split_parts(f: Field3D, lam) -> tuple[Field3D, Field3D]:
    """Dirichlet-Laplace part and nonlocal (pressure-driven) part; their sum
    equals solve_resolvent(f, lam).v exactly on the shared quadrature."""
    pt = lam if isinstance(lam, SectorPoint) else SectorPoint(complex(lam))
    mo = mode_ops(f.tan, f.vert)
    full, _ = _resolvent_modes(mo, complex(pt.lam), f.coeffs, with_pressure=True)
    dl, _ = _resolvent_modes(mo, complex(pt.lam), f.coeffs, with_pressure=False)
    # the zero-mode convention (v3 = 0) lives in the DL part as well
    v_dl = Field3D(f.tan, f.vert, dl, VELOCITY)
    v_nl = Field3D(f.tan, f.vert, full - dl, VELOCITY)
    return v_dl, v_nl


def residual_norms(f: Field3D, sol: ResolventSolution) -> dict:
    """Sup-norm residual diagnostics of a resolvent solution, relative to f."""
    scale = f.max_abs() or 1.0
    pde = sol.lam * sol.v.coeffs - sol.v.laplacian().coeffs \
        + sol.grad_p.coeffs - f.coeffs
    pde_field = Field3D(f.tan, f.vert, pde, VELOCITY)
    res = pde_field.max_abs() / scale
    wall = np.fft.ifft2(sol.v.wall_values(), axes=(1, 2)) * f.tan.n**2
    trace = float(np.abs(wall).max() / scale)
    div = weak_divergence_residual(sol.v) / scale
    return {"pde": float(res), "trace": trace, "divergence": float(div)}


RATIO_NAMES = ("lam_v", "sqrtlam_gradv", "grad2v_log", "v_qp", "gradv_qp")


def _log_factor(lam_abs: float, eps: float) -> float:
    c = math.cos((math.pi - eps) / 2.0) / 2.0
    return 1.0 + math.exp(-c * math.sqrt(lam_abs)) * abs(math.log(lam_abs))


def estimate_sweep(f_family, lam_samples, spec: UlocSpec, p_spec: UlocSpec,
                   oversample: int = 2) -> SolveReport:
    """Sweep the resolvent estimate ratios over a field family and sector points.

    Ratios (named rows):
      lam_v         |lam| ||v||_q / ||f||_q
      sqrtlam_gradv |lam|^(1/2) ||grad v||_q / ||f||_q
      grad2v_log    ||grad^2 v||_q / ((1 + e^{-c sqrt|lam|} |log lam|) ||f||_q)
      v_qp          |lam| ||v||_p / ((1 + |lam|^{(3/2)(1/q-1/p)}) ||f||_q)
      gradv_qp      |lam|^(1/2) ||grad v||_p / (same factor) ||f||_q
    """
    q, p = spec.q, p_spec.q
    if not (1 < q <= p):
        raise SectorError(f"need 1 < q <= p, got q={q}, p={p}")
    invgap = (0.0 if math.isinf(q) else 1.0 / q) - (0.0 if math.isinf(p) else 1.0 / p)
    if invgap > 1.0 / 3.0 + 1e-12:
        raise SectorError(f"1/q - 1/p = {invgap:.4f} exceeds 1/3")
    pts = [s if isinstance(s, SectorPoint) else SectorPoint(complex(s)) for s in lam_samples]
    eps = pts[0].epsilon

    report = SolveReport(
        "resolvent-sweep",
        params={"q": q, "p": p, "rho": spec.rho, "epsilon": eps,
                "n_fields": len(f_family), "boundary_pair": invgap >= 1.0 / 3.0 - 1e-12},
        columns=("re_lambda", "im_lambda", "ratio_name", "value"),
    )
    fnorms = [uloc_norm(f, spec, oversample) for f in f_family]
    by_modulus: dict[float, dict[str, float]] = {}
    for pt in pts:
        lam_abs = pt.modulus
        mix = 1.0 + lam_abs ** (1.5 * invgap)
        logfac = _log_factor(lam_abs, eps)
        worst = {name: 0.0 for name in RATIO_NAMES}
        for f, fq in zip(f_family, fnorms):
            if fq == 0.0:
                continue
            sol = solve_resolvent(f, pt)
            grad = sol.v.gradient()
            grad2 = grad.gradient()
            vq = uloc_norm(sol.v, spec, oversample)
            gq = uloc_norm(grad, spec, oversample)
            g2q = uloc_norm(grad2, spec, oversample)
            vp = uloc_norm(sol.v, UlocSpec(p, spec.rho), oversample)
            gp_ = uloc_norm(grad, UlocSpec(p, spec.rho), oversample)
            worst["lam_v"] = max(worst["lam_v"], lam_abs * vq / fq)
            worst["sqrtlam_gradv"] = max(worst["sqrtlam_gradv"],
                                         math.sqrt(lam_abs) * gq / fq)
            worst["grad2v_log"] = max(worst["grad2v_log"], g2q / (logfac * fq))
            worst["v_qp"] = max(worst["v_qp"], lam_abs * vp / (mix * fq))
            worst["gradv_qp"] = max(worst["gradv_qp"],
                                    math.sqrt(lam_abs) * gp_ / (mix * fq))
        for name in RATIO_NAMES:
            report.add_row(pt.lam.real, pt.lam.imag, name, worst[name])
        agg = by_modulus.setdefault(lam_abs, {n: 0.0 for n in RATIO_NAMES})
        for name in RATIO_NAMES:
            agg[name] = max(agg[name], worst[name])

    moduli = sorted(by_modulus)
    for name in RATIO_NAMES:
        vals = [by_modulus[m][name] for m in moduli]
        report.extras[f"max_{name}"] = max(vals) if vals else 0.0
        if len(moduli) >= 4 and max(vals) > 0:
            lo, hi = endpoint_log_slope(moduli, vals)
            report.add_check(f"slope_low_{name}", abs(lo), 0.05)
            report.add_check(f"slope_high_{name}", abs(hi), 0.05)
    return report
