"""Hot loop of the Dunford quadrature: contour-summed per-mode resolvent
solves in the Dirichlet eigenbasis. Numba-compiled when available; the
numpy fallback in semigroup.py produces identical results.

Set HS_DISABLE_NUMBA=1 to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

HAS_NUMBA = False
if not os.environ.get("HS_DISABLE_NUMBA"):
    try:
        import numba
        from numba import njit, prange
        HAS_NUMBA = True
    except ImportError:
        pass


if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def contour_sum(mu, ksq, xi1, xi2, axi, nonzero, E_eig, Ep_eig,
                    r0, rZ, g_eig, lam, w, acc):
        M, nz = E_eig.shape
        J = lam.shape[0]
        for m in prange(M):
            if not nonzero[m]:
                continue
            k2 = ksq[m]
            a1 = xi1[m] / axi[m]
            a2 = xi2[m] / axi[m]
            for j in range(J):
                c = lam[j] + k2
                wj = w[j]
                g0 = 0.0 + 0.0j
                gZ = 0.0 + 0.0j
                m00 = 0.0 + 0.0j
                m0Z = 0.0 + 0.0j
                mZ0 = 0.0 + 0.0j
                mZZ = 0.0 + 0.0j
                for k in range(nz):
                    rc = 1.0 / (c - mu[k])
                    y3 = rc * g_eig[2, m, k]
                    ym = rc * E_eig[m, k]
                    yp = rc * Ep_eig[m, k]
                    g0 += y3 * r0[k]
                    gZ += y3 * rZ[k]
                    m00 += ym * r0[k]
                    m0Z -= yp * r0[k]
                    mZ0 += ym * rZ[k]
                    mZZ -= yp * rZ[k]
                det = m00 * mZZ - m0Z * mZ0
                A = (-g0 * mZZ + gZ * m0Z) / det
                B = (-m00 * gZ + mZ0 * g0) / det
                for k in range(nz):
                    rc = 1.0 / (c - mu[k])
                    ym = rc * E_eig[m, k]
                    yp = rc * Ep_eig[m, k]
                    pr = A * ym + B * yp
                    acc[0, m, k] += wj * (rc * g_eig[0, m, k] - 1j * a1 * pr)
                    acc[1, m, k] += wj * (rc * g_eig[1, m, k] - 1j * a2 * pr)
                    acc[2, m, k] += wj * (rc * g_eig[2, m, k] + A * ym - B * yp)
