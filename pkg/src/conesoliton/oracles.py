"""Independent curvature oracle: coordinate finite differences.

Assembles Christoffel symbols and the full Riemann tensor of
dr^2 + a(r)^2 g_{S^{n-1}} by numerically differentiating the metric
components in the spherical coordinate chart

    (r, t_1, ..., t_{n-1}),  g_00 = 1,  g_jj = a(r)^2 prod_{k<j} sin^2 t_k,

around a generic point (all angles pi/2).  Nothing here shares code with the
closed-form warped-product formulas in geometry.py; agreement between the two
routes is what certifies those formulas.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import make_interp_spline

__all__ = ["CoordinateCurvatureOracle", "oracle_from_field"]

_C1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0  # 4th-order first derivative
_OFF = np.array([-2, -1, 1, 2])


class CoordinateCurvatureOracle:
    """Curvature of a warped metric from coordinate finite differences only.

    a_func: callable r -> warp value; n: manifold dimension.
    """

    def __init__(self, a_func, n: int, rel_step: float = 5e-3, richardson: bool = True):
        self.a_func = a_func
        self.n = int(n)
        self.rel_step = float(rel_step)
        self.richardson = richardson

    # -- metric in the chart --------------------------------------------
    def metric_diag(self, x: np.ndarray) -> np.ndarray:
        """Diagonal metric components at chart point x = (r, t_1..t_{n-1})."""
        n = self.n
        g = np.empty(n)
        g[0] = 1.0
        a2 = float(self.a_func(x[0])) ** 2
        sin2 = np.sin(x[1:]) ** 2
        for j in range(1, n):
            g[j] = a2 * np.prod(sin2[: j - 1])
        return g

    # -- finite differences ----------------------------------------------
    def _dg(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        """dg[i, j] = d g_jj / d x_i (4th order)."""
        n = self.n
        out = np.zeros((n, n))
        for i in range(n):
            acc = np.zeros(n)
            for c, k in zip(_C1, _OFF):
                xp = x.copy()
                xp[i] += k * h[i]
                acc += c * self.metric_diag(xp)
            out[i] = acc / h[i]
        return out

    def _christoffel(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        g = self.metric_diag(x)
        dg = self._dg(x, h)
        n = self.n
        gam = np.zeros((n, n, n))  # gam[k, i, j] = Gamma^k_ij
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    # diagonal metric: only l = k survives in the contraction
                    val = 0.0
                    if j == k:
                        val += dg[i, k]
                    if i == k:
                        val += dg[j, k]
                    if i == j:
                        val -= dg[k, i]
                    gam[k, i, j] = 0.5 * val / g[k]
        return gam

    def _riemann_once(self, x: np.ndarray, step_scale: float):
        n = self.n
        h = np.full(n, step_scale)
        h[0] = step_scale * max(1.0, abs(x[0]))
        gam0 = self._christoffel(x, h)
        dgam = np.zeros((n, n, n, n))  # dgam[i, k, a, b] = d_i Gamma^k_ab
        for i in range(n):
            acc = np.zeros((n, n, n))
            for c, k in zip(_C1, _OFF):
                xp = x.copy()
                xp[i] += k * h[i]
                acc += c * self._christoffel(xp, h)
            dgam[i] = acc / h[i]
        # R(d_i, d_j) d_k = Rup[l, k, i, j] d_l
        rup = np.zeros((n, n, n, n))
        for l in range(n):
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        val = dgam[i, l, j, k] - dgam[j, l, i, k]
                        val += np.dot(gam0[l, i, :], gam0[:, j, k])
                        val -= np.dot(gam0[l, j, :], gam0[:, i, k])
                        rup[l, k, i, j] = val
        return rup

    def _riemann(self, x: np.ndarray):
        s = self.rel_step
        r1 = self._riemann_once(x, s)
        if not self.richardson:
            return r1
        r2 = self._riemann_once(x, s / 2.0)
        return (16.0 * r2 - r1) / 15.0

    # -- public queries ----------------------------------------------------
    def curvature(self, r0: float):
        """(rc_rad, rc_sph, R, rm_norm) with |Rm| the (4,0)-tensor norm."""
        n = self.n
        x = np.full(n, np.pi / 2.0)
        x[0] = float(r0)
        g = self.metric_diag(x)
        rup = self._riemann(x)
        ricci = np.einsum("lkli->ki", rup)
        rc_rad = ricci[0, 0] / g[0]
        rc_sph = ricci[1, 1] / g[1]
        scal = np.sum(np.diag(ricci) / g)
        # lower the first index, contract the norm with inverse metrics
        rlow = rup * g[:, None, None, None]
        ginv = 1.0 / g
        rm2 = np.einsum("mkij,akij,a,k,i,j->", rlow, rlow, ginv, ginv, ginv, ginv)
        return float(rc_rad), float(rc_sph), float(scal), float(np.sqrt(rm2))

    def hessian_of_radial(self, phi_func, r0: float):
        """(hess_rad, hess_sph) of a radial function from chart finite
        differences: Hess(phi)_ij = d_i d_j phi - Gamma^k_ij d_k phi."""
        n = self.n
        x = np.full(n, np.pi / 2.0)
        x[0] = float(r0)
        h = np.full(n, self.rel_step)
        h[0] = self.rel_step * max(1.0, abs(r0))
        g = self.metric_diag(x)
        gam = self._christoffel(x, h)
        # radial first/second derivatives of phi, 4th order
        c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
        off2 = np.array([-2, -1, 0, 1, 2])
        d1 = sum(c * phi_func(r0 + k * h[0]) for c, k in zip(_C1, _OFF)) / h[0]
        d2 = sum(c * phi_func(r0 + k * h[0]) for c, k in zip(c2, off2)) / h[0] ** 2
        hess_rad = (d2 - gam[0, 0, 0] * d1) / g[0]
        hess_sph = (-gam[0, 1, 1] * d1) / g[1]
        return float(hess_rad), float(hess_sph)


def oracle_from_field(field, rel_step: float = 5e-3) -> CoordinateCurvatureOracle:
    """Oracle over a sampled field, with the warp interpolated by a quintic
    spline (interpolation error far below the FD step scale on dense grids)."""
    spline = make_interp_spline(field.r, field.a, k=5)
    return CoordinateCurvatureOracle(spline, field.n, rel_step=rel_step)
