"""Shared numerical utilities: nonuniform finite differences, log-space
quadrature for heavily weighted integrals, and regression helpers.

Derivative stencils use Fornberg weights so grids never need to be uniform.
Weighted L2 norms in the Carleman machinery involve factors like
exp(alpha*(tau0-tau)*h**(2-delta)) whose magnitude overflows double precision
by thousands of orders; every integral of that kind is therefore carried as
the log of its value, with cells integrated under a piecewise-linear model of
the log-integrand (exact for exponentials, second order otherwise).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "fornberg_weights",
    "fd_derivative",
    "log_expfit_integral",
    "logsumexp",
    "smoothstep",
    "smoothbump",
    "linear_fit",
    "loglog_slope",
    "weighted_l2_log",
]

_LOG_TINY = -745.0  # below exp() underflow


def fornberg_weights(nodes: np.ndarray, z: np.ndarray, max_order: int) -> np.ndarray:
    """Finite-difference weights on arbitrary nodes (Fornberg's recurrence).

    nodes: (..., k) stencil abscissae, z: (...,) evaluation points.
    Returns (..., k, max_order+1); [..., j, m] is the weight of y(nodes[j])
    in the m-th derivative at z.  Vectorized over leading dimensions.
    """
    nodes = np.asarray(nodes, dtype=float)
    z = np.asarray(z, dtype=float)
    k = nodes.shape[-1]
    batch = nodes.shape[:-1]
    c = np.zeros(batch + (k, max_order + 1))
    c1 = np.ones(batch)
    c4 = nodes[..., 0] - z
    c[..., 0, 0] = 1.0
    for i in range(1, k):
        mn = min(i, max_order)
        c2 = np.ones(batch)
        c5 = c4
        c4 = nodes[..., i] - z
        for j in range(i):
            c3 = nodes[..., i] - nodes[..., j]
            c2 = c2 * c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[..., i, m] = c1 * (m * c[..., i - 1, m - 1] - c5 * c[..., i - 1, m]) / c2
                c[..., i, 0] = -c1 * c5 * c[..., i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[..., j, m] = (c4 * c[..., j, m] - m * c[..., j, m - 1]) / c3
            c[..., j, 0] = c4 * c[..., j, 0] / c3
        c1 = c2
    return c


def fd_derivative(x: np.ndarray, y: np.ndarray, order: int = 1, stencil: int = 5) -> np.ndarray:
    """Derivative of sampled data on a (possibly nonuniform) increasing grid.

    Sliding `stencil`-point Fornberg stencils; five points give 4th-order
    accuracy for the first and ~3rd order for the second derivative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < stencil:
        raise ValueError(f"grid of {n} points cannot support a {stencil}-point stencil")
    half = stencil // 2
    # window start index per evaluation point, clamped at the boundaries
    start = np.clip(np.arange(n) - half, 0, n - stencil)
    idx = start[:, None] + np.arange(stencil)[None, :]
    w = fornberg_weights(x[idx], x, order)[..., order]
    return np.sum(w * y[idx], axis=-1)


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - amax), axis=axis)) + np.squeeze(amax, axis=axis)
    return out


def log_expfit_integral(logf: np.ndarray, x: np.ndarray, axis: int = -1) -> np.ndarray:
    """log of integral of exp(logf) dx, treating logf as piecewise linear.

    Exact for exponential integrands, which makes steep Carleman weights safe
    to integrate on moderate grids; reduces to the trapezoid rule when the
    log-slope of a cell vanishes.  -inf entries (integrand zero) are allowed.
    """
    logf = np.moveaxis(np.asarray(logf, dtype=float), axis, -1)
    x = np.asarray(x, dtype=float)
    a = logf[..., :-1]
    b = logf[..., 1:]
    dx = np.diff(x)
    big = np.maximum(a, b)
    # cap a semi-infinite drop so (1 - e^-d)/d stays meaningful on the cell
    small = np.maximum(np.minimum(a, b), big + _LOG_TINY)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = big - small
        slope_part = np.where(d > 1e-12, np.log1p(-np.exp(-d)) - np.log(d), -d / 2.0)
    cells = big + slope_part + np.log(dx)
    cells = np.where(np.isfinite(big), cells, -np.inf)
    return logsumexp(cells, axis=-1)


def weighted_l2_log(values: np.ndarray, log_weight: np.ndarray, log_measure: np.ndarray,
                    x: np.ndarray, axis: int = -1) -> np.ndarray:
    """log of integral of values^2 * exp(log_weight + log_measure) dx."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        logv2 = 2.0 * np.log(np.abs(v))
    return log_expfit_integral(logv2 + log_weight + log_measure, x, axis=axis)


def smoothstep(t: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 for t<=0, 1 for t>=1, C^2 across the joins."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def smoothbump(r: np.ndarray, center: float, width: float) -> np.ndarray:
    """C^2 bump supported on [center-width, center+width], peak value 1."""
    t = (np.asarray(r, dtype=float) - (center - width)) / width
    up = smoothstep(t)
    down = smoothstep(2.0 - t)
    return up * down


def linear_fit(x: np.ndarray, y: np.ndarray):
    """Least-squares y ~ a + b*x; returns (a, b, stderr_b)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    A = np.column_stack([np.ones(n), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(n - 2, 1)
    sxx = np.sum((x - x.mean()) ** 2)
    se_b = np.sqrt(np.sum(resid**2) / dof / sxx) if sxx > 0 else np.inf
    return coef[0], coef[1], se_b


def loglog_slope(x: np.ndarray, y: np.ndarray, floor: float = 1e-300):
    """Slope p of log|y| ~ c + p*log x with a 95% confidence interval.

    Points with |y| <= floor are dropped (sign changes in a decaying
    remainder would otherwise poison the regression).
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = y > floor
    if np.count_nonzero(keep) < 4:
        raise ValueError("too few usable points for a log-log slope")
    _, p, se = linear_fit(np.log(x[keep]), np.log(y[keep]))
    return p, (p - 1.96 * se, p + 1.96 * se)
