"""Pointwise algebra of the two localization weights and the time factor.

The first weight grows like exp(strength * (terminal - tau) * h^(2-delta)
+ h^2) along the distance surrogate h of a flow snapshot and is used to
force rapid decay of whatever it multiplies; the second is a time-shifted
Gaussian (tau+a)^(-n/2) exp(-(h-rho)^2 / (4(tau+a))) centered on the shell
h = rho.  Log values are carried everywhere because the exponents overflow
double precision already for moderate strength parameters.

Every derivative quantity is produced twice: once from closed forms that
follow from the radial derivative identities of h (h' = 2 tau f'/h,
|grad h|^2 = 1 - 4 tau^2 R / h^2, h Lap h = n - 2 tau R - |grad h|^2,
dh/dtau = 2 tau R / h) and once by finite differences, radial stencils
within a snapshot and time stencils across neighbor snapshots, so the
closed forms stay independently checkable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConeSolitonError, ParameterError
from .geometry import curvature_arrays
from .numutil import fd_derivative, fornberg_weights

__all__ = [
    "G1Params",
    "G2Params",
    "SigmaEval",
    "WeightEvaluation",
    "BackheatReport",
    "G2BoundsReport",
    "sigma_a",
    "g1_evaluate",
    "g2_evaluate",
    "f1_heat_closed",
    "f2_heat_closed",
    "check_f1_backheat",
    "check_g2_bounds",
    "threshold_radius",
]


@dataclass(frozen=True)
class G1Params:
    """Parameters of the rapid-growth weight exp[alpha (tau0-tau) h^(2-delta) + h^2]."""

    alpha: float
    tau0: float
    delta: float

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ParameterError(f"weight strength must be >= 1, got {self.alpha}")
        if not 0.0 < self.tau0 <= 1.0:
            raise ParameterError(f"terminal time must lie in (0, 1], got {self.tau0}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"exponent gap must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class G2Params:
    """Parameters of the shell Gaussian (tau+a)^(-n/2) exp(-(h-rho)^2/(4(tau+a)))."""

    a: float
    rho: float
    gamma: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.a <= 0.125:
            raise ParameterError(f"time shift must lie in (0, 1/8], got {self.a}")
        if not self.rho > 0.0:
            raise ParameterError(f"center radius must be positive, got {self.rho}")
        if not self.gamma > 0.0:
            raise ParameterError(f"aperture ratio must be positive, got {self.gamma}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 3):
            raise ParameterError(f"dimension must be an integer >= 3, got {self.n}")


@dataclass(frozen=True)
class SigmaEval:
    """Time factor sigma_a = (tau+a) e^(-(tau+a)/3) with derivative and the
    log-convexity quantity -(sigma/sigma_dot) (log sigma)''."""

    value: np.ndarray
    derivative: np.ndarray
    log_convexity: np.ndarray


def sigma_a(tau, a):
    """Evaluate the time factor and assert its linear-comparison bounds.

    The bounds (tau+a)/(3e) <= sigma_a <= (tau+a) and 1/(3e) <= d sigma_a
    <= 1 hold identically for tau in [0, 1], a in (0, 1); they are re-checked
    here as a cheap guard against misuse outside that range.
    """
    tau = np.asarray(tau, dtype=float)
    if not 0.0 < a < 1.0:
        raise ParameterError(f"time shift must lie in (0, 1), got {a}")
    if np.any(tau < 0.0) or np.any(tau > 1.0):
        raise ParameterError("time arguments must lie in [0, 1]")
    s = tau + a
    value = s * np.exp(-s / 3.0)
    derivative = np.exp(-s / 3.0) * (1.0 - s / 3.0)
    log_convexity = 1.0 / (s * (1.0 - s / 3.0))
    lo = 1.0 / (3.0 * math.e)
    if np.any(value < lo * s - 1e-15) or np.any(value > s + 1e-15):
        raise ConeSolitonError("time factor escaped its linear envelope")
    if np.any(derivative < lo - 1e-15) or np.any(derivative > 1.0 + 1e-15):
        raise ConeSolitonError("time factor slope escaped its envelope")
    return SigmaEval(value=value, derivative=derivative, log_convexity=log_convexity)


@dataclass(frozen=True)
class WeightEvaluation:
    """Closed-form and finite-difference derivatives of a log weight on one
    snapshot grid, plus the pointwise inequality margins it certifies.

    Time-derivative and full finite-difference variants are only available
    when neighbor snapshots were supplied; they are None otherwise.
    """

    tau: float
    labels: np.ndarray
    log_value: np.ndarray
    time_derivative_closed: np.ndarray
    grad_closed: np.ndarray
    hess_rad_closed: np.ndarray
    hess_sph_closed: np.ndarray
    F_closed: np.ndarray
    grad_fd: np.ndarray
    hess_rad_fd: np.ndarray
    hess_sph_fd: np.ndarray
    time_derivative_fd: np.ndarray | None
    F_fd: np.ndarray | None
    margins: dict = dc_field(default_factory=dict)

    def interior(self) -> slice:
        # radial stencils pollute three points at each end
        return slice(3, -3)


def _snapshot_arrays(snapshot):
    """Geometry arrays shared by both weights: arclength u, warp data,
    curvature, h and its closed radial/time derivatives."""
    fld = snapshot.field
    u = fld.r
    tau = snapshot.tau
    _, _, rc_rad, rc_sph, R, _ = curvature_arrays(fld)
    rc_sq = rc_rad**2 + (fld.n - 1) * rc_sph**2
    h = snapshot.h
    hp = 2.0 * tau * fld.f1 / h                    # dh/du
    hp2 = 1.0 - 4.0 * tau**2 * R / h**2            # |grad h|^2, closed
    lap_h = (fld.n - 2.0 * tau * R - hp2) / h
    R_u = fd_derivative(u, R, 1)
    return {
        "n": fld.n, "tau": tau, "u": u, "a": fld.a, "a1": fld.a1,
        "rc_rad": rc_rad, "rc_sph": rc_sph, "R": R, "rc_sq": rc_sq,
        "R_u": R_u, "h": h, "hp": hp, "hp2": hp2, "lap_h": lap_h,
    }


def _lap_radial(arrs, v1, v2):
    return v2 + (arrs["n"] - 1) * (arrs["a1"] / arrs["a"]) * v1


def _tau_stencil_rows(snapshot, tau_neighbors, per_point):
    """First tau-derivative of per_point(snapshot) at snapshot.tau using the
    neighbor snapshots; returns None when no neighbors are available."""
    if not tau_neighbors:
        return None
    snaps = sorted([snapshot, *tau_neighbors], key=lambda s: s.tau)
    taus = np.array([s.tau for s in snaps])
    if len(snaps) < 3:
        raise ParameterError("time differencing needs at least two neighbor snapshots")
    for s in snaps:
        if s.labels.shape != snapshot.labels.shape or np.any(s.labels != snapshot.labels):
            raise ParameterError("neighbor snapshots must share the label grid")
    rows = np.stack([per_point(s) for s in snaps])
    wts = fornberg_weights(taus, float(snapshot.tau), 1)[..., 1]
    return np.tensordot(wts, rows, axes=(0, 0))


def g1_evaluate(snapshot, params: G1Params, tau_neighbors=()):
    """Log value and derivatives of the rapid-growth weight on one snapshot.

    Margins reported: hess (smallest Hessian eigenvalue of the log weight
    minus 1, certifying hess >= metric) and F_nonpos (-F, certifying the
    conjugated heat quantity is nonpositive).
    """
    arrs = _snapshot_arrays(snapshot)
    alpha, tau0, delta = params.alpha, params.tau0, params.delta
    tau, h, hp, R = arrs["tau"], arrs["h"], arrs["hp"], arrs["R"]
    if tau > tau0 + 1e-12:
        raise ParameterError(f"snapshot time {tau} exceeds the terminal time {tau0}")
    c1 = (2.0 - delta) * (tau0 - tau)

    phi = alpha * (tau0 - tau) * h ** (2.0 - delta) + h**2
    dphi_tau = 4.0 * tau * R - alpha * h ** (2.0 - delta) * (
        1.0 - 2.0 * (2.0 - delta) * tau * (tau0 - tau) * R / h**2)
    grad = (alpha * c1 * h ** (1.0 - delta) + 2.0 * h) * hp
    hess_rad = 2.0 * (1.0 - 2.0 * tau * arrs["rc_rad"]) + alpha * c1 * h ** (-delta) * (
        1.0 - 2.0 * tau * arrs["rc_rad"] - delta * hp**2)
    hess_sph = 2.0 * (1.0 - 2.0 * tau * arrs["rc_sph"]) + alpha * c1 * h ** (-delta) * (
        1.0 - 2.0 * tau * arrs["rc_sph"])

    # grouped closed form of F = dphi/dtau - Lap phi - |grad phi|^2 + R
    F = ((4.0 * tau + 1.0) * R
         - alpha * (h ** (2.0 - delta) - 2.0 * (2.0 - delta) * (tau0 - tau) * tau * h ** (-delta) * R)
         - 2.0 * arrs["n"] + 4.0 * tau * R
         - alpha * c1 * ((arrs["n"] - delta - 2.0 * tau * R) * h ** (-delta)
                         + 4.0 * delta * tau**2 * h ** (-2.0 - delta) * R)
         - (alpha * c1 * h ** (1.0 - delta) + 2.0 * h) ** 2 * (1.0 - 4.0 * tau**2 * h ** (-2) * R))

    u = arrs["u"]
    grad_fd = fd_derivative(u, phi, 1)
    hess_rad_fd = fd_derivative(u, phi, 2)
    hess_sph_fd = (arrs["a1"] / arrs["a"]) * grad_fd

    def phi_of(s):
        return alpha * (tau0 - s.tau) * s.h ** (2.0 - delta) + s.h**2

    dphi_tau_fd = _tau_stencil_rows(snapshot, tau_neighbors, phi_of)
    F_fd = None
    if dphi_tau_fd is not None:
        lap_fd = _lap_radial(arrs, grad_fd, hess_rad_fd)
        F_fd = dphi_tau_fd - lap_fd - grad_fd**2 + R

    margins = {
        "hess": np.minimum(hess_rad, hess_sph) - 1.0,
        "F_nonpos": -F,
    }
    return WeightEvaluation(
        tau=tau, labels=snapshot.labels, log_value=phi,
        time_derivative_closed=dphi_tau, grad_closed=grad,
        hess_rad_closed=hess_rad, hess_sph_closed=hess_sph, F_closed=F,
        grad_fd=grad_fd, hess_rad_fd=hess_rad_fd, hess_sph_fd=hess_sph_fd,
        time_derivative_fd=dphi_tau_fd, F_fd=F_fd, margins=margins)


def _H_poly(params: G2Params, tau, s):
    """Shell polynomial H(s, tau) collecting the curvature corrections of the
    conjugated heat quantity of the shell Gaussian, with its s- and
    tau-derivatives."""
    a, rho = params.a, params.rho
    p = tau + a
    H = a**2 / p**2 + 2.0 * a * tau * s / p**2 + tau**2 * s**2 / p**2 \
        - 2.0 * tau**2 * s**3 / (rho**2 * p)
    H_s = 2.0 * a * tau / p**2 + 2.0 * tau**2 * s / p**2 - 6.0 * tau**2 * s**2 / (rho**2 * p)
    H_ss = 2.0 * tau**2 / p**2 - 12.0 * tau**2 * s / (rho**2 * p)
    H_tau = (-2.0 * a**2 / p**3 + 2.0 * a * (a - tau) * s / p**3
             + 2.0 * a * tau * s**2 / p**3 - 2.0 * tau * (tau + 2.0 * a) * s**3 / (rho**2 * p**2))
    return H, H_s, H_ss, H_tau


def g2_evaluate(snapshot, params: G2Params, tau_neighbors=()):
    """Log value and derivatives of the shell Gaussian on one snapshot.

    Margins reported: tilde_lower / tilde_upper (sandwich of the conjugated
    heat quantity around -(n-1) rho / (2 h (tau+a)) with half-width 1/(8h)),
    tilde_nonpos (the sandwiched quantity is nonpositive), hess (smallest
    Hessian eigenvalue of the log weight above -1/(2(tau+a)) - 1/48) and
    ghat_lower / ghat_upper (comparison with the label-Gaussian within a
    factor of 2).
    """
    arrs = _snapshot_arrays(snapshot)
    if params.n != arrs["n"]:
        raise ParameterError("weight dimension does not match the snapshot")
    a, rho = params.a, params.rho
    tau, h, hp, R = arrs["tau"], arrs["h"], arrs["hp"], arrs["R"]
    n = arrs["n"]
    p = tau + a

    phi = -(n / 2.0) * math.log(p) - (h - rho) ** 2 / (4.0 * p)
    dphi_tau = (h - rho) ** 2 / (4.0 * p**2) - tau * R * (h - rho) / (h * p) - n / (2.0 * p)
    grad = -(h - rho) / (2.0 * p) * hp
    common = -1.0 / (2.0 * p) + rho / (2.0 * h * p)
    hess_rad = common + tau * (h - rho) * arrs["rc_rad"] / (h * p) - rho * hp**2 / (2.0 * h * p)
    hess_sph = common + tau * (h - rho) * arrs["rc_sph"] / (h * p)

    F_tilde = (-(n - 1) * rho / (2.0 * h * p) + a**2 * R / p**2
               + (2.0 * tau * rho * R / (h * p))
               * (a / p + rho * tau / (2.0 * h * p) - tau / h**2))

    u = arrs["u"]
    grad_fd = fd_derivative(u, phi, 1)
    hess_rad_fd = fd_derivative(u, phi, 2)
    hess_sph_fd = (arrs["a1"] / arrs["a"]) * grad_fd

    def phi_of(s):
        return -(n / 2.0) * math.log(s.tau + a) - (s.h - rho) ** 2 / (4.0 * (s.tau + a))

    dphi_tau_fd = _tau_stencil_rows(snapshot, tau_neighbors, phi_of)
    F_fd = None
    if dphi_tau_fd is not None:
        lap_fd = _lap_radial(arrs, grad_fd, hess_rad_fd)
        F_fd = dphi_tau_fd - lap_fd - grad_fd**2 + R

    center = -(n - 1) * rho / (2.0 * h * p)
    half = 1.0 / (8.0 * h)
    ghat_log_ratio = phi + (n / 2.0) * math.log(p) + (snapshot.r_c - rho) ** 2 / (4.0 * p)
    margins = {
        "tilde_lower": F_tilde - (center - half),
        "tilde_upper": (center + half) - F_tilde,
        "tilde_nonpos": -F_tilde,
        "hess": np.minimum(hess_rad, hess_sph) + 1.0 / (2.0 * p) + 1.0 / 48.0,
        "ghat_lower": ghat_log_ratio + math.log(2.0),
        "ghat_upper": math.log(2.0) - ghat_log_ratio,
    }
    return WeightEvaluation(
        tau=tau, labels=snapshot.labels, log_value=phi,
        time_derivative_closed=dphi_tau, grad_closed=grad,
        hess_rad_closed=hess_rad, hess_sph_closed=hess_sph, F_closed=F_tilde,
        grad_fd=grad_fd, hess_rad_fd=hess_rad_fd, hess_sph_fd=hess_sph_fd,
        time_derivative_fd=dphi_tau_fd, F_fd=F_fd, margins=margins)


def _heat_of_power(arrs, beta):
    """(d/dtau + Lap) h^beta = beta(n+beta-2) h^(beta-2)
    - 4 beta (beta-2) tau^2 h^(beta-4) R, closed."""
    n, tau, h, R = arrs["n"], arrs["tau"], arrs["h"], arrs["R"]
    return beta * (n + beta - 2.0) * h ** (beta - 2.0) \
        - 4.0 * beta * (beta - 2.0) * tau**2 * h ** (beta - 4.0) * R


def _heat_of_power_times_R(arrs, beta):
    """(d/dtau + Lap)(h^beta R) via the product rule; uses the conjugate
    evolution (d/dtau + Lap) R = -2 |Rc|^2 and the radial gradient of R."""
    h, R, hp = arrs["h"], arrs["R"], arrs["hp"]
    return (R * _heat_of_power(arrs, beta)
            - 2.0 * h**beta * arrs["rc_sq"]
            + 2.0 * beta * h ** (beta - 1.0) * hp * arrs["R_u"])


def f1_heat_closed(snapshot, params: G1Params):
    """(d/dtau + Lap) of the conjugated heat quantity of the rapid-growth
    weight, assembled termwise from the strength-power grouping
    F = B0 + alpha B1 + alpha^2 B2."""
    arrs = _snapshot_arrays(snapshot)
    alpha, tau0, delta = params.alpha, params.tau0, params.delta
    tau, h, R = arrs["tau"], arrs["h"], arrs["R"]
    n = arrs["n"]
    c1 = (2.0 - delta) * (tau0 - tau)

    heat_b0 = (-8.0 * n + 8.0 * R + 32.0 * tau * R
               - 2.0 * (8.0 * tau + 1.0) * arrs["rc_sq"] - 32.0 * tau**2 * arrs["rc_sq"])

    # B1 = -(1+4c1) h^(2-d) - c1 (n-d) h^(-d) + c1 (4t+16t^2) h^(-d) R
    #      - 4 d c1 t^2 h^(-2-d) R
    heat_b1 = 4.0 * (2.0 - delta) * h ** (2.0 - delta) \
        - (1.0 + 4.0 * c1) * _heat_of_power(arrs, 2.0 - delta)
    heat_b1 += (2.0 - delta) * (n - delta) * h ** (-delta) \
        - c1 * (n - delta) * _heat_of_power(arrs, -delta)
    c3 = c1 * (4.0 * tau + 16.0 * tau**2)
    c3p = -(2.0 - delta) * (4.0 * tau + 16.0 * tau**2) + c1 * (4.0 + 32.0 * tau)
    heat_b1 += c3p * h ** (-delta) * R + c3 * _heat_of_power_times_R(arrs, -delta)
    c4 = -4.0 * delta * c1 * tau**2
    c4p = 4.0 * delta * (2.0 - delta) * tau**2 - 8.0 * delta * c1 * tau
    heat_b1 += c4p * h ** (-2.0 - delta) * R + c4 * _heat_of_power_times_R(arrs, -2.0 - delta)

    # B2 = -c1^2 h^(2-2d) + 4 c1^2 t^2 h^(-2d) R
    heat_b2 = 2.0 * (2.0 - delta) * c1 * h ** (2.0 - 2.0 * delta) \
        - c1**2 * _heat_of_power(arrs, 2.0 - 2.0 * delta)
    c6 = 4.0 * c1**2 * tau**2
    c6p = 8.0 * c1 * tau * (c1 - (2.0 - delta) * tau)
    heat_b2 += c6p * h ** (-2.0 * delta) * R + c6 * _heat_of_power_times_R(arrs, -2.0 * delta)

    return heat_b0 + alpha * heat_b1 + alpha**2 * heat_b2


def f2_heat_closed(snapshot, params: G2Params):
    """(d/dtau + Lap) of the conjugated heat quantity of the shell Gaussian,
    via the shell polynomial H and the radial derivative identities of h."""
    arrs = _snapshot_arrays(snapshot)
    if params.n != arrs["n"]:
        raise ParameterError("weight dimension does not match the snapshot")
    a, rho = params.a, params.rho
    tau, h, R, hp2 = arrs["tau"], arrs["h"], arrs["R"], arrs["hp2"]
    n = arrs["n"]
    p = tau + a
    H, H_s, H_ss, H_tau = _H_poly(params, tau, rho / h)
    return ((n - 1) * rho / (2.0 * p**2 * h)
            + (n - 1) * rho / (2.0 * p * h**3) * ((n - 3.0) + 12.0 * tau**2 * R / h**2)
            - 2.0 * H * arrs["rc_sq"] + H_tau * R
            - rho * H_s * R / h**3 * ((n - 1.0) + 4.0 * tau**2 * R / h**2)
            - 2.0 * rho * H_s / h**2 * arrs["R_u"] * arrs["hp"]
            + rho * R / h**3 * (2.0 * H_s + rho * H_ss / h) * hp2)


def _sorted_family(snapshots):
    snaps = sorted(snapshots, key=lambda s: s.tau)
    labels = snaps[0].labels
    for s in snaps[1:]:
        if s.labels.shape != labels.shape or np.any(s.labels != labels):
            raise ParameterError("family snapshots must share the label grid")
    return snaps


def _family_heat_fd(snaps, per_point):
    """(d/dtau + Lap) of per_point by pure differencing: time stencils over
    the family and radial stencils within each snapshot.  Returns rows at
    interior times plus the matching snapshot indices."""
    taus = np.array([s.tau for s in snaps])
    vals = np.stack([per_point(s) for s in snaps])
    width = min(5, len(snaps))
    rows, idx = [], []
    for j in range(1, len(snaps) - 1):
        lo = min(max(0, j - width // 2), len(snaps) - width)
        wts = fornberg_weights(taus[lo:lo + width], float(taus[j]), 1)[..., 1]
        dtau = np.tensordot(wts, vals[lo:lo + width], axes=(0, 0))
        sn = snaps[j]
        u = sn.field.r
        v1 = fd_derivative(u, vals[j], 1)
        v2 = fd_derivative(u, vals[j], 2)
        lap = v2 + (sn.field.n - 1) * (sn.field.a1 / sn.field.a) * v1
        rows.append(dtau + lap)
        idx.append(j)
    return np.stack(rows), idx


def threshold_radius(labels, margin_min):
    """Smallest grid label beyond which the running margin stays nonnegative;
    inf when the margin is negative at the outer end (domain too small)."""
    labels = np.asarray(labels, dtype=float)
    margin_min = np.asarray(margin_min, dtype=float)
    ok_suffix = np.minimum.accumulate(margin_min[::-1])[::-1] >= 0.0
    if not ok_suffix[-1]:
        return math.inf
    first = int(np.argmax(ok_suffix))
    return float(labels[first])


@dataclass(frozen=True)
class BackheatReport:
    """Margin of (d/dtau + Lap) F over its required growth for the
    rapid-growth weight, with the radius beyond which it stays nonnegative."""

    threshold_radius: float
    margin_min: np.ndarray
    labels: np.ndarray
    taus: np.ndarray
    fd_agreement: float
    domain_too_small: bool


def check_f1_backheat(snapshots, params: G1Params) -> BackheatReport:
    """Check (d/dtau + Lap) F >= 3 alpha h^(2-delta)
    + alpha^2 (tau0 - tau) h^(2-2delta) on a snapshot family.

    The closed route goes through the strength-power grouping of F; a pure
    finite-difference route over the same family is reported alongside as a
    relative agreement figure at interior points.
    """
    snaps = _sorted_family(snapshots)
    if len(snaps) < 3:
        raise ParameterError("backheat check needs at least 3 snapshots")
    alpha, tau0, delta = params.alpha, params.tau0, params.delta
    labels = snaps[0].labels
    inner = slice(3, -3)

    margin_rows, taus = [], []
    for sn in snaps:
        heat = f1_heat_closed(sn, params)
        required = 3.0 * alpha * sn.h ** (2.0 - delta) \
            + alpha**2 * (tau0 - sn.tau) * sn.h ** (2.0 - 2.0 * delta)
        margin_rows.append(heat - required)
        taus.append(sn.tau)
    margin = np.stack(margin_rows)

    heat_fd, idx = _family_heat_fd(snaps, lambda s: _f1_rows(s, params))
    agree = 0.0
    for row, j in zip(heat_fd, idx):
        closed = f1_heat_closed(snaps[j], params)
        scale = np.abs(closed) + alpha * snaps[j].h ** (2.0 - delta)
        agree = max(agree, float(np.max(np.abs(row - closed)[inner] / scale[inner])))

    margin_min = margin[:, inner].min(axis=0)
    thr = threshold_radius(labels[inner], margin_min)
    return BackheatReport(threshold_radius=thr, margin_min=margin_min,
                          labels=labels[inner], taus=np.array(taus),
                          fd_agreement=agree, domain_too_small=not math.isfinite(thr))


def _f1_rows(snapshot, params: G1Params):
    return g1_evaluate(snapshot, params).F_closed


@dataclass(frozen=True)
class G2BoundsReport:
    """Hessian floor and backheat comparison for the shell Gaussian on the
    region beyond max(hessian threshold, gamma * rho)."""

    hess_threshold: float
    hess_margin_min: np.ndarray
    backheat_constant: float
    restriction_radius: float
    labels: np.ndarray
    taus: np.ndarray
    fd_agreement: float
    domain_too_small: bool


def check_g2_bounds(snapshots, params: G2Params) -> G2BoundsReport:
    """Hessian-floor margin of the shell Gaussian and the empirical constant
    in its backheat comparison (d/dtau + Lap) F >= (n-1) rho
    / (2 h (tau+a)^2) - N/(tau+a), restricted to labels beyond
    max(threshold, gamma * rho)."""
    snaps = _sorted_family(snapshots)
    if len(snaps) < 3:
        raise ParameterError("shell bounds check needs at least 3 snapshots")
    labels = snaps[0].labels
    inner = slice(3, -3)
    n, rho, a = params.n, params.rho, params.a

    hess_rows, taus = [], []
    for sn in snaps:
        ev = g2_evaluate(sn, params)
        hess_rows.append(ev.margins["hess"])
        taus.append(sn.tau)
    hess = np.stack(hess_rows)[:, inner]
    hess_min = hess.min(axis=0)
    thr = threshold_radius(labels[inner], hess_min)

    restrict = max(thr if math.isfinite(thr) else labels[inner][0],
                   params.gamma * rho)
    mask = labels[inner] >= restrict
    constant = math.nan
    agree = 0.0
    if np.any(mask):
        deficits = []
        for sn in snaps:
            p = sn.tau + a
            heat = f2_heat_closed(sn, params)
            lead = (n - 1) * rho / (2.0 * sn.h * p**2)
            deficits.append(((lead - heat) * p)[inner][mask])
        constant = max(0.0, float(np.max(np.stack(deficits))))

        heat_fd, idx = _family_heat_fd(snaps, lambda s: g2_evaluate(s, params).F_closed)
        for row, j in zip(heat_fd, idx):
            closed = f2_heat_closed(snaps[j], params)
            p = snaps[j].tau + a
            scale = np.abs(closed) + (n - 1) * rho / (2.0 * snaps[j].h * p**2) + 1.0 / p
            agree = max(agree, float(np.max(np.abs(row - closed)[inner] / scale[inner])))

    return G2BoundsReport(hess_threshold=thr, hess_margin_min=hess_min,
                          backheat_constant=constant, restriction_radius=restrict,
                          labels=labels[inner], taus=np.array(taus),
                          fd_agreement=agree,
                          domain_too_small=not math.isfinite(thr))
