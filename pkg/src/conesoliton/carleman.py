"""Weighted space-time inequalities on radial test sections.

Sections are scalar radial functions Z(label, tau) = bump(label) * ramp(tau)
(or explicit grids) over a snapshot family; norms are L^2 with the warped
volume element a^(n-1) |S^(n-1)| du and the family's time levels as the
quadrature grid.  All norms are computed in log space with a
piecewise-exponential rule in both directions because the weights span
thousands of e-foldings.

Four inequality tests are provided: two with the rapid-growth weight (a
space-time bound against the heat operator plus a terminal-slice term, and a
time-derivative-only bound) and two with the time-factored shell Gaussian
(a gradient bound and a time-derivative bound with an explicit sup-norm
remainder).  Each returns both sides in log form together with the constant
that would make them equal, so batteries of sections can record empirical
constants and thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import gamma as gamma_fn

from .errors import ParameterError, SupportError
from .numutil import (fd_derivative, fornberg_weights, log_expfit_integral,
                      logsumexp, smoothbump, smoothstep, weighted_l2_log)
from .reporting import dump_csv, dump_json
from .weights import (G1Params, G2Params, check_f1_backheat, check_g2_bounds,
                      g1_evaluate, g2_evaluate, sigma_a, threshold_radius)

__all__ = [
    "TestSection",
    "GridSection",
    "CarlemanTestResult",
    "CutoffResult",
    "BatteryReport",
    "Alpha0Report",
    "sphere_area",
    "make_bump_section",
    "make_standard_battery",
    "section_arrays",
    "caloric_section",
    "build_cutoff",
    "carleman_pde_test",
    "carleman_ode_test",
    "carleman_decay_pde_test",
    "carleman_decay_ode_test",
    "run_battery",
    "alpha0_scan",
    "threshold_scan_entry",
    "scan_thresholds",
    "save_scan_report",
]


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere."""
    return 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)


@dataclass(frozen=True)
class TestSection:
    """Separable radial test section bump(label) * ramp(tau).

    The bump is compactly supported on [bump_lo, bump_hi]; the ramp and its
    rate must vanish at tau = 0 so every weighted integrand has an exact
    zero row at the initial time.
    """

    name: str
    bump_lo: float
    bump_hi: float
    ramp: object
    ramp_rate: object

    def __post_init__(self):
        if not self.bump_hi > self.bump_lo > 0.0:
            raise ParameterError("bump support must be a positive interval")
        if abs(float(self.ramp(0.0))) > 1e-12 or abs(float(self.ramp_rate(0.0))) > 1e-12:
            raise SupportError("ramp and its rate must vanish at the initial time")

    def bump(self, labels: np.ndarray) -> np.ndarray:
        center = 0.5 * (self.bump_lo + self.bump_hi)
        width = 0.5 * (self.bump_hi - self.bump_lo)
        return smoothbump(labels, center, width)


@dataclass(frozen=True)
class GridSection:
    """Radial test section given as explicit rows on a family grid, with its
    time-derivative rows; heat-operator rows are optional (None means the
    norms fall back to the finite-difference route dZ/dtau + Lap Z)."""

    name: str
    taus: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    time_derivative: np.ndarray
    heat: np.ndarray | None
    bump_lo: float
    bump_hi: float

    def __post_init__(self):
        if np.max(np.abs(self.values[0])) > 1e-12:
            raise SupportError("section must vanish at the initial time")


def _step_ramp(rise: float):
    def ramp(tau):
        return smoothstep(np.asarray(tau, dtype=float) / rise)

    def rate(tau):
        t = np.clip(np.asarray(tau, dtype=float) / rise, 0.0, 1.0)
        return 30.0 * t**2 * (t - 1.0) ** 2 / rise

    return ramp, rate


def _power_ramp(tau0: float):
    def ramp(tau):
        return np.clip(np.asarray(tau, dtype=float) / tau0, 0.0, 1.0) ** 2

    def rate(tau):
        t = np.asarray(tau, dtype=float)
        return np.where(t < tau0, 2.0 * t / tau0**2, 0.0)

    return ramp, rate


def make_bump_section(name, bump_lo, bump_hi, tau0, ramp_kind="rise_full") -> TestSection:
    if ramp_kind == "rise_quarter":
        ramp, rate = _step_ramp(tau0 / 4.0)
    elif ramp_kind == "rise_full":
        ramp, rate = _step_ramp(tau0)
    elif ramp_kind == "quadratic":
        ramp, rate = _power_ramp(tau0)
    else:
        raise ParameterError(f"unknown ramp kind {ramp_kind!r}")
    return TestSection(name=name, bump_lo=bump_lo, bump_hi=bump_hi,
                       ramp=ramp, ramp_rate=rate)


def make_standard_battery(support_lo, support_hi, tau0) -> list:
    """Twelve bump/ramp combinations spanning the support window: four
    log-spaced bumps crossed with three ramp profiles."""
    if not support_hi > 1.5 * support_lo:
        raise ParameterError("support window too narrow for the bump battery")
    edges = np.geomspace(support_lo, support_hi, 6)
    spans = [(edges[0], edges[2]), (edges[1], edges[3]),
             (edges[2], edges[4]), (edges[0], edges[5])]
    sections = []
    for i, (lo, hi) in enumerate(spans):
        for kind in ("rise_quarter", "rise_full", "quadratic"):
            sections.append(make_bump_section(
                f"bump{i}_{kind}", float(lo), float(hi), tau0, ramp_kind=kind))
    return sections


def _sorted_ascending(snapshots):
    snaps = sorted(snapshots, key=lambda s: s.tau)
    labels = snaps[0].labels
    for s in snaps[1:]:
        if s.labels.shape != labels.shape or np.any(s.labels != labels):
            raise ParameterError("family snapshots must share the label grid")
    return snaps


def section_arrays(snapshots, section):
    """Rows of Z, its exact time derivative, and FD radial derivatives on an
    ascending family; returns a dict of (ntau, nlabels) arrays plus taus."""
    snaps = _sorted_ascending(snapshots)
    labels = snaps[0].labels
    taus = np.array([s.tau for s in snaps])
    if isinstance(section, GridSection):
        if section.values.shape != (len(snaps), labels.size) or \
                np.any(section.labels != labels) or np.any(section.taus != taus):
            raise ParameterError("grid section does not match the family grid")
        z = section.values
        dz_tau = section.time_derivative
        heat_exact = section.heat
    else:
        bump = section.bump(labels)
        z = np.stack([bump * float(section.ramp(t)) for t in taus])
        dz_tau = np.stack([bump * float(section.ramp_rate(t)) for t in taus])
        heat_exact = None
    grad = np.empty_like(z)
    lap = np.empty_like(z)
    for k, sn in enumerate(snaps):
        u = sn.field.r
        g1 = fd_derivative(u, z[k], 1)
        g2 = fd_derivative(u, z[k], 2)
        grad[k] = g1
        lap[k] = g2 + (sn.field.n - 1) * (sn.field.a1 / sn.field.a) * g1
    heat = heat_exact if heat_exact is not None else dz_tau + lap
    return {"snaps": snaps, "taus": taus, "labels": labels, "z": z,
            "dz_tau": dz_tau, "grad": grad, "lap": lap, "heat": heat}


def _check_support(section, labels, support_floor):
    margin = 4  # radial stencils need clean zeros at the grid edges
    if section.bump_lo < labels[margin] or section.bump_hi > labels[-margin - 1]:
        raise SupportError(
            f"section support [{section.bump_lo:g}, {section.bump_hi:g}] is not "
            f"compactly contained in the label grid "
            f"[{labels[0]:g}, {labels[-1]:g}]")
    if support_floor is not None and section.bump_lo < support_floor:
        raise SupportError(
            f"section support starts at {section.bump_lo:g}, below the "
            f"required floor {support_floor:g}")


def _log_measure(sn):
    return (sn.field.n - 1) * np.log(sn.field.a) + math.log(sphere_area(sn.field.n))


def _log_spacetime_norm_sq(arrs, values, log_weight_rows):
    """log of the squared space-time L^2 norm of `values` against the weight
    rows; a zero row at tau = 0 is prepended when the family starts later
    (sections vanish to second order there)."""
    snaps, taus = arrs["snaps"], arrs["taus"]
    per_tau = np.array([
        weighted_l2_log(values[k], log_weight_rows[k], _log_measure(sn), sn.field.r)
        for k, sn in enumerate(snaps)])
    if taus[0] > 0.0:
        taus = np.concatenate([[0.0], taus])
        per_tau = np.concatenate([[-np.inf], per_tau])
    return float(log_expfit_integral(per_tau, taus))


def _log_slice_norm_sq(sn, values_row, log_weight_row):
    return float(weighted_l2_log(values_row, log_weight_row, _log_measure(sn), sn.field.r))


def _log1mexp(x: float) -> float:
    """log(1 - exp(-x)) for x > 0."""
    if x <= 0.0:
        return -math.inf
    return math.log(-math.expm1(-x)) if x < 0.693 else math.log1p(-math.exp(-x))


@dataclass(frozen=True)
class CarlemanTestResult:
    """Both sides of a weighted inequality in log form.

    `constant` is exp(log_lhs - log_rhs): the factor that would make the two
    sides equal, so `constant <= 1` means the inequality holds as stated and
    battery runs can record the largest constant seen.  `margin` is the log
    of the ratio rhs/lhs; it saturates in alpha for the rapid-growth weight
    because both sides inflate together, so monotone strengthening of the
    estimate is tracked by `log_excess` = log(rhs - lhs), the absolute slack.
    """

    kind: str
    section: str
    alpha: float
    log_lhs: float
    log_rhs: float
    parts: dict = dc_field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.log_rhs - self.log_lhs

    @property
    def constant(self) -> float:
        return math.exp(self.log_lhs - self.log_rhs)

    @property
    def log_excess(self) -> float:
        return self.log_rhs + _log1mexp(self.margin)

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


def _g1_log_rows(arrs, params: G1Params):
    alpha, tau0, delta = params.alpha, params.tau0, params.delta
    return np.stack([alpha * (tau0 - sn.tau) * sn.h ** (2.0 - delta) + sn.h**2
                     for sn in arrs["snaps"]])


def carleman_pde_test(snapshots, section, params: G1Params,
                      support_floor=None) -> CarlemanTestResult:
    """Space-time bound with the rapid-growth weight:
    alpha ||Z W^(1/2)||^2 + ||grad Z W^(1/2)||^2 against
    (1/2) ||(d_tau + Lap) Z W^(1/2)||^2 plus the terminal gradient slice."""
    arrs = section_arrays(snapshots, section)
    _check_support(section, arrs["labels"], support_floor)
    if abs(arrs["taus"][-1] - params.tau0) > 1e-9:
        raise ParameterError("family must end at the terminal time of the weight")
    logw = _g1_log_rows(arrs, params)
    log_z2 = _log_spacetime_norm_sq(arrs, arrs["z"], logw)
    log_grad2 = _log_spacetime_norm_sq(arrs, arrs["grad"], logw)
    log_heat2 = _log_spacetime_norm_sq(arrs, arrs["heat"], logw)
    log_slice = _log_slice_norm_sq(arrs["snaps"][-1], arrs["grad"][-1], logw[-1])
    log_lhs = logsumexp(np.array([math.log(params.alpha) + log_z2, log_grad2]))
    log_rhs = logsumexp(np.array([math.log(0.5) + log_heat2, log_slice]))
    return CarlemanTestResult(
        kind="pde_growth", section=section.name, alpha=params.alpha,
        log_lhs=float(log_lhs), log_rhs=float(log_rhs),
        parts={"log_z_sq": log_z2, "log_grad_sq": log_grad2,
               "log_heat_sq": log_heat2, "log_terminal_slice": log_slice})


def carleman_ode_test(snapshots, section, params: G1Params,
                      support_floor=None) -> CarlemanTestResult:
    """Time-derivative bound with the rapid-growth weight:
    alpha ||Z W^(1/2)||^2 against 2 ||d_tau Z W^(1/2)||^2."""
    arrs = section_arrays(snapshots, section)
    _check_support(section, arrs["labels"], support_floor)
    if abs(arrs["taus"][-1] - params.tau0) > 1e-9:
        raise ParameterError("family must end at the terminal time of the weight")
    logw = _g1_log_rows(arrs, params)
    log_z2 = _log_spacetime_norm_sq(arrs, arrs["z"], logw)
    log_dt2 = _log_spacetime_norm_sq(arrs, arrs["dz_tau"], logw)
    return CarlemanTestResult(
        kind="ode_growth", section=section.name, alpha=params.alpha,
        log_lhs=float(math.log(params.alpha) + log_z2),
        log_rhs=float(math.log(2.0) + log_dt2),
        parts={"log_z_sq": log_z2, "log_dtau_z_sq": log_dt2})


def _ghat_log_rows(arrs, params: G2Params):
    rows = []
    for sn in arrs["snaps"]:
        rows.append(-(sn.r_c - params.rho) ** 2 / (4.0 * (sn.tau + params.a)))
    return np.stack(rows)


def _sigma_log(taus, a):
    return np.log(sigma_a(taus, a).value)


def carleman_decay_pde_test(snapshots, section, params: G2Params, alpha,
                            support_floor=None) -> CarlemanTestResult:
    """Gradient bound with the shell Gaussian and time factor:
    sqrt(alpha) ||s^(-a-1/2) Z W^(1/2)|| + ||s^(-a) grad Z W^(1/2)||
    against ||s^(-a) (d_tau + Lap) Z W^(1/2)||, norms unsquared."""
    if not alpha > 0.0:
        raise ParameterError("weight exponent must be positive")
    arrs = section_arrays(snapshots, section)
    floor = params.gamma * params.rho
    if support_floor is not None:
        floor = max(floor, support_floor)
    _check_support(section, arrs["labels"], floor)
    logw = _ghat_log_rows(arrs, params)
    logs = _sigma_log(arrs["taus"], params.a)
    w_z = logw + (-2.0 * alpha - 1.0) * logs[:, None]
    w_d = logw + (-2.0 * alpha) * logs[:, None]
    log_z2 = _log_spacetime_norm_sq(arrs, arrs["z"], w_z)
    log_grad2 = _log_spacetime_norm_sq(arrs, arrs["grad"], w_d)
    log_heat2 = _log_spacetime_norm_sq(arrs, arrs["heat"], w_d)
    log_lhs = logsumexp(np.array([0.5 * math.log(alpha) + 0.5 * log_z2,
                                  0.5 * log_grad2]))
    return CarlemanTestResult(
        kind="pde_decay", section=section.name, alpha=float(alpha),
        log_lhs=float(log_lhs), log_rhs=float(0.5 * log_heat2),
        parts={"log_z_sq": log_z2, "log_grad_sq": log_grad2,
               "log_heat_sq": log_heat2})


def carleman_decay_ode_test(snapshots, section, params: G2Params, alpha,
                            tau0, support_floor=None) -> CarlemanTestResult:
    """Time-derivative bound with the shell Gaussian, including the sup-norm
    remainder a^(-1/2) (rho + sqrt(alpha))^(n/2) (a e^(1/8))^(-alpha) ||Z||."""
    if not alpha > 0.0:
        raise ParameterError("weight exponent must be positive")
    if not 0.0 < tau0 <= 0.25:
        raise ParameterError(f"terminal time must lie in (0, 1/4], got {tau0}")
    arrs = section_arrays(snapshots, section)
    if arrs["taus"][-1] > tau0 + 1e-9:
        raise ParameterError("family extends past the terminal time")
    floor = params.gamma * params.rho
    if support_floor is not None:
        floor = max(floor, support_floor)
    _check_support(section, arrs["labels"], floor)
    logw = _ghat_log_rows(arrs, params)
    logs = _sigma_log(arrs["taus"], params.a)
    log_z2 = _log_spacetime_norm_sq(arrs, arrs["z"], logw + (-2.0 * alpha - 1.0) * logs[:, None])
    log_dt2 = _log_spacetime_norm_sq(arrs, arrs["dz_tau"], logw + (-2.0 * alpha) * logs[:, None])
    sup_z = float(np.max(np.abs(arrs["z"])))
    a, rho, n = params.a, params.rho, params.n
    log_remainder = (-0.5 * math.log(a) + (n / 2.0) * math.log(rho + math.sqrt(alpha))
                     - alpha * (math.log(a) + 0.125) + math.log(max(sup_z, 1e-300)))
    log_rhs = logsumexp(np.array([-math.log(alpha) + 0.5 * log_dt2, log_remainder]))
    return CarlemanTestResult(
        kind="ode_decay", section=section.name, alpha=float(alpha),
        log_lhs=float(0.5 * log_z2), log_rhs=float(log_rhs),
        parts={"log_z_sq": log_z2, "log_dtau_z_sq": log_dt2,
               "log_remainder": log_remainder,
               "log_dtau_term": -math.log(alpha) + 0.5 * log_dt2})


def caloric_section(snapshots, bump_lo, bump_hi, march_span=0.02,
                    rise_fraction=0.5, cap_pad=None, name="caloric") -> GridSection:
    """Nearly heat-caloric section: a terminal bump transported down in time
    by the (d_tau + Lap) u = 0 flow (Crank-Nicolson steps on the family's
    time levels, stable in decreasing tau), ramped on inside the marched
    window and capped by a fixed spatial bump.

    The march covers only the top `march_span` of the time range: the
    transported profile's tails decay like exp(-x^2 / (4 span)) beyond the
    bump, and that rate must beat the quadratic growth of the rapid-growth
    log weight for the cap truncation to stay numerically invisible.  Heat
    rows are left to the finite-difference route so the cap commutator is
    accounted for rather than assumed away.
    """
    snaps = _sorted_ascending(snapshots)
    labels = snaps[0].labels
    taus = np.array([s.tau for s in snaps])
    tau0 = taus[-1]
    start_idx = int(np.searchsorted(taus, tau0 - march_span))
    if start_idx >= len(snaps) - 1:
        raise ParameterError("march window contains no family step")
    start = taus[start_idx]
    step, step_rate = _step_ramp(rise_fraction * (tau0 - start))
    ramp = lambda t: step(np.asarray(t, dtype=float) - start)
    rate = lambda t: step_rate(np.asarray(t, dtype=float) - start)

    def lap_matrix(sn):
        u = sn.field.r
        m = u.size
        band = np.zeros((3, m))
        coef = (sn.field.n - 1) * (sn.field.a1 / sn.field.a)
        for i in range(1, m - 1):
            nodes = u[i - 1:i + 2]
            w = fornberg_weights(nodes, float(u[i]), 2)
            row = w[..., 2] + coef[i] * w[..., 1]
            band[0, i + 1] = row[2]
            band[1, i] = row[1]
            band[2, i - 1] = row[0]
        band[1, 0] = band[1, -1] = 0.0  # pinned ends: compact support
        return band

    center = 0.5 * (bump_lo + bump_hi)
    width = 0.5 * (bump_hi - bump_lo)
    prof = np.empty((len(snaps), labels.size))
    prof[-1] = smoothbump(labels, center, width)
    for k in range(len(snaps) - 1, start_idx, -1):
        dt = taus[k] - taus[k - 1]
        b_hi = lap_matrix(snaps[k])
        b_lo = lap_matrix(snaps[k - 1])
        rhs = prof[k] + 0.5 * dt * _band_mul(b_hi, prof[k])
        lhs_band = -0.5 * dt * b_lo
        lhs_band[1] += 1.0
        prof[k - 1] = solve_banded((1, 1), lhs_band, rhs)
    prof[:start_idx] = prof[start_idx]  # multiplied by ramp = 0 below start

    if cap_pad is None:
        cap_pad = 8.0 * math.sqrt(march_span)
    cap = smoothbump(labels, center, width + cap_pad)

    lap_rows = np.empty_like(prof)
    for k, sn in enumerate(snaps):
        g1 = fd_derivative(sn.field.r, prof[k], 1)
        g2 = fd_derivative(sn.field.r, prof[k], 2)
        lap_rows[k] = g2 + (sn.field.n - 1) * (sn.field.a1 / sn.field.a) * g1
    ramps = np.array([float(ramp(t)) for t in taus])[:, None]
    rates = np.array([float(rate(t)) for t in taus])[:, None]
    values = ramps * cap * prof
    # d_tau prof = -Lap prof along the march
    dvalues = rates * cap * prof - ramps * cap * lap_rows
    return GridSection(name=name, taus=taus, labels=labels, values=values,
                       time_derivative=dvalues, heat=None,
                       bump_lo=float(bump_lo - cap_pad),
                       bump_hi=float(bump_hi + cap_pad))


def _band_mul(band, v):
    out = band[1] * v
    out[:-1] += band[0, 1:] * v[1:]
    out[1:] += band[2, :-1] * v[:-1]
    return out


@dataclass(frozen=True)
class CutoffResult:
    """Radial cutoff with plateau on (rho/3, 2 xi), support in
    (rho/6, 3 xi), and the measured constant in the derivative bound
    |grad psi| + |Lap psi| <= N / rho."""

    psi: np.ndarray
    grad: np.ndarray
    laplacian: np.ndarray
    bound_constant: float
    labels: np.ndarray


def build_cutoff(rho, xi, snapshot) -> CutoffResult:
    labels = snapshot.labels
    inner = float(labels[0])
    if not (xi > 4.0 * rho and 4.0 * rho > 48.0 * inner):
        raise ParameterError(
            f"cutoff geometry needs xi > 4 rho > 48 * inner radius, got "
            f"xi={xi:g}, rho={rho:g}, inner={inner:g}")
    rc = snapshot.r_c
    up = smoothstep((rc / rho - 1.0 / 6.0) / (1.0 / 3.0 - 1.0 / 6.0))
    down = smoothstep((rc / xi - 2.0) / (3.0 - 2.0))
    psi = up - down
    u = snapshot.field.r
    g1 = fd_derivative(u, psi, 1)
    g2 = fd_derivative(u, psi, 2)
    lap = g2 + (snapshot.field.n - 1) * (snapshot.field.a1 / snapshot.field.a) * g1
    bound = float(np.max((np.abs(g1) + np.abs(lap))) * rho)
    return CutoffResult(psi=psi, grad=g1, laplacian=lap,
                        bound_constant=bound, labels=labels)


@dataclass(frozen=True)
class BatteryReport:
    """Results of one inequality over a battery of sections: the worst
    constant (smallest margin) and every individual result."""

    kind: str
    alpha: float
    worst_constant: float
    min_margin: float
    results: tuple

    @property
    def all_passed(self) -> bool:
        return self.min_margin >= 0.0


def run_battery(snapshots, sections, test, **kwargs) -> BatteryReport:
    results = tuple(test(snapshots, sec, **kwargs) for sec in sections)
    margins = [r.margin for r in results]
    consts = [r.constant for r in results]
    return BatteryReport(kind=results[0].kind, alpha=results[0].alpha,
                         worst_constant=max(consts), min_margin=min(margins),
                         results=results)


@dataclass(frozen=True)
class Alpha0Report:
    """Exponent scan of a battery: margins[i, j] is the log ratio margin of
    section j at alphas[i], excess[i, j] the log of the absolute slack.

    alpha0 is the smallest scanned exponent from which every section's
    margin stays nonnegative for all larger scanned exponents.
    """

    alpha0: float
    alphas: np.ndarray
    margins: np.ndarray
    excess: np.ndarray
    worst_constant: float

    @property
    def found(self) -> bool:
        return math.isfinite(self.alpha0)

    @property
    def min_margins(self) -> np.ndarray:
        return self.margins.min(axis=1)

    @property
    def excess_increasing(self) -> bool:
        """True when every section's absolute slack grows strictly with the
        exponent across the whole scan."""
        return bool(np.all(np.diff(self.excess, axis=0) > 0.0))


def alpha0_scan(snapshots, sections, alphas, make_test) -> Alpha0Report:
    """make_test(alpha) must return a callable (snapshots, section) ->
    CarlemanTestResult; alphas must be increasing."""
    alphas = np.asarray(alphas, dtype=float)
    if np.any(np.diff(alphas) <= 0):
        raise ParameterError("exponent grid must be strictly increasing")
    margins = np.empty((alphas.size, len(sections)))
    excess = np.empty_like(margins)
    worst = -math.inf
    for i, alpha in enumerate(alphas):
        test = make_test(float(alpha))
        for j, sec in enumerate(sections):
            res = test(snapshots, sec)
            margins[i, j] = res.margin
            excess[i, j] = res.log_excess
            worst = max(worst, res.constant)
    ok = np.minimum.accumulate(margins.min(axis=1)[::-1])[::-1] >= 0.0
    alpha0 = float(alphas[np.argmax(ok)]) if ok.any() and ok[-1] else math.inf
    return Alpha0Report(alpha0=alpha0, alphas=alphas, margins=margins,
                        excess=excess, worst_constant=worst)


def _beyond(labels, margin_rows, thr):
    if not math.isfinite(thr):
        return math.nan
    return float(np.min(margin_rows[labels >= thr]))


def _growth_side(snaps, labels, inner, g1_params: G1Params) -> tuple:
    """(thresholds, margins) of the two rapid-growth inequalities."""
    g1_min = None
    for sn in snaps:
        ev = g1_evaluate(sn, g1_params)
        m = np.minimum(ev.margins["hess"], ev.margins["F_nonpos"])
        g1_min = m if g1_min is None else np.minimum(g1_min, m)
    bh = check_f1_backheat(snaps, g1_params)
    thr = threshold_radius(labels[inner], g1_min[inner])
    return ({"growth_hess_and_F": thr, "growth_backheat": bh.threshold_radius},
            {"growth_hess_and_F": _beyond(labels[inner], g1_min[inner], thr),
             "growth_backheat": _beyond(bh.labels, bh.margin_min,
                                        bh.threshold_radius)})


def _shell_side(snaps, labels, inner, g2_params: G2Params) -> tuple:
    """(thresholds, margins) of the three shell-Gaussian inequalities."""
    tilde_min = None
    for sn in snaps:
        ev = g2_evaluate(sn, g2_params)
        m = np.minimum.reduce([ev.margins["tilde_lower"], ev.margins["tilde_upper"],
                               ev.margins["tilde_nonpos"]])
        tilde_min = m if tilde_min is None else np.minimum(tilde_min, m)
    gb = check_g2_bounds(snaps, g2_params)
    thr = threshold_radius(labels[inner], tilde_min[inner])
    return ({"shell_sandwich": thr, "shell_hess": gb.hess_threshold,
             "shell_backheat": gb.restriction_radius},
            {"shell_sandwich": _beyond(labels[inner], tilde_min[inner], thr),
             "shell_hess": _beyond(gb.labels, gb.hess_margin_min,
                                   gb.hess_threshold),
             "shell_backheat_constant": gb.backheat_constant})


def _scan_params_dict(g1_params: G1Params, g2_params: G2Params) -> dict:
    return {"alpha": g1_params.alpha, "tau0": g1_params.tau0,
            "delta": g1_params.delta, "a": g2_params.a, "rho": g2_params.rho,
            "gamma": g2_params.gamma, "n": g2_params.n}


def threshold_scan_entry(snapshots, g1_params: G1Params, g2_params: G2Params) -> dict:
    """Threshold radii and beyond-threshold margins of the five weight
    inequalities on one family, in scan-report form."""
    snaps = _sorted_ascending(snapshots)
    labels = snaps[0].labels
    inner = slice(3, -3)
    thr1, mar1 = _growth_side(snaps, labels, inner, g1_params)
    thr2, mar2 = _shell_side(snaps, labels, inner, g2_params)
    return {"params": _scan_params_dict(g1_params, g2_params),
            "threshold_radius": {**thr1, **thr2},
            "alpha0": None,
            "margins": {**mar1, **mar2}}


def scan_thresholds(snapshots, g1_grid, g2_grid) -> list:
    """Cross product of growth-weight and shell-weight parameter grids.

    The two weight families share no parameters, so each side is evaluated
    once per its own grid and the cross entries are assembled from the
    cached halves.
    """
    snaps = _sorted_ascending(snapshots)
    labels = snaps[0].labels
    inner = slice(3, -3)
    growth = [_growth_side(snaps, labels, inner, p1) for p1 in g1_grid]
    shell = [_shell_side(snaps, labels, inner, p2) for p2 in g2_grid]
    entries = []
    for p1, (thr1, mar1) in zip(g1_grid, growth):
        for p2, (thr2, mar2) in zip(g2_grid, shell):
            entries.append({"params": _scan_params_dict(p1, p2),
                            "threshold_radius": {**thr1, **thr2},
                            "alpha0": None,
                            "margins": {**mar1, **mar2}})
    return entries


def save_scan_report(path_json, path_csv, entries) -> None:
    dump_json(path_json, entries)
    keys = sorted({k for e in entries for k in e["margins"]})
    pkeys = sorted({k for e in entries for k in e["params"]})
    header = pkeys + ["alpha0"] + keys
    rows = []
    for e in entries:
        row = [e["params"].get(k, "") for k in pkeys]
        row.append(e["alpha0"] if e["alpha0"] is not None else "")
        row.extend(e["margins"].get(k, math.nan) for k in keys)
        rows.append(row)
    dump_csv(path_csv, header, rows)
