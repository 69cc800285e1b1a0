"""Rotationally symmetric shrinking-soliton profiles by backward shooting.

The metric dr^2 + a(r)^2 g_{S^{n-1}} solves the shrinker equation iff
w(s) = (a')^2, viewed as a function of s = a^2, satisfies

    4 s^2 w w'' - [2 s w' + s - 2(n-2)] s w' + 2(n-2)(1-w) w = 0.

A profile asymptotic to the aperture-alpha cone is obtained by integrating
backward from a far anchor S0 with w(S0) = alpha, w'(S0) = 0 and letting S0
grow until the values on a fixed window stop moving.  The potential slope
f'(s) is algebraic in (s, w, w'), so f comes along by quadrature.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .errors import (ConvergenceError, FitError, GaugeError, InvalidFieldError,
                     ParameterError, SingularInputError)
from .geometry import WarpedMetricField, field_from_gauge
from .numutil import fd_derivative, loglog_slope

__all__ = [
    "SolitonProfile", "ExpansionFit", "PotentialGauge",
    "metric_soliton_rhs", "potential_slope", "shoot_profile",
    "construct_soliton", "normalize_potential", "fit_asymptotics",
    "ode_residual", "to_radial_chart", "gauge_by_potential",
    "save_profile", "load_profile",
]


def _check_inputs(s, w, n):
    if int(n) < 3:
        raise ParameterError("dimension n must be >= 3")
    if np.any(np.asarray(s) <= 0) or np.any(np.asarray(w) <= 0):
        raise SingularInputError("s and w must be positive")


def metric_soliton_rhs(s, w, w1, n):
    """Second derivative w'' isolated from the profile equation."""
    _check_inputs(s, w, n)
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    num = (2.0 * s * w1 + s - 2.0 * (n - 2)) * s * w1 - 2.0 * (n - 2) * (1.0 - w) * w
    return num / (4.0 * s * s * w)


def potential_slope(s, w, w1, n):
    """Potential derivative f'(s), algebraic in the profile."""
    _check_inputs(s, w, n)
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    return (s - 2.0 * ((n - 2) - s * w1 - (n - 2) * w)) / (4.0 * s * w)


def scalar_curvature_s(s, w, w1, n):
    """Scalar curvature in profile variables: (n-1)[-2w' + (n-2)(1-w)/s]."""
    s = np.asarray(s, dtype=float)
    return (n - 1) * (-2.0 * np.asarray(w1, dtype=float)
                      + (n - 2) * (1.0 - np.asarray(w, dtype=float)) / s)


@dataclass(frozen=True)
class ExpansionFit:
    """Tail fit c0 + c1/s with the decay order of what is left over."""

    c0: float
    c1: float
    window: tuple
    residual_order: float
    residual_order_ci: tuple
    quantity: str  # "w" or "f_deviation"


@dataclass(frozen=True)
class SolitonProfile:
    """Backward-shot profile on a log-spaced grid of s = a^2.

    w must stay inside the barrier band [alpha/2, 2*alpha] and be monotone
    (nondecreasing for alpha < 1, nonincreasing for alpha > 1); construction
    trims the grid at the first band exit, so these hold on every instance.
    """

    n: int
    alpha: float
    s: np.ndarray
    w: np.ndarray
    w1: np.ndarray
    S0: float
    s_min: float
    tol: float
    f: np.ndarray | None = None
    f1: np.ndarray | None = None
    inner_boundary: float | None = None
    halted: str | None = None
    normalization_residual: float | None = None
    cauchy_history: tuple = ()  # sup window differences of the doubling loop
    # anchor-based antiderivatives of f1 and of 1/(2 sqrt(s w)), carried at
    # integrator accuracy; rebuilt by quadrature when absent (file ingestion)
    f_from_anchor: np.ndarray | None = dc_field(default=None, repr=False)
    r_from_anchor: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        for name in ("s", "w", "w1", "f", "f1", "f_from_anchor", "r_from_anchor"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float))
        if self.n < 3:
            raise ParameterError("dimension n must be >= 3")
        if not self.alpha > 0:
            raise ParameterError("aperture alpha must be positive")
        if self.s.ndim != 1 or self.s.size < 8:
            raise InvalidFieldError("profile grid must be 1-d with >= 8 samples")
        if np.any(np.diff(self.s) <= 0):
            raise InvalidFieldError("s grid must be strictly increasing")
        for name in ("w", "w1", "f", "f1"):
            val = getattr(self, name)
            if val is not None and val.shape != self.s.shape:
                raise InvalidFieldError(f"{name} grid length mismatch")
        if np.any(self.w <= 0):
            raise InvalidFieldError("w must be positive")
        slack = max(1e-10, 50.0 * self.tol) * max(1.0, self.alpha)
        if abs(self.w[-1] - self.alpha) > slack or abs(self.w1[-1]) > slack:
            raise InvalidFieldError("anchor conditions w(S0)=alpha, w'(S0)=0 violated")
        band_lo, band_hi = 0.5 * self.alpha, 2.0 * self.alpha
        if np.any(self.w < band_lo - slack) or np.any(self.w > band_hi + slack):
            raise InvalidFieldError("profile exits the barrier band [alpha/2, 2 alpha]")
        dw = np.diff(self.w)
        if self.alpha < 1.0 and np.any(dw < -slack):
            raise InvalidFieldError("profile must be nondecreasing for alpha < 1")
        if self.alpha > 1.0 and np.any(dw > slack):
            raise InvalidFieldError("profile must be nonincreasing for alpha > 1")

    @property
    def has_potential(self) -> bool:
        return self.f is not None and self.f1 is not None

    def window_values(self, s_points: np.ndarray) -> np.ndarray:
        """w at the given s, via monotone cubic interpolation of the grid."""
        from scipy.interpolate import PchipInterpolator

        s_points = np.asarray(s_points, dtype=float)
        if s_points.min() < self.s[0] or s_points.max() > self.s[-1]:
            raise ParameterError("requested points outside the profile grid")
        return PchipInterpolator(self.s, self.w)(s_points)


def _grid(lo: float, hi: float, per_decade: int, include=None) -> np.ndarray:
    npts = max(64, int(np.ceil(per_decade * np.log10(hi / lo))))
    g = np.geomspace(lo, hi, npts)
    if include is not None:
        g = np.concatenate([g, np.asarray(include, dtype=float)])
    g = np.unique(g)
    g = g[(g >= lo) & (g <= hi)]
    # merge near-coincident nodes: they would blow up later finite differences
    keep = np.append(np.diff(g) > 1e-9 * g[:-1], True)
    return g[keep]


def shoot_profile(n: int, alpha: float, S0: float, s_min: float | None = None,
                  tol: float = 1e-12, per_decade: int = 200,
                  s_include=None) -> SolitonProfile:
    """Integrate backward from the anchor w(S0)=alpha, w'(S0)=0.

    Halts (keeping the partial profile and recording the inner boundary) if w
    exits the barrier band [alpha/2, 2 alpha] before reaching s_min.  The
    potential slope and the arclength element are integrated alongside so
    that downstream quadratures inherit integrator accuracy.
    """
    n = int(n)
    if n < 3:
        raise ParameterError("dimension n must be >= 3")
    if not alpha > 0:
        raise ParameterError("aperture alpha must be positive")
    if s_min is None:
        s_min = max(1.0, float(n - 2))  # half the barrier-radius estimate
    if not (S0 > max(4.0 * (n - 2), s_min) and S0 > 1.0):
        raise ParameterError("anchor S0 must exceed max(4(n-2), s_min) and 1")

    def rhs(s, y):
        w, w1 = y[0], y[1]
        num = (2.0 * s * w1 + s - 2.0 * (n - 2)) * s * w1 \
            - 2.0 * (n - 2) * (1.0 - w) * w
        w2 = num / (4.0 * s * s * w)
        f1 = (s - 2.0 * ((n - 2) - s * w1 - (n - 2) * w)) / (4.0 * s * w)
        return (w1, w2, f1, 1.0 / (2.0 * np.sqrt(s * w)))

    def exit_low(s, y):
        return y[0] - 0.5 * alpha

    def exit_high(s, y):
        return y[0] - 2.0 * alpha

    exit_low.terminal = True
    exit_high.terminal = True
    y0 = (alpha, 0.0, S0 / (4.0 * alpha), 0.0)
    atol = np.array([1.0, 1.0, max(1.0, S0 / (4 * alpha)),
                     max(1.0, np.sqrt(S0 / alpha))]) * tol * 1e-2
    # the mode decaying backward at rate 1/(4 alpha) caps explicit steps at
    # O(alpha); switch to an implicit RK pair once the span makes that bind
    method = "DOP853" if S0 <= 2e4 * max(1.0, alpha) else "Radau"
    sol = solve_ivp(rhs, (S0, float(s_min)), y0, method=method,
                    rtol=tol, atol=atol, dense_output=True,
                    events=(exit_low, exit_high))
    if sol.status == -1:
        raise SingularInputError(f"integrator failed: {sol.message}")
    inner = float(sol.t[-1])
    halted = None
    if sol.status == 1:
        halted = "band-exit-low" if sol.t_events[0].size else "band-exit-high"
    elif inner > s_min * (1 + 1e-12):
        halted = "stepsize-underflow"
    grid = _grid(inner, S0, per_decade, include=s_include)
    grid[-1] = S0
    vals = sol.sol(grid)
    return SolitonProfile(n=n, alpha=float(alpha), s=grid, w=vals[0], w1=vals[1],
                          S0=float(S0), s_min=float(s_min), tol=float(tol),
                          inner_boundary=inner if halted else None, halted=halted,
                          f_from_anchor=vals[2], r_from_anchor=vals[3])


def construct_soliton(n: int, alpha: float, window=None, tol: float = 1e-8,
                      s_min: float | None = None, S0_init: float | None = None,
                      max_doublings: int = 26, shoot_tol: float | None = None,
                      per_decade: int = 200) -> SolitonProfile:
    """Repeat shoot_profile with S0 doubling until two successive profiles
    differ by less than tol in sup norm on the window; return the last.

    The anchor error decays like 1/S0, so the doubling loop is geometric in
    cost: each shot takes a few hundred adaptive steps regardless of S0.
    """
    n = int(n)
    if window is None:
        window = (max(4.0 * (n - 2), 10.0), 200.0)
    s_lo, s_hi = float(window[0]), float(window[1])
    if not 0 < s_lo < s_hi:
        raise ParameterError("window must satisfy 0 < s_lo < s_hi")
    if S0_init is None:
        S0_init = 4.0 * s_hi
    if S0_init <= s_hi:
        raise ParameterError("initial anchor must exceed the window")
    if shoot_tol is None:
        shoot_tol = max(1e-13, 1e-3 * tol)
    win_grid = np.geomspace(s_lo, s_hi, 64)

    history = []
    S0 = float(S0_init)
    prev = shoot_profile(n, alpha, S0, s_min=s_min, tol=shoot_tol,
                         per_decade=per_decade, s_include=win_grid)
    prev_win = prev.window_values(win_grid)
    for _ in range(max_doublings):
        S0 *= 2.0
        curr = shoot_profile(n, alpha, S0, s_min=s_min, tol=shoot_tol,
                             per_decade=per_decade, s_include=win_grid)
        curr_win = curr.window_values(win_grid)
        diff = float(np.max(np.abs(curr_win - prev_win)))
        history.append(diff)
        if diff < tol:
            return replace(curr, cauchy_history=tuple(history))
        prev, prev_win = curr, curr_win
    raise ConvergenceError(
        f"anchor doubling did not converge below {tol} after {max_doublings} "
        f"rounds (last difference {history[-1]:.3e})", history=history)


def normalize_potential(profile: SolitonProfile) -> SolitonProfile:
    """Recover f by quadrature of the algebraic slope and fix its additive
    constant by least squares on R + |grad f|^2 - f over the outer quarter
    of the grid; |grad f|^2 = 4 s w f'(s)^2 in profile variables."""
    s, w, w1 = profile.s, profile.w, profile.w1
    f1 = potential_slope(s, w, w1, profile.n)
    if profile.f_from_anchor is not None:
        f_raw = profile.f_from_anchor
    else:
        f_raw = cumulative_simpson(f1, x=s, initial=0.0)
    R = scalar_curvature_s(s, w, w1, profile.n)
    combo = R + 4.0 * s * w * f1 ** 2 - f_raw
    outer = slice(3 * len(s) // 4, None)
    shift = float(np.mean(combo[outer]))
    f = f_raw + shift
    residual = float(np.max(np.abs(combo[outer] - shift)))
    return replace(profile, f=f, f1=f1, normalization_residual=residual)


def ode_residual(profile: SolitonProfile, normalized: bool = True,
                 anchor_guard: bool = True) -> np.ndarray:
    """Profile-equation residual with w'' rebuilt by finite differences of w1
    (an independent consistency route, not the integrator's own derivative).

    Near the anchor w1 is pinned to 0, so its true size ~1/s^2 falls under
    double-precision noise once s is large; anchor_guard masks s > S0/100
    (returns 0 there) where the check carries no information.
    """
    s, w, w1 = profile.s, profile.w, profile.w1
    w2 = fd_derivative(s, w1, 1)
    t1 = 4.0 * s * s * w * w2
    t2 = (2.0 * s * w1 + s - 2.0 * (profile.n - 2)) * s * w1
    t3 = 2.0 * (profile.n - 2) * (1.0 - w) * w
    res = np.abs(t1 - t2 + t3)
    if normalized:
        res = res / (np.abs(t1) + np.abs(t2) + np.abs(t3) + 1.0)
    if anchor_guard:
        res = np.where(s > 0.01 * profile.S0, 0.0, res)
    return res


def fit_asymptotics(profile: SolitonProfile, window) -> tuple:
    """Least-squares tail fits of w and of f - s/(4 alpha) against c0 + c1/s.

    The remainder's decay order cannot be read off the in-window least-squares
    residual (it oscillates through zero by construction), so it is measured
    by annihilator differencing: combinations of the quantity at (t, g t,
    g^2 t) with weights (1, -(1+g), g) cancel both a constant and a 1/s term
    exactly, leaving the remainder's scale; a log-log regression of those
    differences gives the order.  For w the differences cancel {1, 1/s} and
    the expected order is 2.  The f-deviation generically carries a
    logarithmic term, so its annihilator is the second difference in
    log-scale, weights (1, -2, 1), which cancels {1, log s} while leaving
    the 1/s decay; the expected order is 1.
    """
    if not profile.has_potential:
        raise FitError("potential missing: run normalize_potential first")
    s_lo, s_hi = float(window[0]), float(window[1])
    if s_lo < profile.s[0] or s_hi > profile.s[-1]:
        raise FitError("window outside the profile grid")
    if s_hi / s_lo < 2.0:
        raise FitError("window too narrow for a tail fit (need s_hi >= 2 s_lo)")
    mask = (profile.s >= s_lo) & (profile.s <= s_hi)
    if mask.sum() < 16:
        raise FitError("window contains too few grid points")
    from scipy.interpolate import CubicSpline

    s = profile.s[mask]
    design = np.column_stack([np.ones_like(s), 1.0 / s])
    floor = max(1e-12, 100.0 * profile.tol) * max(1.0, profile.alpha)
    w_spl = CubicSpline(profile.s, profile.w)
    dev_spl = CubicSpline(profile.s, profile.f - profile.s / (4.0 * profile.alpha))

    def order_of(spl, weights, scales):
        t = np.geomspace(s_lo, s_hi / scales[-1], 32)
        diffs = sum(wgt * spl(fac * t) for wgt, fac in zip(weights, scales))
        try:
            slope, ci = loglog_slope(t, np.abs(diffs), floor=floor)
            return -slope, (-ci[1], -ci[0])
        except ValueError:
            return float("inf"), (float("inf"), float("inf"))

    gam = min(2.0, (s_hi / s_lo) ** 0.25)
    w_order, w_ci = order_of(w_spl, (1.0, -(1.0 + gam), gam),
                             (1.0, gam, gam * gam))
    f_order, f_ci = order_of(dev_spl, (1.0, -2.0, 1.0), (1.0, gam, gam * gam))

    def coeffs(y):
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        return float(coef[0]), float(coef[1])

    w0, w1c = coeffs(w_spl(s))
    f0, f1c = coeffs(dev_spl(s))
    return (ExpansionFit(c0=w0, c1=w1c, window=(s_lo, s_hi),
                         residual_order=w_order, residual_order_ci=w_ci,
                         quantity="w"),
            ExpansionFit(c0=f0, c1=f1c, window=(s_lo, s_hi),
                         residual_order=f_order, residual_order_ci=f_ci,
                         quantity="f_deviation"))


def _calibrated_radius(profile: SolitonProfile) -> np.ndarray:
    """Arclength coordinate with its additive constant fixed so the grid is
    asymptotic to the cone chart: r - sqrt(s/alpha) -> 0.  Fit the anchor
    quadrature's tail against [1, s^-1/2, s^-3/2] and remove the constant."""
    s, alpha = profile.s, profile.alpha
    if profile.r_from_anchor is not None:
        r_raw = profile.r_from_anchor
    else:
        r_raw = cumulative_simpson(1.0 / (2.0 * np.sqrt(s * profile.w)), x=s,
                                   initial=0.0)
    y = r_raw - np.sqrt(s / alpha)
    outer = slice(len(s) // 2, None)
    basis = np.column_stack([np.ones_like(s[outer]), s[outer] ** -0.5,
                             s[outer] ** -1.5])
    coef, *_ = np.linalg.lstsq(basis, y[outer], rcond=None)
    return r_raw - coef[0]


def to_radial_chart(profile: SolitonProfile) -> WarpedMetricField:
    """Convert to the arclength-gauge field a = sqrt(s), a' = sqrt(w),
    a'' = a w'; potential derivatives by the chain rule with the analytic
    derivative of the slope formula (no soliton identity is substituted,
    so residual checks on the result stay meaningful)."""
    if not profile.has_potential:
        raise ParameterError("normalized potential required: "
                             "run normalize_potential first")
    n = profile.n
    s, w, w1, f, f1 = profile.s, profile.w, profile.w1, profile.f, profile.f1
    r = _calibrated_radius(profile)
    a = np.sqrt(s)
    a1 = np.sqrt(w)
    a2 = a * w1
    w2 = metric_soliton_rhs(s, w, w1, n)
    num = s - 2.0 * ((n - 2) - s * w1 - (n - 2) * w)
    dnum = 1.0 + 2.0 * w1 + 2.0 * s * w2 + 2.0 * (n - 2) * w1
    den = 4.0 * s * w
    dden = 4.0 * w + 4.0 * s * w1
    f1_s = (dnum * den - num * dden) / den ** 2  # d/ds of the slope formula
    fr1 = 2.0 * np.sqrt(s * w) * f1
    fr2 = 2.0 * (w + s * w1) * f1 + 4.0 * s * w * f1_s
    return WarpedMetricField(n=n, r=r, a=a, a1=a1, a2=a2, f=f, f1=fr1, f2=fr2,
                             alpha=profile.alpha)


@dataclass(frozen=True)
class PotentialGauge:
    """Round trip through the potential gauge u = 2 sqrt(f), where f(u) = u^2/4.

    field is the re-ingested arclength version; u and g_rr record the gauge;
    comparability_N is the smallest N with N^-1 (u-1) <= r <= N (u+1)."""

    field: WarpedMetricField
    u: np.ndarray
    g_rr: np.ndarray
    comparability_N: float


def gauge_by_potential(field: WarpedMetricField) -> PotentialGauge:
    """Reparametrize so the potential is exactly u^2/4, then convert back to
    arclength by the standard ingestion path."""
    field.require_potential()
    if np.any(field.f <= 0) or np.any(field.f1 <= 0):
        raise GaugeError("potential gauge needs f > 0 and f' > 0")
    u = 2.0 * np.sqrt(field.f)
    if np.any(np.diff(u) <= 0):
        raise GaugeError("potential must be strictly increasing")
    g_rr = (0.5 * u / field.f1) ** 2
    refield = field_from_gauge(u, g_rr, field.a, field.n, f=0.25 * u ** 2,
                               alpha=field.alpha, r_base=float(field.r[0]))
    r = field.r
    upper = np.max(r / (u + 1.0))
    mask = u > 1.0
    lower = np.max((u[mask] - 1.0) / r[mask]) if mask.any() else 0.0
    n_comp = float(max(1.0, upper, lower))
    return PotentialGauge(field=refield, u=u, g_rr=g_rr, comparability_N=n_comp)


def save_profile(profile: SolitonProfile, path) -> Path:
    """CSV `s,w,w1[,f,f1]` with a JSON sidecar of the construction data."""
    path = Path(path)
    cols = ["s", "w", "w1"] + (["f", "f1"] if profile.has_potential else [])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for i in range(profile.s.size):
            writer.writerow([f"{getattr(profile, c)[i]:.17g}" for c in cols])
    sidecar = {"n": profile.n, "alpha": profile.alpha, "S0": profile.S0,
               "s_min": profile.s_min, "tol": profile.tol}
    path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True))
    return path


def load_profile(path) -> SolitonProfile:
    path = Path(path)
    sidecar = path.with_suffix(".json")
    if not sidecar.exists():
        raise InvalidFieldError(f"missing profile sidecar {sidecar}")
    meta = json.loads(sidecar.read_text())
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    data = {name: rows[:, i] for i, name in enumerate(header)}
    if not {"s", "w", "w1"} <= set(data):
        raise InvalidFieldError("profile CSV must carry s, w, w1 columns")
    return SolitonProfile(n=int(meta["n"]), alpha=float(meta["alpha"]),
                          s=data["s"], w=data["w"], w1=data["w1"],
                          S0=float(meta["S0"]), s_min=float(meta["s_min"]),
                          tol=float(meta["tol"]),
                          f=data.get("f"), f1=data.get("f1"))
