"""Self-similar backwards flow of a rotationally symmetric shrinking soliton.

Given a soliton field (metric + potential fbar on an end), the one-parameter
family g(tau) is the pullback of the soliton metric along the integral curves
of grad(fbar), run for flow parameter s = -log(tau), rescaled by tau.  In the
radial reduction a material point labelled by its tau=1 radius x sits at
radius r_s(x) = position of the gradient trajectory after time s, and the
snapshot data in its own arclength coordinate u = sqrt(tau) r_s are

    a(u)  = sqrt(tau) abar(r_s),    a'(u) = abar'(r_s),
    a''(u) = abar''(r_s)/sqrt(tau),
    f(u)  = fbar(r_s),  f'(u) = fbar'(r_s)/sqrt(tau),  f''(u) = fbar''(r_s)/tau.

Trajectories are resolved through the antiderivative F of 1/fbar': the flow
map is F(r_s) = F(x) + s, inverted by a vectorized Newton iteration.  The
h-field is 2 sqrt(tau f) and the conical radius r_c of each label is the
tau -> 0 extrapolation of h.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import json
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, make_interp_spline

from .errors import DomainError, FitError, InvalidFieldError, ParameterError
from .geometry import (WarpedMetricField, curvature_arrays, load_field,
                       save_field, soliton_residual,
                       with_fd_second_derivatives)
from .numutil import fd_derivative, fornberg_weights, linear_fit, loglog_slope

__all__ = [
    "FlowSnapshot", "TrajectoryRecord", "FlowMap", "trajectory",
    "trajectory_threshold", "required_source_radius", "snapshot",
    "snapshot_family", "verify_flow_identities", "verify_fid0", "verify_hder",
    "verify_rh_comparison", "curvature_decay", "save_snapshot_bundle",
    "load_snapshot_bundle", "EDGE_SAFETY",
]

EDGE_SAFETY = 5.0  # arclength margin kept between trajectories and grid edge


@dataclass(frozen=True)
class TrajectoryRecord:
    """Radial gradient-flow trajectory r_s starting from r0."""

    r0: float
    s_samples: np.ndarray
    r_s: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "s_samples", np.asarray(self.s_samples, float))
        object.__setattr__(self, "r_s", np.asarray(self.r_s, float))
        if np.any(np.diff(self.r_s) < 0):
            raise InvalidFieldError("trajectory radius must be nondecreasing")


@dataclass(frozen=True)
class FlowSnapshot:
    """One backwards time of the self-similar flow, in arclength gauge.

    labels are the tau=1 radii of the grid columns; they stay fixed across a
    family so snapshots can be differenced in tau column by column.
    """

    tau: float
    field: WarpedMetricField
    h: np.ndarray
    r_c: np.ndarray
    labels: np.ndarray
    rc_fit_residual: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        for name in ("h", "r_c", "labels"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        if not 0.0 < self.tau <= 1.0:
            raise ParameterError("tau must lie in (0, 1]")
        if self.h.shape != self.field.r.shape or self.r_c.shape != self.h.shape:
            raise InvalidFieldError("h / r_c grids must match the field grid")
        if np.any(self.h <= 0):
            raise InvalidFieldError("h must be positive")
        if np.any(self.h < 0.5 * self.r_c) or np.any(self.h > 2.0 * self.r_c):
            raise InvalidFieldError("h must stay within [r_c/2, 2 r_c]")


class FlowMap:
    """Gradient-flow transport on a soliton field via the slope integral.

    F(rho) = int d rho / fbar'(rho); then r_s solves F(r_s) = F(r) + s.
    """

    def __init__(self, source: WarpedMetricField):
        source.require_potential()
        if np.any(source.f1 <= 0):
            raise DomainError("flow needs fbar' > 0 on the whole source grid")
        self.source = source
        r = source.r
        # every array is interpolated at value level from the source's own
        # (algebraically exact) derivative arrays: differentiating a fitted
        # interpolant instead would amplify the chart's tiny knot jitter by
        # 1/h^2 and swamp curvature differences between nearby flows
        def vq(arr):
            return make_interp_spline(r, arr, k=5)

        self._fbar = vq(source.f)
        self._slope = vq(source.f1)
        self._f2bar = vq(source.f2)
        self._abar = vq(source.a)
        self._a1bar = vq(source.a1)
        self._a2bar = vq(source.a2)
        self._F = CubicSpline(r, 1.0 / source.f1).antiderivative()
        self.r_lo, self.r_hi = float(r[0]), float(r[-1])

    def transport(self, r0, s: float) -> np.ndarray:
        """r_s for an array of start radii, by Newton on the F-integral."""
        r0 = np.atleast_1d(np.asarray(r0, dtype=float))
        if np.any(r0 < self.r_lo) or np.any(r0 > self.r_hi):
            raise DomainError("start radius outside the source grid")
        target = self._F(r0) + s
        if float(np.max(target)) > float(self._F(self.r_hi)):
            need = float(np.max(r0))
            raise DomainError(
                "trajectory exits the source grid before s = "
                f"{s:.3f}; extend the source end beyond "
                f"{(need + 1.0) * np.exp(s / 2.0) - 1.0 + EDGE_SAFETY:.1f}")
        # slope ~ r/2 so r_s <= (r+1)e^{s/2} - 1 brackets the root from above
        z = np.minimum((r0 + 1.0) * np.exp(s / 2.0) - 1.0, self.r_hi)
        z = np.maximum(z, r0)
        for _ in range(60):
            step = (self._F(z) - target) * self._slope(z)
            z = np.clip(z - step, self.r_lo, self.r_hi)
            if float(np.max(np.abs(step))) < 1e-13 * max(1.0, float(np.max(z))):
                break
        else:
            raise DomainError("flow-map inversion did not converge")
        return z


def trajectory(field: WarpedMetricField, r0: float, s_end: float,
               n_samples: int = 129) -> TrajectoryRecord:
    """Integrate dr/ds = f'(r) adaptively from r0 (independent of the
    F-integral transport used by snapshots; the two are cross-checked by the
    self-similarity tests)."""
    field.require_potential()
    if not (field.r[0] <= r0 <= field.r[-1] - EDGE_SAFETY):
        raise DomainError("r0 must sit inside the field domain with margin")
    slope = CubicSpline(field.r, field.f1)
    if slope(r0) <= 0:
        raise DomainError("f' must be positive at r0")
    hit_edge = lambda s, y: y[0] - (field.r[-1] - 1e-9)
    hit_edge.terminal = True
    sol = solve_ivp(lambda s, y: (slope(y[0]),), (0.0, float(s_end)), (float(r0),),
                    method="DOP853", rtol=1e-11, atol=1e-11, dense_output=True,
                    events=(hit_edge,))
    s_reached = float(sol.t[-1])
    samples = np.linspace(0.0, s_reached, n_samples)
    return TrajectoryRecord(r0=float(r0), s_samples=samples,
                            r_s=sol.sol(samples)[0],
                            truncated=bool(sol.status == 1))


def trajectory_threshold(field: WarpedMetricField) -> float:
    """Smallest radius beyond which |2 f'(rho) - rho| <= 1 holds for every
    larger grid radius, so the dyadic trajectory bounds apply."""
    field.require_potential()
    bad = np.abs(2.0 * field.f1 - field.r) > 1.0
    if bad[-1]:
        raise DomainError("slope comparison fails at the outer edge")
    idx = np.nonzero(bad)[0]
    return float(field.r[0]) if idx.size == 0 else float(field.r[idx[-1] + 1])


def required_source_radius(label_max: float, tau_min: float) -> float:
    """Outer source radius needed so trajectories of all labels stay inside
    the grid down to tau_min (dyadic upper bound plus the edge margin)."""
    return (label_max + 1.0) / np.sqrt(tau_min) - 1.0 + EDGE_SAFETY


def _extrapolate_rc(fmap: FlowMap, labels: np.ndarray, rc_taus) -> tuple:
    """Fit h(tau) ~ r_c + A tau^2 + B tau^3 + C tau^4 per label and return
    (r_c, per-label fit residual)."""
    rc_taus = np.asarray(rc_taus, dtype=float)
    hs = np.empty((rc_taus.size, labels.size))
    for k, t in enumerate(rc_taus):
        r_s = fmap.transport(labels, -np.log(t))
        hs[k] = 2.0 * np.sqrt(t * fmap._fbar(r_s))
    design = np.column_stack([np.ones_like(rc_taus), rc_taus ** 2,
                              rc_taus ** 3, rc_taus ** 4])
    coef, *_ = np.linalg.lstsq(design, hs, rcond=None)
    resid = np.max(np.abs(hs - design @ coef), axis=0)
    return coef[0], resid


def snapshot(source: WarpedMetricField, tau: float, labels=None,
             rc_taus=None, r_c: np.ndarray | None = None,
             rc_fit_residual: np.ndarray | None = None) -> FlowSnapshot:
    """Pull the source back along the gradient flow for s = -log(tau) and
    rescale; grid columns are the tau=1 labels."""
    if not 0.0 < tau <= 1.0:
        raise ParameterError("tau must lie in (0, 1]")
    fmap = FlowMap(source)
    if rc_taus is None:
        rc_taus = np.geomspace(0.02, 0.2, 8)
    if labels is None:
        tau_reach = min(tau, float(np.min(rc_taus))) if r_c is None else tau
        lo = float(source.r[0])
        hi_allowed = (fmap.r_hi + 1.0 - EDGE_SAFETY) * np.sqrt(tau_reach) - 1.0
        if hi_allowed <= max(lo, 1.0) * 1.5:
            raise DomainError("source end too short for a default label grid")
        labels = np.geomspace(max(lo, 1.0), 0.9 * hi_allowed, 96)
    labels = np.asarray(labels, dtype=float)
    s = -np.log(tau)
    r_s = fmap.transport(labels, s)
    rt = np.sqrt(tau)
    u = rt * r_s
    field = WarpedMetricField(
        n=source.n, r=u,
        a=rt * fmap._abar(r_s), a1=fmap._a1bar(r_s), a2=fmap._a2bar(r_s) / rt,
        f=fmap._fbar(r_s), f1=fmap._slope(r_s) / rt,
        f2=fmap._f2bar(r_s) / tau,
        alpha=source.alpha)
    h = 2.0 * np.sqrt(tau * field.f)
    if r_c is None:
        r_c, rc_fit_residual = _extrapolate_rc(fmap, labels, rc_taus)
    return FlowSnapshot(tau=float(tau), field=field, h=h, r_c=r_c,
                        labels=labels, rc_fit_residual=rc_fit_residual)


def snapshot_family(source: WarpedMetricField, taus, labels=None,
                    rc_taus=None, validate: bool = True,
                    residual_tol: float = 1e-3) -> list:
    """Snapshots at the given taus over one shared label grid (descending
    tau).  The conical radius is extrapolated once and shared.

    validate checks each snapshot against the tau-scaled shrinker equation
    (finite-difference route), which holds for soliton sources but not for
    e.g. a raw cone source."""
    taus = np.sort(np.unique(np.asarray(taus, dtype=float)))[::-1]
    if taus.size < 1:
        raise ParameterError("need at least one tau")
    fmap = FlowMap(source)
    tau_min = float(taus[-1])
    if rc_taus is None:
        rc_taus = np.geomspace(0.02, 0.2, 8)
    tau_reach = min(tau_min, float(np.min(rc_taus)))
    if labels is None:
        hi_allowed = (fmap.r_hi + 1.0 - EDGE_SAFETY) * np.sqrt(tau_reach) - 1.0
        lo = max(float(source.r[0]) + EDGE_SAFETY, 1.0)
        if hi_allowed <= lo * 1.5:
            raise DomainError("source end too short for the requested taus")
        labels = np.geomspace(lo, hi_allowed, 96)
    labels = np.asarray(labels, dtype=float)
    need = required_source_radius(float(labels[-1]), tau_reach)
    if need > fmap.r_hi:
        raise DomainError(f"source end too short: need outer radius {need:.1f}, "
                          f"have {fmap.r_hi:.1f}")
    r_c, resid = _extrapolate_rc(fmap, labels, rc_taus)
    snaps = [snapshot(source, t, labels=labels, r_c=r_c, rc_fit_residual=resid)
             for t in taus]
    if validate:
        for sn in snaps:
            rad, sph = soliton_residual(sn.field, constant=0.5 / sn.tau)
            scale = 1.0 / sn.tau
            if max(rad, sph) > residual_tol * scale:
                raise InvalidFieldError(
                    f"snapshot at tau={sn.tau} fails the scaled shrinker "
                    f"equation (residual {max(rad, sph):.2e})")
    return snaps


def _sorted_by_tau(snapshots) -> list:
    return sorted(snapshots, key=lambda sn: sn.tau)


def _tau_derivative(snapshots, values_of) -> tuple:
    """Columnwise d/dtau by nonuniform stencils (5 nodes when available, so
    the wide fixture spacing tau in {1,...,0.01} still resolves the
    derivative); returns (taus_mid, derivative rows, row index into the
    sorted snapshot list)."""
    snaps = _sorted_by_tau(snapshots)
    if len(snaps) < 3:
        raise ParameterError("need at least 3 snapshots for a tau derivative")
    taus = np.array([sn.tau for sn in snaps])
    vals = np.stack([values_of(sn) for sn in snaps])
    width = min(5, len(snaps))
    out = []
    for j in range(1, len(snaps) - 1):
        lo = min(max(0, j - width // 2), len(snaps) - width)
        nodes = taus[lo:lo + width]
        wts = fornberg_weights(nodes, float(taus[j]), 1)[..., 1]
        out.append(np.tensordot(wts, vals[lo:lo + width], axes=(0, 0)))
    return taus[1:-1], np.stack(out), list(range(1, len(snaps) - 1))


@dataclass(frozen=True)
class FlowIdentityReport:
    """Sup residuals of the three flow identities (interior columns)."""

    tau_derivative: float   # d(tau f)/dtau - tau R
    gradient: float         # tau^2 |grad f|^2 - tau f + tau^2 R
    soliton: float          # tau Rc + tau Hess f - g/2
    per_tau: dict


def verify_flow_identities(snapshots) -> FlowIdentityReport:
    """Check the backwards-flow identities; curvature terms are rebuilt by
    finite differences so the check is not circular for analytically
    propagated snapshot fields."""
    snaps = _sorted_by_tau(snapshots)
    per_tau = {}
    sup_grad = 0.0
    sup_sol = 0.0
    for sn in snaps:
        fd = with_fd_second_derivatives(sn.field)
        interior = fd.interior()
        _, _, _, _, R, _ = curvature_arrays(fd)
        tau = sn.tau
        grad_res = np.abs(tau ** 2 * fd.f1 ** 2 - tau * fd.f + tau ** 2 * R)
        g_sup = float(np.max(grad_res[interior]))
        rad, sph = soliton_residual(sn.field, constant=0.5 / tau)
        s_sup = tau * max(rad, sph)  # residual of tau Rc + tau Hess f - g/2
        per_tau[f"{tau:.6g}"] = {"gradient": g_sup, "soliton": s_sup}
        sup_grad = max(sup_grad, g_sup)
        sup_sol = max(sup_sol, s_sup)

    def tau_f(sn):
        return sn.tau * sn.field.f

    taus_mid, d_tauf, idx = _tau_derivative(snaps, tau_f)
    sup_dt = 0.0
    for row, j in enumerate(idx):
        sn = snaps[j]
        fd = with_fd_second_derivatives(sn.field)
        _, _, _, _, R, _ = curvature_arrays(fd)
        res = np.abs(d_tauf[row] - sn.tau * R)
        val = float(np.max(res[fd.interior()]))
        per_tau[f"{sn.tau:.6g}"]["tau_derivative"] = val
        sup_dt = max(sup_dt, val)
    return FlowIdentityReport(tau_derivative=sup_dt, gradient=sup_grad,
                              soliton=sup_sol, per_tau=per_tau)


@dataclass(frozen=True)
class Fid0Report:
    """Smallest N0 with r_c^2 - N0/r_c^2 <= 4 tau f <= r_c^2 + N0/r_c^2."""

    N0: float
    binding_tau: float
    binding_label: float


def verify_fid0(snapshots) -> Fid0Report:
    n0 = -1.0
    b_tau = b_lab = 0.0
    for sn in snapshots:
        cand = np.abs(4.0 * sn.tau * sn.field.f - sn.r_c ** 2) * sn.r_c ** 2
        j = int(np.argmax(cand))
        if float(cand[j]) > n0:
            n0 = float(cand[j])
            b_tau, b_lab = sn.tau, float(sn.labels[j])
    return Fid0Report(N0=n0, binding_tau=b_tau, binding_label=b_lab)


@dataclass(frozen=True)
class HDerReport:
    """Sup residuals of the h-field identities."""

    gradient: float        # h' - 2 tau f'/h
    gradient_square: float  # (h')^2 - (1 - 4 tau^2 R / h^2)
    laplacian: float       # h (h'' + (n-1)(a'/a) h') - (n - 2 tau R - |grad h|^2)
    tau_derivative: float  # dh/dtau - 2 tau R / h
    zero_time_limit: float  # | |grad h|^2 - 1 | at the smallest tau


def verify_hder(snapshots) -> HDerReport:
    snaps = _sorted_by_tau(snapshots)
    sup_g = sup_gs = sup_lap = 0.0
    limit = None
    for sn in snaps:
        fd = with_fd_second_derivatives(sn.field)
        interior = fd.interior()
        _, _, _, _, R, _ = curvature_arrays(fd)
        tau, h = sn.tau, sn.h
        h1 = fd_derivative(fd.r, h, 1)
        h2 = fd_derivative(fd.r, h1, 1)
        res_g = np.abs(h1 - 2.0 * tau * fd.f1 / h)
        res_gs = np.abs(h1 ** 2 - (1.0 - 4.0 * tau ** 2 * R / h ** 2))
        lap = h2 + (fd.n - 1) * (fd.a1 / fd.a) * h1
        res_lap = np.abs(h * lap - (fd.n - 2.0 * tau * R - h1 ** 2))
        sup_g = max(sup_g, float(np.max(res_g[interior])))
        sup_gs = max(sup_gs, float(np.max(res_gs[interior])))
        sup_lap = max(sup_lap, float(np.max(res_lap[interior])))
        if sn is snaps[0]:
            limit = float(np.max(np.abs(h1[interior] ** 2 - 1.0)))
    taus_mid, dh, idx = _tau_derivative(snaps, lambda sn: sn.h)
    sup_dt = 0.0
    for row, j in enumerate(idx):
        sn = snaps[j]
        fd = with_fd_second_derivatives(sn.field)
        _, _, _, _, R, _ = curvature_arrays(fd)
        res = np.abs(dh[row] - 2.0 * sn.tau * R / sn.h)
        sup_dt = max(sup_dt, float(np.max(res[fd.interior()])))
    return HDerReport(gradient=sup_g, gradient_square=sup_gs, laplacian=sup_lap,
                      tau_derivative=sup_dt, zero_time_limit=limit)


@dataclass(frozen=True)
class RHComparisonReport:
    """Power-law structure of |h - r_c| in tau and in r_c."""

    tau_exponent: float
    tau_exponent_ci: tuple
    rc_exponent: float
    rc_exponent_ci: tuple
    c_bound: float  # sup |h - r_c| r_c^3 / tau^2


def verify_rh_comparison(snapshots, noise_floor: float = 1e-12) -> RHComparisonReport:
    snaps = _sorted_by_tau(snapshots)
    taus = np.array([sn.tau for sn in snaps])
    if taus[-1] / taus[0] < 10.0 - 1e-9:
        raise FitError("need snapshots spanning at least a decade of tau")
    rc = snaps[0].r_c
    if rc[-1] / rc[0] < 10.0 - 1e-9:
        raise FitError("need labels spanning at least a decade of r_c")
    gap = np.stack([np.abs(sn.h - sn.r_c) for sn in snaps])  # (tau, label)

    # tau exponent: pooled regression of log gap against log tau, detrended
    # in r_c by fitting each label separately and averaging the slopes
    slopes, ws = [], []
    for j in range(rc.size):
        col = gap[:, j]
        keep = col > noise_floor
        if keep.sum() >= 3:
            a, b, se = linear_fit(np.log(taus[keep]), np.log(col[keep]))
            slopes.append(b)
            ws.append(1.0 / max(se, 1e-6) ** 2)
    if len(slopes) < 4:
        raise FitError("insufficient dynamic range above the noise floor")
    slopes = np.array(slopes)
    ws = np.array(ws)
    tau_exp = float(np.sum(ws * slopes) / np.sum(ws))
    spread = float(np.sqrt(np.sum(ws * (slopes - tau_exp) ** 2) / np.sum(ws)))
    tau_ci = (tau_exp - 1.96 * spread, tau_exp + 1.96 * spread)

    # r_c exponent at the smallest tau (clearest scaling regime)
    col = gap[-1]
    keep = col > noise_floor
    if keep.sum() < 4:
        raise FitError("insufficient dynamic range above the noise floor")
    rc_exp, rc_ci = loglog_slope(rc[keep], col[keep], floor=noise_floor)

    c_bound = 0.0
    for sn in snaps:
        c_bound = max(c_bound, float(np.max(np.abs(sn.h - sn.r_c)
                                            * sn.r_c ** 3 / sn.tau ** 2)))
    return RHComparisonReport(tau_exponent=tau_exp, tau_exponent_ci=tau_ci,
                              rc_exponent=float(rc_exp), rc_exponent_ci=rc_ci,
                              c_bound=c_bound)


@dataclass(frozen=True)
class CurvatureDecayReport:
    """Measured K0 in (r_c^{m+2} + 1) |grad^m Rm| <= K0, per snapshot family."""

    m: int
    K0: float
    per_tau: dict
    tau_variation: float  # (max - min) / max of the per-tau sup


def curvature_decay(snapshots, m: int = 0) -> CurvatureDecayReport:
    """m=0 uses the closed-form curvature norm; m=1 differences the sectional
    curvatures radially and weights them with the same multiplicities (the
    radial reduction of the covariant derivative norm)."""
    if m not in (0, 1):
        raise ParameterError("m must be 0 or 1")
    per_tau = {}
    for sn in snapshots:
        fld = sn.field
        k_rad, k_sph, _, _, _, rm = curvature_arrays(fld)
        interior = fld.interior()
        if m == 0:
            val = (sn.r_c ** 2 + 1.0) * rm
        else:
            n = fld.n
            dk_rad = fd_derivative(fld.r, k_rad, 1)
            dk_sph = fd_derivative(fld.r, k_sph, 1)
            drm = np.sqrt(4.0 * (n - 1) * dk_rad ** 2
                          + 2.0 * (n - 1) * (n - 2) * dk_sph ** 2)
            val = (sn.r_c ** 3 + 1.0) * drm
        per_tau[f"{sn.tau:.6g}"] = float(np.max(val[interior]))
    sups = np.array(list(per_tau.values()))
    k0 = float(np.max(sups))
    variation = float((sups.max() - sups.min()) / sups.max()) if k0 > 0 else 0.0
    return CurvatureDecayReport(m=m, K0=k0, per_tau=per_tau,
                                tau_variation=variation)


def save_snapshot_bundle(snapshots, directory, source_profile: str = "") -> Path:
    """Directory of per-tau field CSVs plus manifest and shared r_c data."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    snaps = _sorted_by_tau(snapshots)[::-1]
    taus = [sn.tau for sn in snaps]
    for k, sn in enumerate(snaps):
        save_field(sn.field, directory / f"snapshot_{k:03d}.csv")
    first = snaps[0]
    np.savetxt(directory / "labels_rc.csv",
               np.column_stack([first.labels, first.r_c]),
               header="label,r_c", delimiter=",", comments="")
    manifest = {"taus": taus, "source_profile": source_profile,
                "n": first.field.n, "alpha": first.field.alpha}
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True))
    return directory


def load_snapshot_bundle(directory) -> list:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    lab_rc = np.loadtxt(directory / "labels_rc.csv", delimiter=",", skiprows=1)
    labels, r_c = lab_rc[:, 0], lab_rc[:, 1]
    snaps = []
    for k, tau in enumerate(manifest["taus"]):
        fld = load_field(directory / f"snapshot_{k:03d}.csv")
        h = 2.0 * np.sqrt(tau * fld.f)
        snaps.append(FlowSnapshot(tau=tau, field=fld, h=h, r_c=r_c,
                                  labels=labels))
    return snaps
