"""Pointwise differences of two rotationally symmetric flows on a shared
radial chart.

Both flows are pulled onto one fixed coordinate x, chosen as the first
flow's conical radius over its label grid; the second flow is re-sampled
onto x by cubic splines (exact at shared nodes, so coincident flows give
exactly-zero differences).  In this chart each metric reads

    g = b(x)^2 dx^2 + A(x)^2 ghat,     b = dr/dx,  A = a(r(x)),

with ghat the unit round metric, and the difference tensors come from
closed forms:

  * U = g - g~ from the component gaps (b^2 - b~^2, A^2 - A~^2);
  * V = connection difference, whose only nonzero warped-product symbols
    are the radial stretch b'/b, the sphere pull -A A'/b^2 (times ghat),
    and the mixed term A'/A;
  * S = curvature difference assembled from each flow's (k_rad, k_sph)
    pair, transported into the first flow's orthonormal frame through the
    frame ratios lam = b~/b and mu = A~/A.

All norms are measured in the first metric, so they reduce to weighted
sums of squares of orthonormal-frame scalars.  Derivative tensors (T, W
and the gradients of S and T) are produced by radial finite differencing
of those frame scalars rather than closed forms; checks involving them
carry a looser relative tolerance (1e-3) than the closed-form identities.
The same convention absorbs the connection-correction gap between the
covariant-derivative difference and the derivative of the difference: that
gap is a bounded multiple of |V| times the background curvature and is
swept into the empirical constants the checks report.

Time derivatives are columnwise in tau at fixed x with the same width-5
stencils the flow checks use; x is a fixed relabeling of the label grid,
so a fixed-x tau derivative is the backwards-flow derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError, ResamplingError
from .geometry import curvature_arrays
from .numutil import fd_derivative, fornberg_weights, linear_fit

__all__ = [
    "DifferenceFields",
    "EmpiricalBound",
    "DecayReport",
    "SymmetryReport",
    "difference_fields",
    "check_ode_inequalities",
    "verify_metric_evolution",
    "check_decay",
    "equivalence_factor",
    "check_symmetry",
    "save_diff_report",
]

EDGE = 3            # columns dropped at each end of every check (stencil skirt)
FD_REL_TOL = 1e-3   # looser tolerance class for finite-differenced tensors


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class DifferenceFields:
    """Norms of the difference tensors of two flows over a (tau, x) grid.

    Rows follow ``taus`` (ascending), columns the shared chart coordinate
    ``x``.  ``u/v/s`` norms come from closed forms, ``t/w`` and the two
    gradient norms from radial finite differences; all are measured in the
    first flow's metric.  ``components`` keeps the frame scalars the norms
    were built from so evolution checks can reuse them.
    """

    n: int
    taus: np.ndarray        # (ntau,)
    x: np.ndarray           # (nx,) shared chart = first flow's conical radius
    u_norm: np.ndarray      # (ntau, nx) |g - g~|
    v_norm: np.ndarray      # |connection difference|
    w_norm: np.ndarray      # |grad of connection difference|
    s_norm: np.ndarray      # |curvature difference|
    t_norm: np.ndarray      # |grad of curvature difference|
    grad_s_norm: np.ndarray
    grad_t_norm: np.ndarray
    curvature_scale: float = 0.0   # sup of r_c^2 |Rm| over both flows
    components: dict = dc_field(repr=False, default_factory=dict)

    @property
    def r_c(self) -> np.ndarray:
        return self.x

    def interior(self) -> slice:
        return slice(EDGE, self.x.size - EDGE)

    def norm_arrays(self) -> dict:
        return {"u": self.u_norm, "v": self.v_norm, "w": self.w_norm,
                "s": self.s_norm, "t": self.t_norm,
                "grad_s": self.grad_s_norm, "grad_t": self.grad_t_norm}


def _chart_rows(snapshots, x: np.ndarray, resample: bool):
    """Per-tau chart quantities (b, A, a', k_rad, k_sph, rc_rad, rc_sph) of
    one flow on the shared coordinate x, plus the arclength rows.

    Scalars are formed on the flow's native grid (where exact stored
    derivatives live) and then re-sampled; the chart factor b = dr/dx is
    differenced on x itself so both flows pass through the same operator.
    """
    rows = {key: [] for key in ("r", "b", "A", "a1", "k_rad", "k_sph",
                                "rc_rad", "rc_sph", "rm")}
    for sn in snapshots:
        fld = sn.field
        k_rad, k_sph, rc_rad, rc_sph, _, rm = curvature_arrays(fld)
        native = {"r": fld.r, "A": fld.a, "a1": fld.a1, "k_rad": k_rad,
                  "k_sph": k_sph, "rc_rad": rc_rad, "rc_sph": rc_sph, "rm": rm}
        if resample:
            xb = sn.r_c
            native = {key: CubicSpline(xb, val)(x) for key, val in native.items()}
        for key, val in native.items():
            rows[key].append(val)
        rows["b"].append(fd_derivative(x, rows["r"][-1]))
    return {key: np.stack(val) for key, val in rows.items()}


def _sorted_family(snapshots) -> list:
    return sorted(snapshots, key=lambda sn: sn.tau)


def _same_grid(g: np.ndarray, x: np.ndarray) -> bool:
    return g.shape == x.shape and bool(np.array_equal(g, x))


def difference_fields(flow_a, flow_b, chart: np.ndarray | None = None) -> DifferenceFields:
    """Difference norms of two snapshot families over a common chart.

    The chart defaults to the first flow's conical radius; pass the ``x``
    of an existing result to measure the reversed pair on identical
    abscissae.  Both families must carry the same tau set and dimension.
    Raises ResamplingError when the second flow's conical range does not
    cover the chart (values would need extrapolation), and when the tau
    sets disagree.
    """
    snaps_a = _sorted_family(flow_a)
    snaps_b = _sorted_family(flow_b)
    if not snaps_a or not snaps_b:
        raise ParameterError("need non-empty snapshot families")
    n = snaps_a[0].field.n
    if snaps_b[0].field.n != n:
        raise ParameterError("flows must share the sphere dimension")
    taus_a = np.array([sn.tau for sn in snaps_a])
    taus_b = np.array([sn.tau for sn in snaps_b])
    if taus_a.size != taus_b.size or np.max(np.abs(taus_a - taus_b)) > 1e-12:
        raise ResamplingError("snapshot families must share one tau grid")

    xa = np.asarray(snaps_a[0].r_c, dtype=float)
    xb = np.asarray(snaps_b[0].r_c, dtype=float)
    x = xa if chart is None else np.asarray(chart, dtype=float)
    if x.ndim != 1 or x.size < 2 * EDGE + 5 or not np.all(np.diff(x) > 0):
        raise ResamplingError("chart must be a strictly increasing grid of "
                              f"at least {2 * EDGE + 5} points")
    for name, rc in (("first", xa), ("second", xb)):
        if not np.all(np.diff(rc) > 0):
            raise ResamplingError(f"{name} flow's conical radius is not monotone")
        if rc[0] > x[0] + 1e-12 or rc[-1] < x[-1] - 1e-12:
            raise ResamplingError(
                f"{name} flow covers [{rc[0]:.4g}, {rc[-1]:.4g}] but the chart "
                f"needs [{x[0]:.4g}, {x[-1]:.4g}]")

    # flows already sitting on the chart skip the spline entirely, so
    # coincident flows subtract to literal zeros
    ra = _chart_rows(snaps_a, x, resample=not _same_grid(xa, x))
    rb = _chart_rows(snaps_b, x, resample=not _same_grid(xb, x))

    b, bt = ra["b"], rb["b"]
    A, At = ra["A"], rb["A"]
    lam = bt / b
    mu = At / A

    # metric gap in chart components, normed by the first metric
    p_u1 = b**2 - bt**2
    p_u2 = A**2 - At**2
    u_norm = np.sqrt((p_u1 / b**2) ** 2 + (n - 1) * (p_u2 / A**2) ** 2)

    # connection gap: radial stretch, sphere pull, mixed term
    db = np.stack([fd_derivative(x, row) for row in b])
    dbt = np.stack([fd_derivative(x, row) for row in bt])
    q1 = db / b - dbt / bt
    q2 = -(A * ra["a1"] / b - At * rb["a1"] / bt)
    q3 = ra["a1"] * b / A - rb["a1"] * bt / At
    v1 = q1 / b
    v2 = q2 * b / A**2
    v3 = q3 / b
    v_norm = _v_like_norm(n, v1, v2, v3)

    # curvature gap through the frame ratios
    s_mu = ra["k_rad"] - mu**2 * rb["k_rad"]
    s_lam = ra["k_rad"] - lam**2 * rb["k_rad"]
    s_sph = ra["k_sph"] - mu**2 * rb["k_sph"]
    s_norm = _s_like_norm(n, s_mu, s_lam, s_sph)

    def radial(rows_in):
        return np.stack([fd_derivative(x, row) for row in rows_in]) / b

    gs = tuple(radial(c) for c in (s_mu, s_lam, s_sph))
    grad_s = _s_like_norm(n, *gs)
    grad_t = _s_like_norm(n, *(radial(c) for c in gs))
    wc = tuple(radial(c) for c in (v1, v2, v3))
    w_norm = _v_like_norm(n, *wc)

    components = {
        "b": b, "bt": bt, "A": A, "At": At, "lam": lam, "mu": mu,
        "p_u1": p_u1, "p_u2": p_u2, "q1": q1, "q2": q2, "q3": q3,
        "v": (v1, v2, v3), "w": wc, "s": (s_mu, s_lam, s_sph),
        "rc_rad": ra["rc_rad"], "rc_rad_t": rb["rc_rad"],
        "rc_sph": ra["rc_sph"], "rc_sph_t": rb["rc_sph"],
    }
    inner = slice(EDGE, x.size - EDGE)
    scale = float(np.max(x[inner] ** 2
                         * np.maximum(ra["rm"], rb["rm"])[:, inner]))
    return DifferenceFields(n=n, taus=taus_a, x=x,
                            u_norm=u_norm, v_norm=v_norm, w_norm=w_norm,
                            s_norm=s_norm, t_norm=grad_s,
                            grad_s_norm=grad_s, grad_t_norm=grad_t,
                            curvature_scale=scale, components=components)


def _v_like_norm(n: int, c1, c2, c3) -> np.ndarray:
    """Norm of a connection-type tensor from its three frame scalars
    (multiplicities 1, n-1 sphere pairs, 2(n-1) mixed slots)."""
    return np.sqrt(c1**2 + (n - 1) * c2**2 + 2 * (n - 1) * c3**2)


def _s_like_norm(n: int, c_mu, c_lam, c_sph) -> np.ndarray:
    """Norm of a curvature-type tensor from its three frame scalars
    (2(n-1) slots for each radial flavor, 2(n-1)(n-2) sphere slots)."""
    return np.sqrt(2 * (n - 1) * (c_mu**2 + c_lam**2)
                   + 2 * (n - 1) * (n - 2) * c_sph**2)


# ---------------------------------------------------------------------------
# tau derivatives


def _tau_rows(taus: np.ndarray, rows: np.ndarray):
    """Columnwise d/dtau of a (ntau, nx) array by width-5 nonuniform
    stencils; returns (interior row indices, derivative rows)."""
    ntau = taus.size
    if ntau < 3:
        raise ParameterError("need at least 3 tau levels for a tau derivative")
    width = min(5, ntau)
    out = []
    idx = list(range(1, ntau - 1))
    for j in idx:
        lo = min(max(0, j - width // 2), ntau - width)
        wts = fornberg_weights(taus[lo:lo + width], float(taus[j]), 1)[..., 1]
        out.append(np.tensordot(wts, rows[lo:lo + width], axes=(0, 0)))
    return idx, np.stack(out)


@dataclass(frozen=True)
class EmpiricalBound:
    """Smallest admissible constant for one inequality over the grid."""

    name: str
    constant: float
    tau: float              # binding point
    r_c: float
    guard_ok: bool          # vanished right sides kept the left side tiny
    guard_max: float        # worst left side over guarded points


def _empirical(name, taus, x, lhs, rhs, abs_tol) -> EmpiricalBound:
    guarded = rhs <= abs_tol
    guard_max = float(np.max(lhs[guarded])) if np.any(guarded) else 0.0
    live = ~guarded
    if not np.any(live):
        return EmpiricalBound(name, 0.0, float(taus[0]), float(x[0]),
                              guard_max <= abs_tol, guard_max)
    ratio = np.where(live, lhs / np.where(live, rhs, 1.0), -np.inf)
    flat = int(np.argmax(ratio))
    i, j = np.unravel_index(flat, ratio.shape)
    return EmpiricalBound(name, float(ratio[i, j]), float(taus[i]), float(x[j]),
                          guard_max <= abs_tol, guard_max)


def check_ode_inequalities(diff: DifferenceFields, abs_tol: float = 1e-12) -> dict:
    """Empirical constants for the three evolution inequalities

        |dU/dtau| <= N |S|
        |dV/dtau| <= N (|T| + r_c^-2 |U|)
        |dW/dtau| <= N (|grad T| + r_c^-2 (|U| + |V|))

    over the interior grid.  Points where a right side falls below abs_tol
    must have the left side below abs_tol as well (guard_ok); they are
    excluded from the ratio.  Needs at least 3 tau levels.
    """
    taus, x = diff.taus, diff.x
    c = diff.components
    cols = diff.interior()
    idx, d_u1 = _tau_rows(taus, c["p_u1"])
    _, d_u2 = _tau_rows(taus, c["p_u2"])
    dq = [_tau_rows(taus, q)[1] for q in (c["q1"], c["q2"], c["q3"])]
    dw = [_tau_rows(taus, w)[1] for w in c["w"]]

    b, A = c["b"][idx], c["A"][idx]
    n = diff.n
    dt_u = np.sqrt((d_u1 / b**2) ** 2 + (n - 1) * (d_u2 / A**2) ** 2)
    dt_v = _v_like_norm(n, dq[0] / b, dq[1] * b / A**2, dq[2] / b)
    dt_w = _v_like_norm(n, *dw)

    inv_r2 = 1.0 / x[None, :] ** 2
    u, v = diff.u_norm[idx], diff.v_norm[idx]
    t, gt = diff.t_norm[idx], diff.grad_t_norm[idx]
    s = diff.s_norm[idx]
    mid = np.array(taus[idx])
    out = {
        "u": _empirical("u", mid, x[cols], dt_u[:, cols], s[:, cols], abs_tol),
        "v": _empirical("v", mid, x[cols], dt_v[:, cols],
                        (t + inv_r2 * u)[:, cols], abs_tol),
        "w": _empirical("w", mid, x[cols], dt_w[:, cols],
                        (gt + inv_r2 * (u + v))[:, cols], abs_tol),
    }
    return out


def verify_metric_evolution(diff: DifferenceFields) -> float:
    """Worst relative residual of the chart-component evolution identity

        d(b^2)/dtau = 2 rc_rad b^2,     d(A^2)/dtau = 2 rc_sph A^2,

    for both flows (their difference is the evolution law of U, which
    therefore holds to the same accuracy).  Residuals are scaled by the
    sup of the corresponding right side.
    """
    taus = diff.taus
    c = diff.components
    cols = diff.interior()
    worst = 0.0
    for b2, rc in (((c["b"]) ** 2, c["rc_rad"]), ((c["bt"]) ** 2, c["rc_rad_t"]),
                   ((c["A"]) ** 2, c["rc_sph"]), ((c["At"]) ** 2, c["rc_sph_t"])):
        idx, dt = _tau_rows(taus, b2)
        # an exactness check deserves the best stencils: keep rows whose
        # width-5 window is centered, unless too few tau levels exist
        keep = [k for k, j in enumerate(idx) if 2 <= j <= taus.size - 3]
        if keep:
            idx = [idx[k] for k in keep]
            dt = dt[keep]
        target = 2.0 * rc[idx] * b2[idx]
        # static components (flat factors) have a vanishing right side; an
        # absolute floor at 1e-6 of the metric scale keeps those meaningful
        scale = max(float(np.max(np.abs(target[:, cols]))),
                    1e-6 * float(np.max(np.abs(b2[idx][:, cols]))))
        resid = float(np.max(np.abs((dt - target)[:, cols]))) / scale
        worst = max(worst, resid)
    return worst


# ---------------------------------------------------------------------------
# decay


@dataclass(frozen=True)
class DecayReport:
    """Quadratically weighted sup of the combined difference norms."""

    sup: float
    tau: float              # location of the sup
    r_c: float
    profile: np.ndarray     # per-column max over tau of r_c^2 * (sum of norms)
    tail_slope: float       # log-log slope of the profile over its outer third
    curvature_scale: float  # sup of r_c^2 |Rm| over both flows
    diverging: bool         # weighted sup exceeds the curvature scale

    @property
    def bounded(self) -> bool:
        return not self.diverging


def check_decay(diff: DifferenceFields) -> DecayReport:
    """sup over the interior grid of r_c^2 * (|S|+|T|+|grad S|+|grad T|
    +|U|+|V|+|W|), with a per-column profile and a divergence flag.

    The same weight applied to either curvature alone gives the ambient
    scale sup r_c^2 |Rm|, the natural size of a controlled difference.
    A pair approaching one cone stays far below it; flows over different
    cones keep |U| of order one, so the weighted profile grows
    quadratically, crosses the scale, and trips the flag.  The tail slope
    of the profile is reported alongside as a diagnostic.
    """
    total = (diff.s_norm + diff.t_norm + diff.grad_s_norm + diff.grad_t_norm
             + diff.u_norm + diff.v_norm + diff.w_norm)
    weighted = diff.x[None, :] ** 2 * total
    cols = diff.interior()
    inner = weighted[:, cols]
    profile = np.max(inner, axis=0)
    i, j = np.unravel_index(int(np.argmax(inner)), inner.shape)
    xs = diff.x[cols]
    tail = slice(2 * xs.size // 3, None)
    if np.all(profile[tail] > 0):
        _, slope, _ = linear_fit(np.log(xs[tail]), np.log(profile[tail]))
    else:
        slope = -np.inf  # identically zero tail: nothing grows
    sup = float(inner[i, j])
    return DecayReport(sup=sup, tau=float(diff.taus[i]),
                       r_c=float(xs[j]), profile=profile,
                       tail_slope=float(slope),
                       curvature_scale=diff.curvature_scale,
                       diverging=bool(sup > diff.curvature_scale))


# ---------------------------------------------------------------------------
# symmetry


def equivalence_factor(diff: DifferenceFields) -> float:
    """Pointwise metric-equivalence constant kappa >= 1: every frame ratio
    between the two metrics lies in [1/kappa, kappa] over the interior."""
    cols = diff.interior()
    lam = diff.components["lam"][:, cols]
    mu = diff.components["mu"][:, cols]
    return float(max(np.max(lam), np.max(1.0 / lam), np.max(mu), np.max(1.0 / mu)))


@dataclass(frozen=True)
class SymmetryReport:
    """Pointwise excess of the reversed norms over their equivalence bound,
    relative to the norm scale (closed forms must sit at roundoff)."""

    kappa: float
    closed_excess: dict     # norm name -> worst relative excess, both ways
    fd_excess: dict

    def ok(self, closed_tol: float = 1e-10, fd_tol: float = FD_REL_TOL) -> bool:
        return (max(self.closed_excess.values()) <= closed_tol
                and max(self.fd_excess.values()) <= fd_tol)


# tensor weight: a frame change scales a k-slot tensor norm by at most kappa^k
_NORM_WEIGHTS = {"u": 2, "v": 3, "s": 4, "t": 5, "grad_s": 5, "w": 4, "grad_t": 6}
_CLOSED = ("u", "v", "s")


def check_symmetry(diff_ab: DifferenceFields, diff_ba: DifferenceFields) -> SymmetryReport:
    """Compare difference norms measured in either metric on one chart.

    Swapping the flows negates every difference tensor and swaps the
    measuring metric, so each norm can move by at most kappa**k (k the
    tensor's slot count).  The report carries the worst pointwise excess
    over that bound in units of the norm's sup; closed-form norms must sit
    at roundoff, finite-differenced ones inside the looser 1e-3 class.
    """
    if diff_ab.x.shape != diff_ba.x.shape or np.max(np.abs(diff_ab.x - diff_ba.x)) > 0:
        raise ResamplingError("symmetry check needs both differences on one chart")
    kappa = max(equivalence_factor(diff_ab), equivalence_factor(diff_ba))
    cols = diff_ab.interior()
    closed, fd = {}, {}
    for name, weight in _NORM_WEIGHTS.items():
        fwd = diff_ab.norm_arrays()[name][:, cols]
        rev = diff_ba.norm_arrays()[name][:, cols]
        scale = max(float(np.max(fwd)), float(np.max(rev))) + 1e-300
        bound = kappa ** weight
        excess = max(float(np.max(rev - bound * fwd)),
                     float(np.max(fwd - bound * rev))) / scale
        (closed if name in _CLOSED else fd)[name] = excess
    return SymmetryReport(kappa=kappa, closed_excess=closed, fd_excess=fd)


# ---------------------------------------------------------------------------
# reporting


def save_diff_report(directory, diff: DifferenceFields, bounds: dict | None = None,
                     decay: DecayReport | None = None,
                     evolution_residual: float | None = None):
    """Write per-tau norm tables (columns r,u,v,w,s,t) and a JSON summary
    of the empirical constants; returns the summary path."""
    from pathlib import Path

    from .reporting import dump_csv, dump_json

    directory = Path(directory)
    for i, tau in enumerate(diff.taus):
        rows = zip(diff.x, diff.u_norm[i], diff.v_norm[i], diff.w_norm[i],
                   diff.s_norm[i], diff.t_norm[i])
        dump_csv(directory / f"diff_tau_{i:03d}.csv",
                 ["r", "u", "v", "w", "s", "t"], rows)
    summary = {
        "n": diff.n,
        "taus": diff.taus,
        "chart_range": [float(diff.x[0]), float(diff.x[-1])],
        "sup_norms": {k: float(np.max(v[:, diff.interior()]))
                      for k, v in diff.norm_arrays().items()},
    }
    if bounds is not None:
        summary["empirical_constants"] = {k: b for k, b in bounds.items()}
    if decay is not None:
        summary["decay"] = {"sup": decay.sup, "tau": decay.tau, "r_c": decay.r_c,
                            "tail_slope": decay.tail_slope,
                            "curvature_scale": decay.curvature_scale,
                            "diverging": decay.diverging}
    if evolution_residual is not None:
        summary["evolution_residual"] = evolution_residual
    return dump_json(directory / "diff_summary.json", summary)
