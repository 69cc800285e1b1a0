"""End-to-end acceptance checks.

Each criterion bundles the quantities it measures with the bound every one
of them must satisfy, so a report always carries its tolerances next to its
numbers.  The test suite and the command line ``verify-all`` both call into
this module, keeping a single definition of what "working" means.

The heavyweight artifacts (the certified profile, its radial chart, the
snapshot families) are shared through :class:`AcceptanceContext`, which
builds each one lazily and caches it; a full :func:`run_all` therefore pays
for each construction once.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .geometry import (ConeSpec, WarpedMetricField, cone_deviation, cone_field,
                       curvature_arrays, gaussian_field, normalization_residual,
                       soliton_residual)
from .oracles import oracle_from_field
from .soliton import (construct_soliton, fit_asymptotics, normalize_potential,
                      shoot_profile, to_radial_chart)
from .flow import (snapshot_family, trajectory, trajectory_threshold,
                   verify_flow_identities, verify_rh_comparison)
from .weights import G1Params, G2Params, check_g2_bounds, g1_evaluate, g2_evaluate
from .carleman import (alpha0_scan, carleman_decay_ode_test, carleman_decay_pde_test,
                       carleman_ode_test, carleman_pde_test, make_standard_battery,
                       scan_thresholds)
from . import differences as diffs

__all__ = [
    "Check", "CriterionResult", "AcceptanceContext", "pair_difference",
    "check", "flag", "CRITERIA", "run_one", "run_all",
]

# empirical ceilings for the pair comparison constants; the measured values
# sit at less than half of these (they scale like the reciprocal of the
# difference magnitude, so the caps are specific to the certified pair)
N_CAPS = {"u": 50.0, "v": 20.0, "w": 150.0}


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    """One measured number next to the bound it must satisfy."""

    name: str
    value: float
    bound: float
    cmp: str
    passed: bool

    def line(self) -> str:
        mark = "ok  " if self.passed else "FAIL"
        return f"    {mark} {self.name}: {self.value:.6g} {self.cmp} {self.bound:.6g}"

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "cmp": self.cmp, "passed": self.passed}


def check(name: str, value, bound, cmp: str = "<") -> Check:
    value = float(value)
    bound = float(bound)
    ok = {"<": value < bound, "<=": value <= bound, ">": value > bound,
          ">=": value >= bound, "==": value == bound}[cmp]
    return Check(name=name, value=value, bound=bound, cmp=cmp, passed=bool(ok))


def flag(name: str, condition) -> Check:
    return check(name, 1.0 if condition else 0.0, 1.0, "==")


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    checks: tuple
    runtime: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        good = sum(c.passed for c in self.checks)
        return (f"{word} criterion {self.index:2d} {self.name:28s} "
                f"{good:2d}/{len(self.checks):2d} checks  [{self.runtime:6.1f}s]")

    def detail(self) -> str:
        return "\n".join([self.line()] + [c.line() for c in self.checks])

    def as_dict(self) -> dict:
        return {"index": self.index, "name": self.name, "passed": self.passed,
                "runtime_s": self.runtime,
                "checks": [c.as_dict() for c in self.checks]}


# ---------------------------------------------------------------------------
# shared artifacts
# ---------------------------------------------------------------------------

def pair_difference(fam_a, fam_b) -> diffs.DifferenceFields:
    """Difference of two snapshot families on the overlap of their conical
    charts (the extrapolated radii of distinct sources differ at the edges)."""
    xa, xb = fam_a[0].r_c, fam_b[0].r_c
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    keep = (xa >= lo) & (xa <= hi)
    return diffs.difference_fields(fam_a, fam_b, chart=xa[keep])


class AcceptanceContext:
    """Lazily built, cached artifacts shared by the criteria."""

    PAIR_TAUS = np.linspace(0.08, 0.12, 9)

    def __init__(self, certification_tol: float = 1e-6):
        self.certification_tol = float(certification_tol)
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # -- certified (3, 1/2) soliton and its charts --------------------------

    @property
    def certified(self):
        # the ladder itself can shoot loosely; the kept artifact cannot,
        # since derivative consistency of its chart feeds every later check
        return self._get("certified", lambda: normalize_potential(
            construct_soliton(3, 0.5, tol=self.certification_tol,
                              shoot_tol=1e-12)))

    @property
    def source(self) -> WarpedMetricField:
        return self._get("source", lambda: to_radial_chart(self.certified))

    @property
    def flat_source(self) -> WarpedMetricField:
        return self._get("flat_source",
                         lambda: gaussian_field(np.linspace(1.0, 420.0, 6000), 3))

    # -- snapshot families ---------------------------------------------------

    @property
    def fam_flow(self):
        return self._get("fam_flow", lambda: snapshot_family(
            self.source, (1.0, 0.5, 0.2, 0.1, 0.05, 0.01),
            labels=np.geomspace(4.0, 12.0, 40)))

    @property
    def fam_rh(self):
        return self._get("fam_rh", lambda: snapshot_family(
            self.source, np.geomspace(0.01, 0.1, 12),
            labels=np.geomspace(4.0, 40.0, 48)))

    @property
    def fam_growth(self):
        return self._get("fam_growth", lambda: snapshot_family(
            self.source, np.linspace(0.02, 1.0, 49),
            labels=np.geomspace(4.0, 32.0, 768)))

    @property
    def fam_growth_flat(self):
        return self._get("fam_growth_flat", lambda: snapshot_family(
            self.flat_source, np.linspace(0.02, 1.0, 49),
            labels=np.geomspace(4.0, 32.0, 768)))

    @property
    def fam_decay(self):
        return self._get("fam_decay", lambda: snapshot_family(
            self.source, np.geomspace(0.052, 0.3, 64) - 0.05,
            labels=np.geomspace(4.0, 32.0, 192)))

    def weight_trio(self, dt: float, lo: float, hi: float, tau0: float = 0.1):
        """Snapshots at tau0 -+ dt sharing one label grid, ascending tau."""
        def build():
            fam = snapshot_family(self.source, (tau0 - dt, tau0, tau0 + dt),
                                  labels=np.geomspace(lo, hi, 96))
            return tuple(sorted(fam, key=lambda sn: sn.tau))
        return self._get(f"trio_{dt:g}_{lo:g}_{hi:g}", build)

    # -- pair of anchored profiles for the difference criterion --------------

    def _pair_family(self, s0: float, labels):
        prof = normalize_potential(shoot_profile(3, 0.5, S0=s0, per_decade=400))
        return snapshot_family(to_radial_chart(prof), self.PAIR_TAUS, labels=labels)

    def pair_families(self, labels):
        base = 2.0 * self.certified.S0
        key = f"pair_{labels[0]:g}_{labels[-1]:g}_{labels.size}"
        return self._get(key, lambda: (self._pair_family(base, labels),
                                       self._pair_family(2.0 * base, labels)))


# ---------------------------------------------------------------------------
# the criteria
# ---------------------------------------------------------------------------

def flat_family_regression(ctx: AcceptanceContext):
    """All dimensions 3..8 with unit aperture collapse to the flat shrinker."""
    checks = []
    for n in range(3, 9):
        t0 = time.perf_counter()
        prof = normalize_potential(construct_soliton(n, 1.0))
        dt = time.perf_counter() - t0
        checks.append(check(f"n{n}_flatness", np.max(np.abs(prof.w - 1.0)), 1e-9))
        checks.append(check(f"n{n}_potential", np.max(np.abs(prof.f - prof.s / 4.0)), 1e-9))
        checks.append(check(f"n{n}_normalization", prof.normalization_residual, 1e-10))
        checks.append(check(f"n{n}_runtime_s", dt, 5.0))
    return checks


def tail_coefficients(ctx: AcceptanceContext):
    """First tail coefficients and remainder orders of two reference profiles."""
    checks = []
    for n, alpha, c1_ref in ((3, 0.5, -0.5), (4, 2.0, 8.0)):
        t0 = time.perf_counter()
        # anchor far above the fit window: the anchoring gauge perturbs the
        # potential tail by O(s/S0), which must stay below the 1/s remainder
        prof = normalize_potential(shoot_profile(n, alpha, S0=819200.0))
        w_fit, f_fit = fit_asymptotics(prof, (100.0, 400.0))
        dt = time.perf_counter() - t0
        tag = f"n{n}_a{alpha:g}"
        checks.append(check(f"{tag}_c1_relerr",
                            abs(w_fit.c1 - c1_ref) / abs(c1_ref), 0.05))
        checks.append(check(f"{tag}_w_order", w_fit.residual_order, 1.8, ">="))
        checks.append(check(f"{tag}_f_order", f_fit.residual_order, 0.8, ">="))
        checks.append(check(f"{tag}_runtime_s", dt, 60.0))
    return checks


def soliton_certification(ctx: AcceptanceContext):
    """Certified (3, 1/2) profile solves both equations on the middle half."""
    field = ctx.source
    m = field.r.size
    sl = slice(m // 4, 3 * m // 4)
    sub = WarpedMetricField(n=field.n, r=field.r[sl], a=field.a[sl],
                            a1=field.a1[sl], a2=field.a2[sl], f=field.f[sl],
                            f1=field.f1[sl], f2=field.f2[sl], alpha=field.alpha)
    rad, sph = soliton_residual(sub)
    return [
        check("cauchy_increment", ctx.certified.cauchy_history[-1],
              ctx.certification_tol),
        check("radial_residual", rad, 1e-6),
        check("spherical_residual", sph, 1e-6),
        check("normalization_residual", normalization_residual(sub), 1e-6),
    ]


def _soliton_patch(ctx: AcceptanceContext, r_lo: float, r_hi: float):
    """Warp function of the certified soliton over [r_lo, r_hi], re-solved
    from the arclength form of the soliton equations so the patch is smooth
    to integrator precision (the sampled chart carries enough resampling
    jitter to drown a second-derivative probe).

    Returns (a_func, field): the dense-output warp callable and a sampled
    field whose a2 comes from the equation itself."""
    src = ctx.source
    n = src.n
    i1 = int(np.searchsorted(src.r, r_hi))

    def second(a, p, q):
        return ((n - 2) * (1.0 - p * p) + a * p * q - 0.5 * a * a) / a

    def rhs(r, y):
        a, p, q = y
        a2 = second(a, p, q)
        return (p, a2, 0.5 + (n - 1) * a2 / a)

    # inward: the outward problem amplifies seed error, the inward one
    # contracts it (same reason construction anchors at the far end)
    from scipy.integrate import solve_ivp
    sol = solve_ivp(rhs, (float(src.r[i1]), r_lo),
                    (float(src.a[i1]), float(src.a1[i1]), float(src.f1[i1])),
                    method="DOP853", rtol=1e-13, atol=1e-13, dense_output=True)
    r = np.linspace(r_lo + 0.25, float(src.r[i1]) - 0.25, 4000)
    a, p, q = sol.sol(r)
    field = WarpedMetricField(n=n, r=r, a=a, a1=p, a2=second(a, p, q))
    return (lambda rr: sol.sol(rr)[0]), field


def curvature_oracle_agreement(ctx: AcceptanceContext):
    """Closed curvature formulas against the coordinate finite-difference
    oracle at ten random interior points of two backgrounds."""
    from .oracles import CoordinateCurvatureOracle
    checks = []
    rng = np.random.default_rng(7)
    cone = cone_field(ConeSpec(3, 0.5), np.linspace(0.5, 24.0, 600))
    root = np.sqrt(0.5)
    a_sol, patch = _soliton_patch(ctx, 2.0, 60.0)
    for tag, field, a_func in (("cone", cone, lambda rr: root * rr),
                               ("soliton", patch, a_sol)):
        oracle = CoordinateCurvatureOracle(a_func, field.n)
        _, _, rc_rad, rc_sph, scal, rm = curvature_arrays(field)
        m = field.r.size
        idx = rng.choice(np.arange(m // 8, 7 * m // 8), size=10, replace=False)
        worst = 0.0
        for i in idx:
            got = oracle.curvature(float(field.r[i]))
            # components can vanish identically (flat radial direction of a
            # cone), so measure each against the local curvature norm
            for closed, probed in zip((rc_rad[i], rc_sph[i], scal[i], rm[i]), got):
                worst = max(worst, abs(closed - probed)
                            / max(abs(closed), 1e-3 * rm[i]))
        checks.append(check(f"{tag}_rel_err_10pt", worst, 1e-5))
    return checks


def flow_identities(ctx: AcceptanceContext):
    """Snapshot family solves the time-scaled equations; trajectories obey
    the dyadic sandwich; the family settles onto the cone monotonically."""
    t0 = time.perf_counter()
    fam = ctx.fam_flow
    rep = verify_flow_identities(fam)
    checks = [
        check("gradient_identity", rep.gradient, 1e-6),
        check("soliton_identity", rep.soliton, 1e-6),
        check("tau_derivative_identity", rep.tau_derivative, 1e-4),
    ]
    field = ctx.source
    thr = trajectory_threshold(field)
    margin = np.inf
    for r0 in np.geomspace(max(1.05 * thr, thr + 0.5), 60.0, 6):
        rec = trajectory(field, r0, s_end=2.0)
        grow = np.exp(rec.s_samples / 2.0)
        low = rec.r_s - ((rec.r0 - 1.0) * grow + 1.0)
        high = ((rec.r0 + 1.0) * grow - 1.0) - rec.r_s
        margin = min(margin, float(np.min(low)), float(np.min(high)))
    checks.append(check("sandwich_margin", margin, 0.0, ">="))
    cone = ConeSpec(3, 0.5)
    picked = [sn for sn in fam
              if any(abs(sn.tau - t) < 1e-12 for t in (1.0, 0.5, 0.1, 0.01))]
    devs = [cone_deviation(sn.field, cone, b=6.0).value for sn in picked]
    checks.append(check("cone_settling_step", float(np.max(np.diff(devs))), 0.0, "<"))
    checks.append(check("runtime_s", time.perf_counter() - t0, 120.0))
    return checks


def h_field_exponents(ctx: AcceptanceContext):
    """Power laws of the conical-radius comparison over a decade in each of
    backward time and radius."""
    rep = verify_rh_comparison(ctx.fam_rh)
    return [
        check("tau_exponent_low", rep.tau_exponent, 1.8, ">="),
        check("tau_exponent_high", rep.tau_exponent, 2.2, "<="),
        check("rc_exponent", rep.rc_exponent, -2.7, "<="),
        flag("c_bound_finite", np.isfinite(rep.c_bound)),
    ]


def weight_fd_crosschecks(ctx: AcceptanceContext):
    """Closed drift terms of both weights against finite differences, with
    the agreement improving under time-step refinement."""
    checks = []
    g1p = G1Params(alpha=1.0, tau0=1.0, delta=0.5)
    g2p = G2Params(a=0.125, rho=12.0, gamma=1.0 / 12.0, n=3)
    # each weight gets its own step regime and window: the growth drift is so
    # smooth in time that small steps land below the evaluation noise floor,
    # while the shell drift curves sharply near its center and needs fine
    # steps on labels close to the shell radius before truncation is small
    plans = (
        ("growth", (8e-3, 4e-3), (4.0, 32.0),
         lambda mid, nb: g1_evaluate(mid, g1p, tau_neighbors=nb)),
        ("shell", (2.5e-4, 1.25e-4), (8.0, 18.0),
         lambda mid, nb: g2_evaluate(mid, g2p, tau_neighbors=nb)),
    )
    for tag, dts, (lo_lab, hi_lab), evaluate in plans:
        errs = []
        for dt in dts:
            lo, mid, hi = ctx.weight_trio(dt, lo_lab, hi_lab)
            ev = evaluate(mid, (lo, hi))
            sl = ev.interior()
            floor = 1e-3 * np.max(np.abs(ev.F_closed[sl]))
            err = float(np.max(np.abs(ev.F_fd[sl] - ev.F_closed[sl])
                               / (np.abs(ev.F_closed[sl]) + floor)))
            errs.append(err)
            checks.append(check(f"{tag}_F_rel_dt{dt:g}", err, 1e-4))
        checks.append(check(f"{tag}_refines", errs[1], errs[0], "<"))
    return checks


def threshold_scan(ctx: AcceptanceContext):
    """Every weight inequality holds with positive margin beyond a finite
    radius across the whole parameter grid, on both backgrounds."""
    t0 = time.perf_counter()
    checks = []
    g1_grid = [G1Params(alpha=a, tau0=1.0, delta=d)
               for a in (1.0, 10.0, 100.0) for d in (0.25, 0.5, 0.75)]
    for tag, fam in (("curved", ctx.fam_growth), ("flat", ctx.fam_growth_flat)):
        g2_grid = []
        for a in (0.01, 0.1):
            base = check_g2_bounds(fam, G2Params(a=a, rho=12.0, gamma=1.0 / 12.0,
                                                 n=3)).hess_threshold
            g2_grid += [G2Params(a=a, rho=m * base, gamma=1.0 / 12.0, n=3)
                        for m in (2.0, 4.0)]
        entries = scan_thresholds(fam, g1_grid, g2_grid)
        radii, margins, consts = [], [], []
        for entry in entries:
            radii += list(entry["threshold_radius"].values())
            margins += [v for k, v in entry["margins"].items()
                        if k != "shell_backheat_constant"]
            consts.append(entry["margins"]["shell_backheat_constant"])
        checks.append(check(f"{tag}_entries", len(entries), 36, "=="))
        checks.append(flag(f"{tag}_radii_finite", np.all(np.isfinite(radii))))
        checks.append(check(f"{tag}_worst_margin", min(margins), 0.0, ">="))
        checks.append(flag(f"{tag}_constants_finite", np.all(np.isfinite(consts))))
    checks.append(check("runtime_s", time.perf_counter() - t0, 300.0))
    return checks


def inequality_battery(ctx: AcceptanceContext):
    """All four integral inequalities pass a twelve-section battery from the
    recorded exponent on, strengthening monotonically over a decade."""
    checks = []
    growth_sections = make_standard_battery(5.0, 28.0, tau0=1.0)
    decay_sections = make_standard_battery(5.0, 28.0, tau0=0.25)
    g2p = G2Params(a=0.05, rho=12.0, gamma=1.0 / 12.0, n=3)

    def growth_pde(al):
        return lambda sn, sec: carleman_pde_test(
            sn, sec, G1Params(alpha=al, tau0=1.0, delta=0.5))

    def growth_ode(al):
        return lambda sn, sec: carleman_ode_test(
            sn, sec, G1Params(alpha=al, tau0=1.0, delta=0.5))

    def decay_pde(al):
        return lambda sn, sec: carleman_decay_pde_test(sn, sec, g2p, al)

    def decay_ode(al):
        return lambda sn, sec: carleman_decay_ode_test(sn, sec, g2p, al, 0.25)

    scans = (("pde_growth", ctx.fam_growth, growth_sections, 1.0, growth_pde),
             ("ode_growth", ctx.fam_growth, growth_sections, 1.0, growth_ode),
             ("pde_decay", ctx.fam_decay, decay_sections, 4.0, decay_pde),
             ("ode_decay", ctx.fam_decay, decay_sections, 1.0, decay_ode))
    for tag, fam, sections, a0, make in scans:
        rep = alpha0_scan(fam, sections, np.geomspace(a0, 10.0 * a0, 5), make)
        checks.append(check(f"{tag}_sections", len(sections), 12, ">="))
        checks.append(flag(f"{tag}_found", rep.found))
        checks.append(check(f"{tag}_alpha0", rep.alpha0, a0, "<="))
        checks.append(check(f"{tag}_min_margin", float(rep.margins.min()), 0.0, ">="))
        checks.append(flag(f"{tag}_monotone", rep.excess_increasing))
    return checks


def difference_certification(ctx: AcceptanceContext):
    """Coincident flows difference to exact zeros; the certified anchored
    pair stays below the certification tolerance with finite comparison
    constants, a bounded weighted gap, and a closed evolution residual."""
    checks = []
    tol = ctx.certification_tol
    fam_a, fam_b = ctx.pair_families(np.geomspace(4.0, 28.0, 256))
    zero = diffs.difference_fields(fam_a, fam_a)
    zero_max = max(float(np.max(np.abs(v))) for v in zero.norm_arrays().values())
    checks.append(check("coincident_zero", zero_max, 0.0, "<="))
    diff = pair_difference(fam_a, fam_b)
    sl = diff.interior()
    sup = max(float(np.max(v[:, sl])) for v in diff.norm_arrays().values())
    checks.append(check("pair_weighted_sup", sup, tol))
    for key, bound in diffs.check_ode_inequalities(diff).items():
        checks.append(check(f"N_{key}", bound.constant, N_CAPS[key]))
        checks.append(flag(f"N_{key}_guard", bound.guard_ok))
    dec = diffs.check_decay(diff)
    checks.append(check("decay_weighted_sup", dec.sup, dec.curvature_scale))
    checks.append(flag("decay_bounded", not dec.diverging))
    fam_ae, fam_be = ctx.pair_families(np.geomspace(4.0, 16.0, 256))
    ev = diffs.verify_metric_evolution(pair_difference(fam_ae, fam_be))
    checks.append(check("evolution_residual", ev, 1e-6))
    return checks


CRITERIA = (
    ("flat-family-regression", flat_family_regression),
    ("tail-coefficients", tail_coefficients),
    ("soliton-certification", soliton_certification),
    ("curvature-oracle-agreement", curvature_oracle_agreement),
    ("flow-identities", flow_identities),
    ("h-field-exponents", h_field_exponents),
    ("weight-fd-crosschecks", weight_fd_crosschecks),
    ("threshold-scan", threshold_scan),
    ("inequality-battery", inequality_battery),
    ("difference-certification", difference_certification),
)


def run_one(ctx: AcceptanceContext, index: int) -> CriterionResult:
    """Run criterion `index` (1-based) and wrap its checks with a timing."""
    name, fn = CRITERIA[index - 1]
    t0 = time.perf_counter()
    checks = tuple(fn(ctx))
    return CriterionResult(index=index, name=name, checks=checks,
                           runtime=time.perf_counter() - t0)


def run_all(ctx: AcceptanceContext | None = None, indices=None, stream=None):
    """Run the requested criteria (all ten by default), emitting one
    PASS/FAIL line each to the file-like `stream`; returns the results."""
    ctx = ctx or AcceptanceContext()
    results = []
    for index in indices or range(1, len(CRITERIA) + 1):
        res = run_one(ctx, index)
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
            if not res.passed:
                for c in res.checks:
                    if not c.passed:
                        print(c.line(), file=stream, flush=True)
    return results
