"""Curvature, Hessians, and cone comparison for rotationally symmetric metrics.

All metrics live in the arclength gauge

    g = dr^2 + a(r)^2 g_{S^{n-1}},

so curvature reduces to the two sectional values

    k_rad = -a''/a          (planes containing the radial direction)
    k_sph = (1-(a')^2)/a^2  (planes tangent to the sphere),

and every tensor of interest is diagonal with a radial and a spherical
eigenvalue.  Fields produced by the ODE construction carry analytic
derivatives; fields read from file reconstruct missing derivative columns
with 4th-order finite differences.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidFieldError
from .numutil import fd_derivative

__all__ = [
    "ConeSpec",
    "WarpedMetricField",
    "CurvaturePointData",
    "ConeDeviationReport",
    "cone_field",
    "gaussian_field",
    "curvature_arrays",
    "ricci_of_field",
    "hessian_of_radial",
    "laplacian_of_radial",
    "with_fd_second_derivatives",
    "soliton_residual",
    "normalization_residual",
    "cone_deviation",
    "radial_distance",
    "save_field",
    "load_field",
    "field_from_gauge",
]

# one-sided stencils at the grid edges are less accurate; residual sups
# are taken over the interior
EDGE_MARGIN = 3


@dataclass(frozen=True)
class ConeSpec:
    """Regular cone dr^2 + alpha r^2 g_{S^{n-1}}."""

    n: int
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise InvalidFieldError(f"dimension must be an integer >= 3, got {self.n}")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise InvalidFieldError(f"aperture must be positive and finite, got {self.alpha}")

    @property
    def is_flat(self) -> bool:
        return self.alpha == 1.0

    def k_sph(self, r):
        return (1.0 - self.alpha) / (self.alpha * np.asarray(r, dtype=float) ** 2)

    def scalar_curvature(self, r):
        return (self.n - 1) * (self.n - 2) * self.k_sph(r)

    def rm_norm(self, r):
        return np.sqrt(2.0 * (self.n - 1) * (self.n - 2)) * np.abs(self.k_sph(r))


@dataclass(frozen=True)
class WarpedMetricField:
    """Sampled rotationally symmetric metric (and optional soliton potential).

    r is strictly increasing arclength; a, a1, a2 are the warp function and
    its first two r-derivatives; f, f1, f2 the potential likewise.  alpha
    records the aperture of the asymptotic cone when known.
    """

    n: int
    r: np.ndarray
    a: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    f: np.ndarray | None = None
    f1: np.ndarray | None = None
    f2: np.ndarray | None = None
    alpha: float | None = None

    def __post_init__(self):
        arrays = [self.r, self.a, self.a1, self.a2]
        if self.has_potential:
            arrays += [self.f, self.f1, self.f2]
        for arr in arrays:
            if arr is not None and arr.shape != self.r.shape:
                raise InvalidFieldError("all field grids must share one shape")
        if self.r.ndim != 1 or self.r.size < 5:
            raise InvalidFieldError("need a 1-d grid of at least 5 samples")
        if not np.all(np.diff(self.r) > 0):
            raise InvalidFieldError("r grid must be strictly increasing")
        if not np.all(self.a > 0):
            raise InvalidFieldError("warp function must be positive")

    @property
    def has_potential(self) -> bool:
        return self.f is not None

    def require_potential(self):
        if not self.has_potential or self.f1 is None or self.f2 is None:
            raise InvalidFieldError("operation requires a field with potential f, f1, f2")

    def validate_derivatives(self, fd_tol: float = 1e-4) -> float:
        """Check stored first derivatives against finite differences of the
        sampled values; returns the worst relative deviation found."""
        worst = _fd_consistency(self.r, self.a, self.a1)
        if self.has_potential:
            worst = max(worst, _fd_consistency(self.r, self.f, self.f1))
        if worst > fd_tol:
            raise InvalidFieldError(
                f"stored derivatives deviate from finite differences by {worst:.3e} "
                f"(tolerance {fd_tol:.1e})")
        return worst

    def interior(self) -> slice:
        return slice(EDGE_MARGIN, self.r.size - EDGE_MARGIN)


def _fd_consistency(x, y, y1) -> float:
    fd = fd_derivative(x, y, 1)
    scale = np.max(np.abs(y1)) + 1e-30
    sl = slice(EDGE_MARGIN, x.size - EDGE_MARGIN)
    return float(np.max(np.abs(fd[sl] - y1[sl])) / scale)


@dataclass(frozen=True)
class CurvaturePointData:
    r: float
    k_rad: float
    k_sph: float
    rc_rad: float
    rc_sph: float
    R: float
    rm_norm: float


@dataclass(frozen=True)
class ConeDeviationReport:
    value: float                 # sup_{r >= b} |a^2/(alpha r^2) - 1|
    b: float
    b_grid: np.ndarray           # all tail radii as candidate cutoffs
    sup_sequence: np.ndarray     # b -> sup_{r >= b} deviation
    r2_bound: float              # sup of r^2 * deviation (finite iff quadratic decay)


def cone_field(cone: ConeSpec, r_grid: np.ndarray) -> WarpedMetricField:
    r = np.asarray(r_grid, dtype=float)
    root = np.sqrt(cone.alpha)
    return WarpedMetricField(n=cone.n, r=r, a=root * r, a1=np.full_like(r, root),
                             a2=np.zeros_like(r), alpha=cone.alpha)


def gaussian_field(r_grid: np.ndarray, n: int) -> WarpedMetricField:
    """Flat shrinker: a = r, f = r^2/4."""
    r = np.asarray(r_grid, dtype=float)
    return WarpedMetricField(n=n, r=r, a=r.copy(), a1=np.ones_like(r), a2=np.zeros_like(r),
                             f=r**2 / 4.0, f1=r / 2.0, f2=np.full_like(r, 0.5), alpha=1.0)


def curvature_arrays(field: WarpedMetricField):
    """(k_rad, k_sph, rc_rad, rc_sph, R, rm_norm) over the whole grid."""
    a, a1, a2 = field.a, field.a1, field.a2
    n = field.n
    k_rad = -a2 / a
    k_sph = (1.0 - a1**2) / a**2
    rc_rad = (n - 1) * k_rad
    rc_sph = ((n - 2) - a * a2 - (n - 2) * a1**2) / a**2
    R = (n - 1) * (-2.0 * a2 / a + (n - 2) * (1.0 - a1**2) / a**2)
    rm_norm = np.sqrt(4.0 * (n - 1) * k_rad**2 + 2.0 * (n - 1) * (n - 2) * k_sph**2)
    return k_rad, k_sph, rc_rad, rc_sph, R, rm_norm


def ricci_of_field(field: WarpedMetricField, index: int) -> CurvaturePointData:
    a = field.a[index]
    if not a > 0:
        raise InvalidFieldError(f"warp function nonpositive at index {index}")
    k_rad, k_sph, rc_rad, rc_sph, R, rm = (arr[index] for arr in curvature_arrays(field))
    return CurvaturePointData(r=float(field.r[index]), k_rad=float(k_rad), k_sph=float(k_sph),
                              rc_rad=float(rc_rad), rc_sph=float(rc_sph), R=float(R),
                              rm_norm=float(rm))


def hessian_of_radial(field: WarpedMetricField, phi, phi1, phi2):
    """Eigenvalues of the Hessian of a radial function w.r.t. g:
    (phi'', (a'/a) phi')."""
    del phi  # the Hessian depends only on the derivatives
    hess_rad = np.asarray(phi2, dtype=float)
    hess_sph = (field.a1 / field.a) * np.asarray(phi1, dtype=float)
    return hess_rad, hess_sph


def laplacian_of_radial(field: WarpedMetricField, phi1, phi2):
    return np.asarray(phi2, dtype=float) + (field.n - 1) * (field.a1 / field.a) * np.asarray(phi1, dtype=float)


def with_fd_second_derivatives(field: WarpedMetricField) -> WarpedMetricField:
    """Copy of the field whose second derivatives (and, for the potential,
    first derivative) are re-derived by finite differences of the lower-order
    data.  Residual checks use this so that they measure genuine
    self-consistency of the grid instead of algebraic identities between
    analytically propagated derivatives."""
    a2 = fd_derivative(field.r, field.a1, 1)
    if field.has_potential:
        f1 = fd_derivative(field.r, field.f, 1)
        f2 = fd_derivative(field.r, field.f1, 1)
        return replace(field, a2=a2, f1=f1, f2=f2)
    return replace(field, a2=a2)


def soliton_residual(field: WarpedMetricField, constant: float = 0.5):
    """Sup-norm residuals of the two soliton equations

        -(n-1) a''/a + f'' = constant,   rc_sph + (a'/a) f' = constant,

    with all second derivatives (and f') rebuilt by finite differences so a
    fabricated or perturbed field cannot pass by construction.  Returns
    (sup_radial, sup_spherical) over the interior grid."""
    field.require_potential()
    fd = with_fd_second_derivatives(field)
    n = field.n
    sl = field.interior()
    rad = -(n - 1) * fd.a2 / fd.a + fd.f2 - constant
    rc_sph = ((n - 2) - fd.a * fd.a2 - (n - 2) * fd.a1**2) / fd.a**2
    sph = rc_sph + (fd.a1 / fd.a) * fd.f1 - constant
    return float(np.max(np.abs(rad[sl]))), float(np.max(np.abs(sph[sl])))


def normalization_residual(field: WarpedMetricField) -> float:
    """sup | R + |grad f|^2 - f | with |grad f|^2 = (f')^2 and R rebuilt from
    finite-differenced a''."""
    field.require_potential()
    fd = with_fd_second_derivatives(field)
    n = field.n
    R = (n - 1) * (-2.0 * fd.a2 / fd.a + (n - 2) * (1.0 - fd.a1**2) / fd.a**2)
    resid = R + field.f1**2 - field.f
    sl = field.interior()
    return float(np.max(np.abs(resid[sl])))


def cone_deviation(field: WarpedMetricField, cone: ConeSpec, b: float,
                   tail_tol: float = 0.05) -> ConeDeviationReport:
    """Deviation of the spherical metric coefficient from the cone's:
    sup_{r>=b} |a^2/(alpha r^2) - 1| (radial parts coincide in arclength
    gauge), plus the whole cutoff -> sup curve and the quadratic-decay bound."""
    r, a = field.r, field.a
    tail = np.sqrt(cone.alpha) * r[-1]
    if abs(a[-1] / tail - 1.0) > tail_tol:
        raise DomainError(
            f"field tail a/r = {a[-1] / r[-1]:.4f} has not settled to sqrt(alpha) = "
            f"{np.sqrt(cone.alpha):.4f}; extend the domain")
    if b > r[-1]:
        raise DomainError(f"cutoff b={b} beyond grid end {r[-1]}")
    dev = np.abs(a**2 / (cone.alpha * r**2) - 1.0)
    # suffix running maximum: sup over r >= each grid point
    suffix = np.maximum.accumulate(dev[::-1])[::-1]
    i0 = int(np.searchsorted(r, b))
    return ConeDeviationReport(value=float(suffix[i0]), b=float(b), b_grid=r.copy(),
                               sup_sequence=suffix,
                               r2_bound=float(np.max(r**2 * dev)))


def radial_distance(field: WarpedMetricField, i: int, j: int) -> float:
    """Arclength distance between grid positions (exact in this gauge)."""
    return float(abs(field.r[i] - field.r[j]))


# ---------------------------------------------------------------------------
# file format: CSV `r,a,a1,a2[,f,f1,f2]` + JSON sidecar {n, alpha, gauge}
# ---------------------------------------------------------------------------

def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def save_field(field: WarpedMetricField, path) -> Path:
    path = Path(path)
    cols = ["r", "a", "a1", "a2"]
    data = [field.r, field.a, field.a1, field.a2]
    if field.has_potential:
        cols += ["f", "f1", "f2"]
        data += [field.f, field.f1, field.f2]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in zip(*data):
            writer.writerow([f"{v:.17g}" for v in row])
    sidecar = {"n": field.n, "alpha": field.alpha, "gauge": "arclength"}
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
    return path


def load_field(path) -> WarpedMetricField:
    path = Path(path)
    try:
        with open(_sidecar_path(path)) as fh:
            meta = json.load(fh)
    except FileNotFoundError as exc:
        raise InvalidFieldError(f"missing JSON sidecar for {path}") from exc
    if meta.get("gauge", "arclength") != "arclength":
        raise InvalidFieldError(
            f"gauge {meta.get('gauge')!r} not storable; convert via field_from_gauge first")
    raw = np.genfromtxt(path, delimiter=",", names=True)
    names = raw.dtype.names
    r = np.asarray(raw["r"], dtype=float)

    def col(name):
        return np.asarray(raw[name], dtype=float) if name in names else None

    a = col("a")
    if a is None:
        raise InvalidFieldError("field CSV must provide columns r and a")
    a1 = col("a1")
    a2 = col("a2")
    # derivative columns missing on ingestion are rebuilt by 4th-order FD
    if a1 is None:
        a1 = fd_derivative(r, a, 1)
    if a2 is None:
        a2 = fd_derivative(r, a1, 1)
    f, f1, f2 = col("f"), col("f1"), col("f2")
    if f is not None:
        if f1 is None:
            f1 = fd_derivative(r, f, 1)
        if f2 is None:
            f2 = fd_derivative(r, f1, 1)
    return WarpedMetricField(n=int(meta["n"]), r=r, a=a, a1=a1, a2=a2, f=f, f1=f1, f2=f2,
                             alpha=meta.get("alpha"))


def field_from_gauge(rho: np.ndarray, g_rr: np.ndarray, a: np.ndarray, n: int,
                     f: np.ndarray | None = None, alpha: float | None = None,
                     r_base: float = 0.0) -> WarpedMetricField:
    """Ingest a field given in an arbitrary radial gauge g = g_rr drho^2 + a^2 g_S:
    reparametrize by arclength r = integral of sqrt(g_rr) and rebuild
    derivatives by finite differences."""
    rho = np.asarray(rho, dtype=float)
    g_rr = np.asarray(g_rr, dtype=float)
    if np.any(g_rr <= 0):
        raise InvalidFieldError("g_rr must be positive")
    from scipy.integrate import cumulative_simpson

    r = r_base + cumulative_simpson(np.sqrt(g_rr), x=rho, initial=0.0)
    a1 = fd_derivative(r, np.asarray(a, dtype=float), 1)
    a2 = fd_derivative(r, a1, 1)
    f1 = f2 = None
    if f is not None:
        f1 = fd_derivative(r, np.asarray(f, dtype=float), 1)
        f2 = fd_derivative(r, f1, 1)
    return WarpedMetricField(n=n, r=r, a=np.asarray(a, dtype=float), a1=a1, a2=a2,
                             f=None if f is None else np.asarray(f, dtype=float),
                             f1=f1, f2=f2, alpha=alpha)
