"""Admissible solutions of S2(D^2 u) = f(u) with zero boundary data.

Three solvers:

* `solve_radial` - balls in any dimension N >= 2.  For radial u the Hessian
  eigenvalues are u'' and u'/r (multiplicity N-1), so
      S2 = (N-1) u'' u'/r + C(N-1, 2) (u'/r)^2,
  and multiplying by 2 r^{N-1}/(N-1) turns the equation into
      d/dr [ r^{N-2} (u')^2 ] = (2/(N-1)) r^{N-1} f(u),
  a monotone integral fixed point solved by Picard iteration.  Cumulative
  integrals use one-sided quartic windows (smooth error from node to node)
  with a series-corrected origin block, so that dividing by powers of r and
  differentiating the result keeps defect measurements clean near r = 0.

* `solve_eigen_radial` - the eigenvalue problem S2(D^2 u) = lambda (-u)^2 on a
  ball in R^3 by inverse iteration: solve with the previous normalized iterate
  as data, renormalize in sup norm, read the eigenvalue off the normalization.

* `solve_grid2d` - the planar case, where S2 is the Hessian determinant, by
  damped Newton on central differences with one-sided curved-boundary stencils
  at boundary-adjacent nodes.  Steps that leave the discrete elliptic branch
  (Delta u > 0, det D^2 u > 0) are halved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import factorized, spsolve

from ._quad import cumulative_quartic_uniform, deriv_uniform
from .domain import DomainSpec, GridMask, rasterize
from .errors import InputError, SolverError, SourceError

SOLUTION_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SourceTerm:
    """Source f(u) with derivative, positivity and monotonicity metadata."""

    preset: str
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    nonincreasing: bool
    nondecreasing: bool
    params: tuple[float, ...] = ()

    @property
    def monotonicity(self) -> str:
        if self.nonincreasing and not self.nondecreasing:
            return "nonincreasing"
        if self.nondecreasing and not self.nonincreasing:
            return "nondecreasing"
        if self.nonincreasing and self.nondecreasing:
            return "nonincreasing"  # constant source; consistent with f' = 0
        return "other"

    def label(self) -> str:
        if self.params:
            return self.preset + ":" + ",".join(f"{p:g}" for p in self.params)
        return self.preset


def constant_source(value: float = 1.0) -> SourceTerm:
    if value <= 0:
        raise InputError("constant source must be positive")
    return SourceTerm(preset="const",
                      f=lambda t: np.full_like(np.asarray(t, dtype=float), value),
                      fprime=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                      nonincreasing=True, nondecreasing=True, params=(value,))


def exp_decreasing_source(rate: float = 0.5) -> SourceTerm:
    """f(t) = exp(-rate t), strictly decreasing for rate > 0.

    The default rate 1/2 keeps the planar problems on all stock domains well
    inside the solvable regime: sources growing with depth are Gelfand-like,
    and the unit-rate exponential already sits past the solvability fold of
    the (2, 1) ellipse (continuation locates the fold near rate 0.97).
    """
    if rate <= 0:
        raise InputError("decreasing exponential needs rate > 0")
    return SourceTerm(preset="exp-dec",
                      f=lambda t: np.exp(-rate * np.asarray(t, dtype=float)),
                      fprime=lambda t: -rate * np.exp(-rate * np.asarray(t, dtype=float)),
                      nonincreasing=True, nondecreasing=False, params=(rate,))


def exp_increasing_source(rate: float = 1.0) -> SourceTerm:
    """f(t) = exp(rate t), strictly increasing; self-damping for u < 0."""
    if rate <= 0:
        raise InputError("increasing exponential needs rate > 0")
    return SourceTerm(preset="exp-inc",
                      f=lambda t: np.exp(rate * np.asarray(t, dtype=float)),
                      fprime=lambda t: rate * np.exp(rate * np.asarray(t, dtype=float)),
                      nonincreasing=False, nondecreasing=True, params=(rate,))


def eigen_source(lam1: float) -> SourceTerm:
    """f(t) = lam1 t^2, nonincreasing on t <= 0."""
    if lam1 <= 0:
        raise InputError("eigenvalue factor must be positive")
    return SourceTerm(preset="eigen",
                      f=lambda t: lam1 * np.asarray(t, dtype=float) ** 2,
                      fprime=lambda t: 2.0 * lam1 * np.asarray(t, dtype=float),
                      nonincreasing=True, nondecreasing=False, params=(lam1,))


def power_source(lam: float, p: float) -> SourceTerm:
    """f(t) = lam (-t)^p on t <= 0, nonincreasing there."""
    if lam <= 0 or p <= 0:
        raise InputError("power source needs lam > 0 and p > 0")

    def _f(t):
        return lam * np.abs(np.minimum(np.asarray(t, dtype=float), 0.0)) ** p

    def _fp(t):
        tt = np.minimum(np.asarray(t, dtype=float), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -lam * p * np.abs(tt) ** (p - 1.0)
        return np.where(tt == 0.0, 0.0 if p > 1 else -lam * p, out)

    return SourceTerm(preset="power", f=_f, fprime=_fp,
                      nonincreasing=True, nondecreasing=False, params=(lam, p))


SOURCE_PRESETS = {
    "const": constant_source,
    "exp-dec": exp_decreasing_source,
    "exp-inc": exp_increasing_source,
    "eigen": eigen_source,
    "power": power_source,
}


@dataclass(frozen=True)
class SolveConfig:
    """Iteration controls for the radial, eigenvalue and grid solvers."""

    radial_nodes: int = 1024          # number of intervals on [0, R]
    picard_tol: float = 1e-13
    picard_max_iter: int = 400
    picard_damping: float = 1.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    newton_min_step: float = 1e-6
    eigen_tol: float = 1e-11
    eigen_max_iter: int = 400
    grid_min_span: int = 16

    def __post_init__(self):
        if min(self.picard_tol, self.newton_tol, self.eigen_tol) <= 0:
            raise InputError("tolerances must be positive")
        if not (0 < self.picard_damping <= 1):
            raise InputError("damping must lie in (0, 1]")
        if self.radial_nodes < 16:
            raise InputError("need at least 16 radial intervals")


@dataclass(frozen=True)
class RadialProfile:
    """Radial solution u(r) on [0, R]: nodes, values and radial derivative."""

    dim: int
    radius: float
    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    quad_order: int = 5
    picard_iterations: int = 0
    picard_delta: float = 0.0
    ode_residual_sup: float = 0.0

    @property
    def u_min(self) -> float:
        return float(self.u[0])

    @property
    def boundary_gradient(self) -> float:
        return float(self.up[-1])

    def second_derivative(self) -> np.ndarray:
        return deriv_uniform(self.up, float(self.r[1] - self.r[0]))

    def second_derivative_origin(self) -> float:
        """u''(0) as the r -> 0 limit of u'/r, Richardson-extrapolated."""
        r1, r2 = float(self.r[1]), float(self.r[2])
        c1, c2 = float(self.up[1]) / r1, float(self.up[2]) / r2
        return (c1 * r2**2 - c2 * r1**2) / (r2**2 - r1**2)

    def hessian_eigenvalues(self) -> np.ndarray:
        """Per-node Hessian eigenvalues [radial u'', tangential u'/r]."""
        upp = self.second_derivative()
        tang = np.empty_like(self.up)
        tang[1:] = self.up[1:] / self.r[1:]
        tang[0] = self.second_derivative_origin()
        upp[0] = tang[0]
        return np.column_stack([upp, tang])


def _s2_radial(n_dim: int, upp: np.ndarray, up_over_r: np.ndarray) -> np.ndarray:
    pairs = (n_dim - 1) * (n_dim - 2) / 2.0
    return (n_dim - 1) * upp * up_over_r + pairs * up_over_r**2


def radial_ode_residual(profile: RadialProfile, f: SourceTerm) -> np.ndarray:
    """Pointwise defect S2(D^2 u) - f(u), with the isotropic limit at r = 0."""
    eigs = profile.hessian_eigenvalues()
    upp, tang = eigs[:, 0], eigs[:, 1]
    res = _s2_radial(profile.dim, upp, tang) - f.f(profile.u)
    res[0] = math.comb(profile.dim, 2) * tang[0] ** 2 - float(np.asarray(f.f(profile.u[0])))
    return res


SERIES_NODES = 4  # origin nodes served by the even-expansion quadrature


def _source_cumulative_integral(n_dim, r, h, w):
    """Cumulative integral of s^(N-1) w(s) with a series-corrected origin block.

    w = f(u(s)) is even in s to fourth order for smooth radial u (u'(0) = 0),
    so near the origin the integral expands as
        w0 r^N/N + w2 r^(N+2)/(N+2) + w4 r^(N+4)/(N+4).
    On-grid quadrature loses relative accuracy on the first block, where the
    integrand vanishes like s^(N-1) and the result is divided by r^(N-2)
    downstream; the first few nodes use the expansion instead.
    """
    g = cumulative_quartic_uniform(r ** (n_dim - 1) * w, h)
    w0 = w[0]
    d1, d2 = w[1] - w0, w[2] - w0
    w2 = (16.0 * d1 - d2) / (12.0 * h * h)
    w4 = (d2 - 4.0 * d1) / (12.0 * h ** 4)
    k = min(SERIES_NODES, r.size - 1)
    base = g[k]
    rk = r[1:k + 1]
    g[1:k + 1] = (w0 * rk ** n_dim / n_dim
                  + w2 * rk ** (n_dim + 2) / (n_dim + 2)
                  + w4 * rk ** (n_dim + 4) / (n_dim + 4))
    g[k + 1:] += g[k] - base
    return g


def _picard_pass(n_dim, r, h, rhs_vals):
    g = _source_cumulative_integral(n_dim, r, h, rhs_vals)
    up2 = np.zeros_like(r)
    up2[1:] = (2.0 / (n_dim - 1)) * g[1:] / r[1:] ** (n_dim - 2)
    up = np.sqrt(np.maximum(up2, 0.0))
    tail = cumulative_quartic_uniform(up, h)
    u = -(tail[-1] - tail)
    return u, up


def _solve_radial_fixed_point(n_dim, radius, rhs, cfg, u0=None):
    """Picard iteration on the integral form; rhs maps (r, u) -> source values."""
    m = cfg.radial_nodes
    r = np.linspace(0.0, radius, m + 1)
    h = radius / m
    u = u0.copy() if u0 is not None else 0.5 * (r**2 - radius**2)
    up = np.zeros_like(u)
    delta = math.inf
    for it in range(1, cfg.picard_max_iter + 1):
        vals = np.asarray(rhs(r, u), dtype=float)
        if np.any(vals < -1e-14):
            raise SourceError("source became negative during the radial solve")
        u_new, up = _picard_pass(n_dim, r, h, np.maximum(vals, 0.0))
        if cfg.picard_damping < 1.0:
            u_new = (1.0 - cfg.picard_damping) * u + cfg.picard_damping * u_new
        delta = float(np.max(np.abs(u_new - u)))
        u = u_new
        if delta <= cfg.picard_tol * max(1.0, float(np.max(np.abs(u)))):
            break
    else:
        raise SolverError(f"radial Picard iteration did not converge "
                          f"(last delta {delta:.3e} after {cfg.picard_max_iter} passes)")
    return r, u, up, it, delta


def solve_radial(n_dim: int, radius: float, f: SourceTerm,
                 cfg: SolveConfig | None = None) -> RadialProfile:
    """Admissible radial solution on a ball of the given radius."""
    if n_dim < 2:
        raise InputError("radial solves need dimension >= 2")
    if radius <= 0:
        raise InputError("radius must be positive")
    cfg = cfg or SolveConfig()
    r, u, up, iters, delta = _solve_radial_fixed_point(
        n_dim, radius, lambda rr, uu: f.f(uu), cfg)
    profile = RadialProfile(dim=n_dim, radius=radius, r=r, u=u, up=up,
                            picard_iterations=iters, picard_delta=delta)
    residual = radial_ode_residual(profile, f)
    profile = replace(profile, ode_residual_sup=float(np.max(np.abs(residual))))
    _validate_radial(profile)
    return profile


def _validate_radial(profile: RadialProfile) -> None:
    if abs(profile.u[-1]) > 1e-14 * max(1.0, float(np.max(np.abs(profile.u)))):
        raise SolverError("boundary value failed to vanish")
    if profile.up[0] != 0.0:
        raise SolverError("radial derivative at the origin must vanish")
    if np.any(profile.up < 0):
        raise SolverError("radial derivative must be nonnegative")
    if np.any(profile.u[:-1] >= 0):
        raise SolverError("solution must be negative inside the ball")
    eigs = profile.hessian_eigenvalues()
    s1 = eigs[:, 0] + (profile.dim - 1) * eigs[:, 1]
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if np.min(s1) < -1e-8 * scale:
        raise SolverError("trace of the Hessian left the admissible cone")


def solve_eigen_radial(n_dim: int, radius: float,
                       cfg: SolveConfig | None = None,
                       initial: Optional[np.ndarray] = None) -> tuple[float, RadialProfile]:
    """First eigenpair of S2(D^2 u) = lambda (-u)^2 on a ball in R^3.

    Inverse iteration with sup-norm normalization; the returned profile has
    sup norm 1 and the eigenvalue is the inverse square of the solve's
    normalization factor.
    """
    if n_dim != 3:
        raise InputError("the eigenvalue solver is wired for dimension 3")
    cfg = cfg or SolveConfig()
    m = cfg.radial_nodes
    r = np.linspace(0.0, radius, m + 1)
    if initial is None:
        u = (r**2 - radius**2) / radius**2
    else:
        u = np.asarray(initial, dtype=float).copy()
        if u.shape != r.shape or np.any(u[:-1] >= 0):
            raise InputError("initial iterate must be negative inside with matching nodes")
    u = u / np.max(np.abs(u))
    lam_prev = math.inf
    lam = math.nan
    for k in range(1, cfg.eigen_max_iter + 1):
        data = u.copy()
        _, v, vp, _, _ = _solve_radial_fixed_point(
            n_dim, radius, lambda rr, uu, d=data: d**2, cfg)
        s = float(np.max(np.abs(v)))
        if not np.isfinite(s) or s <= 0:
            raise SolverError("inverse iteration produced a degenerate iterate")
        lam = 1.0 / (s * s)
        u = v / s
        if abs(lam - lam_prev) <= cfg.eigen_tol * max(1.0, lam):
            break
        lam_prev = lam
    else:
        raise SolverError("inverse iteration stagnated before the eigenvalue settled")
    up = vp / s
    profile = RadialProfile(dim=n_dim, radius=radius, r=r, u=u, up=up,
                            picard_iterations=k, picard_delta=abs(lam - lam_prev))
    residual = radial_ode_residual(profile, eigen_source(lam))
    profile = replace(profile, ode_residual_sup=float(np.max(np.abs(residual))))
    _validate_radial(profile)
    return lam, profile


# ----------------------------------------------------------------------
# Planar grid solver
# ----------------------------------------------------------------------

def _second_derivative_row(theta_plus, theta_minus, h):
    """One-sided 3-point second-derivative coefficients (center, plus, minus)."""
    denom = h * h
    c_plus = 2.0 / (theta_plus * (theta_plus + theta_minus)) / denom
    c_minus = 2.0 / (theta_minus * (theta_plus + theta_minus)) / denom
    c_center = -2.0 / (theta_plus * theta_minus) / denom
    return c_center, c_plus, c_minus


def _first_derivative_row(theta_plus, theta_minus, h):
    """Nonuniform central first-derivative coefficients (center, plus, minus)."""
    tp, tm = theta_plus, theta_minus
    denom = tp * tm * (tp + tm) * h
    c_plus = tm * tm / denom
    c_minus = -tp * tp / denom
    c_center = (tp * tp - tm * tm) / denom
    return c_center, c_plus, c_minus


def build_operators(mask: GridMask) -> dict[str, sp.csr_matrix]:
    """Sparse Dxx, Dyy, Dxy, Dx, Dy over inside nodes (zero boundary data)."""
    if "Dxx" in mask._op_cache:
        return mask._op_cache
    n = mask.n_inside
    h = mask.h
    builders = {name: ([], [], []) for name in ("Dxx", "Dyy", "Dxy", "Dx", "Dy")}

    def add(name, row, col, val):
        rows, cols, vals = builders[name]
        rows.append(row)
        cols.append(col)
        vals.append(val)

    sqrt2h = math.sqrt(2.0) * h
    for k in range(n):
        th = mask.theta[k]
        nb = mask.neighbor[k]
        # Axis second and first derivatives: directions 0/1 are +/-x, 2/3 are +/-y.
        for name_second, name_first, ip, im in (("Dxx", "Dx", 0, 1), ("Dyy", "Dy", 2, 3)):
            cc, cp, cm = _second_derivative_row(th[ip], th[im], h)
            add(name_second, k, k, cc)
            if nb[ip] >= 0:
                add(name_second, k, nb[ip], cp)
            if nb[im] >= 0:
                add(name_second, k, nb[im], cm)
            cc, cp, cm = _first_derivative_row(th[ip], th[im], h)
            add(name_first, k, k, cc)
            if nb[ip] >= 0:
                add(name_first, k, nb[ip], cp)
            if nb[im] >= 0:
                add(name_first, k, nb[im], cm)
        # Cross derivative from the two diagonal second derivatives:
        # directions 4/5 are +/-(1,1)/sqrt2, 6/7 are +/-(1,-1)/sqrt2.
        cc1, cp1, cm1 = _second_derivative_row(th[4], th[5], sqrt2h)
        cc2, cp2, cm2 = _second_derivative_row(th[6], th[7], sqrt2h)
        add("Dxy", k, k, 0.5 * (cc1 - cc2))
        for coeff, direction in ((0.5 * cp1, 4), (0.5 * cm1, 5),
                                 (-0.5 * cp2, 6), (-0.5 * cm2, 7)):
            if nb[direction] >= 0:
                add("Dxy", k, nb[direction], coeff)

    ops = {}
    for name, (rows, cols, vals) in builders.items():
        ops[name] = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mask._op_cache.update(ops)
    return mask._op_cache


@dataclass(frozen=True)
class ScalarField2D:
    """Planar solution on a grid mask, zero on the boundary."""

    mask: GridMask
    u: np.ndarray
    newton_iterations: int = 0
    residual_sup: float = 0.0

    @property
    def u_min(self) -> float:
        return float(np.min(self.u))

    def hessian_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ops = build_operators(self.mask)
        return ops["Dxx"] @ self.u, ops["Dyy"] @ self.u, ops["Dxy"] @ self.u

    def gradient(self) -> np.ndarray:
        ops = build_operators(self.mask)
        return np.column_stack([ops["Dx"] @ self.u, ops["Dy"] @ self.u])


def _grid_fields(ops, u):
    uxx = ops["Dxx"] @ u
    uyy = ops["Dyy"] @ u
    uxy = ops["Dxy"] @ u
    return uxx, uyy, uxy


def _grid_admissible(uxx, uyy, uxy):
    lap = uxx + uyy
    det = uxx * uyy - uxy * uxy
    return bool(np.all(lap > 0) and np.all(det > 0))


def solve_grid2d(spec: DomainSpec, f: SourceTerm, h: float,
                 cfg: SolveConfig | None = None,
                 mask: GridMask | None = None) -> ScalarField2D:
    """Damped-Newton solve of det D^2 u = f(u) on a convex planar domain.

    The initial iterate solves the linear problem Delta u0 = 2 sqrt(f(0)),
    which starts inside the discrete elliptic branch by the arithmetic-
    geometric inequality det <= (Delta u / 2)^2 on smooth strictly convex
    domains.  Near polygon corners that iterate leaves the branch, so the
    solver falls back to the Poisson-style fixed point
        Delta u <- sqrt(2 f + (u_xx - u_yy)^2 + 4 u_xy^2),
    whose sweeps do not require branch membership, until the iterate enters
    the discrete cone.
    """
    cfg = cfg or SolveConfig()
    if mask is None:
        mask = rasterize(spec, h, min_span=cfg.grid_min_span)
    ops = build_operators(mask)
    n = mask.n_inside

    f0 = float(np.asarray(f.f(0.0)))
    lap_target = 2.0 * math.sqrt(max(f0, 1e-8))
    lap_solve = factorized((ops["Dxx"] + ops["Dyy"]).tocsc())
    u = lap_solve(np.full(n, lap_target))
    uxx, uyy, uxy = _grid_fields(ops, u)
    for _ in range(200):
        if _grid_admissible(uxx, uyy, uxy):
            break
        rhs = np.sqrt(np.maximum(
            2.0 * np.asarray(f.f(u), dtype=float) + (uxx - uyy) ** 2 + 4.0 * uxy**2,
            0.0))
        u = lap_solve(rhs)
        uxx, uyy, uxy = _grid_fields(ops, u)
    else:
        raise SolverError("could not reach the discrete elliptic branch from "
                          "the Poisson-style warm start")

    residual = uxx * uyy - uxy * uxy - np.asarray(f.f(u), dtype=float)
    res_sup = float(np.max(np.abs(residual)))
    it = 0
    while res_sup > cfg.newton_tol:
        it += 1
        if it > cfg.newton_max_iter:
            raise SolverError(f"Newton iteration did not reach tolerance "
                              f"(residual {res_sup:.3e})")
        jac = (sp.diags(uyy) @ ops["Dxx"] + sp.diags(uxx) @ ops["Dyy"]
               - 2.0 * sp.diags(uxy) @ ops["Dxy"]
               - sp.diags(np.asarray(f.fprime(u), dtype=float)))
        step = spsolve(jac.tocsc(), -residual)
        if not np.all(np.isfinite(step)):
            raise SolverError("Newton linearization produced a non-finite step")
        # Halve the step until the iterate stays on the discrete elliptic
        # branch and the residual actually decreases.
        factor = 1.0
        accepted = False
        while factor >= cfg.newton_min_step:
            trial = u + factor * step
            uxx, uyy, uxy = _grid_fields(ops, trial)
            if _grid_admissible(uxx, uyy, uxy):
                with np.errstate(over="ignore"):
                    trial_res = uxx * uyy - uxy * uxy - np.asarray(f.f(trial), dtype=float)
                trial_sup = float(np.max(np.abs(trial_res)))
                if np.isfinite(trial_sup) and trial_sup <= res_sup * (1.0 - 1e-4 * factor):
                    u, residual, res_sup = trial, trial_res, trial_sup
                    accepted = True
                    break
            factor *= 0.5
        if not accepted:
            raise SolverError(
                "damped Newton stalled: admissibility or residual descent "
                "unattainable (the problem may sit beyond its solvability fold)")

    if np.any(u >= 0):
        raise SolverError("solution must be negative at inside nodes")
    return ScalarField2D(mask=mask, u=u, newton_iterations=it, residual_sup=res_sup)


# ----------------------------------------------------------------------
# Admissibility reporting
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    """Margins of the ellipticity cone over all nodes of a solution."""

    min_s1: float
    min_s2: float
    min_cofactor_eigenvalue: float
    admissible: bool


def admissibility_report(sol) -> AdmissibilityReport:
    """Minimum S1, S2 and cofactor-matrix eigenvalue over strictly interior nodes.

    The boundary node of a radial profile is excluded: sources vanishing at
    zero make S2 degenerate exactly on the boundary.
    """
    if isinstance(sol, RadialProfile):
        eigs = sol.hessian_eigenvalues()[:-1]
        upp, tang = eigs[:, 0], eigs[:, 1]
        n_dim = sol.dim
        s1 = upp + (n_dim - 1) * tang
        s2 = _s2_radial(n_dim, upp, tang)
        # Eigenvalues of (tr H) I - H are tr H minus each Hessian eigenvalue.
        cof_min = np.minimum(s1 - upp, s1 - tang)
        return AdmissibilityReport(
            min_s1=float(np.min(s1)), min_s2=float(np.min(s2)),
            min_cofactor_eigenvalue=float(np.min(cof_min)),
            admissible=bool(np.min(s1) > 0 and np.min(s2) > 0 and np.min(cof_min) > 0))
    if isinstance(sol, ScalarField2D):
        uxx, uyy, uxy = sol.hessian_entries()
        s1 = uxx + uyy
        s2 = uxx * uyy - uxy * uxy
        # 2x2 cofactor matrix [[uyy, -uxy], [-uxy, uxx]]: closed-form eigenvalues.
        half_tr = 0.5 * (uxx + uyy)
        disc = np.sqrt(np.maximum(0.25 * (uyy - uxx) ** 2 + uxy**2, 0.0))
        cof_min = half_tr - disc
        return AdmissibilityReport(
            min_s1=float(np.min(s1)), min_s2=float(np.min(s2)),
            min_cofactor_eigenvalue=float(np.min(cof_min)),
            admissible=bool(np.min(s1) > 0 and np.min(s2) > 0 and np.min(cof_min) > 0))
    raise InputError(f"unsupported solution type {type(sol).__name__}")


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------

def save_solution(sol, path) -> None:
    """Write a solution to a versioned columnar .npz file (bit-exact arrays)."""
    if isinstance(sol, RadialProfile):
        header = {"schema": SOLUTION_SCHEMA_VERSION, "kind": "radial",
                  "dim": sol.dim, "radius": sol.radius,
                  "picard_iterations": sol.picard_iterations,
                  "picard_delta": sol.picard_delta,
                  "ode_residual_sup": sol.ode_residual_sup}
        np.savez(path, header=json.dumps(header, sort_keys=True),
                 r=sol.r, u=sol.u, up=sol.up)
    elif isinstance(sol, ScalarField2D):
        spec = sol.mask.spec
        header = {"schema": SOLUTION_SCHEMA_VERSION, "kind": "grid2d",
                  "h": sol.mask.h, "newton_iterations": sol.newton_iterations,
                  "residual_sup": sol.residual_sup,
                  "domain": {"kind": spec.kind, "center": list(spec.center),
                             "radius": spec.radius, "semi_axes": list(spec.semi_axes),
                             "vertices": None if spec.vertices is None
                             else [list(v) for v in spec.vertices]}}
        np.savez(path, header=json.dumps(header, sort_keys=True),
                 u=sol.u, node_xy=sol.mask.node_xy)
    else:
        raise InputError(f"unsupported solution type {type(sol).__name__}")


def load_solution(path, mask: GridMask | None = None):
    """Read a solution written by save_solution.

    Grid solutions need the (deterministic) mask to be rebuilt by the caller
    unless one is supplied; radial profiles round-trip standalone.
    """
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header["schema"] != SOLUTION_SCHEMA_VERSION:
            raise InputError(f"unsupported solution schema {header['schema']}")
        if header["kind"] == "radial":
            return RadialProfile(dim=header["dim"], radius=header["radius"],
                                 r=data["r"], u=data["u"], up=data["up"],
                                 picard_iterations=header["picard_iterations"],
                                 picard_delta=header["picard_delta"],
                                 ode_residual_sup=header["ode_residual_sup"])
        if header["kind"] == "grid2d":
            dom = header["domain"]
            if mask is None:
                from .domain import ball, convex_polygon, ellipse as make_ellipse
                if dom["kind"] == "ball":
                    spec = ball(dom["radius"], center=dom["center"], dim=2)
                elif dom["kind"] == "ellipse":
                    spec = make_ellipse(*dom["semi_axes"], center=dom["center"])
                else:
                    spec = convex_polygon(dom["vertices"])
                mask = rasterize(spec, header["h"])
            sol = ScalarField2D(mask=mask, u=data["u"],
                                newton_iterations=header["newton_iterations"],
                                residual_sup=header["residual_sup"])
            if sol.u.shape != (mask.n_inside,):
                raise InputError("solution file does not match the rebuilt grid")
            return sol
    raise InputError("unrecognized solution file")
