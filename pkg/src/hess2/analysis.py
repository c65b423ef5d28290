"""Auxiliary P-function fields, extreme-principle verdicts and a priori bounds.

The central object is the field

    Phi(x; alpha) = |grad u(x)|^2 + 2 alpha * int_{u(x)}^0 f(s)^gamma ds

built on a solved problem.  Verdicts compare its interior and boundary
extremes; bound reports specialize alpha = 1 at the critical point of u,
where the field value collapses to the printed a priori estimates.

gamma is configurable because the two natural conventions (square-rooted
source versus plain source in the integral) do not agree for non-constant
sources; reports carry the convention they were evaluated under.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quad import adaptive_simpson, forward_first_derivative
from .domain import DomainSpec, signed_distance
from .errors import InputError, SolverError
from .fields import ConvexityReport
from .solver import RadialProfile, ScalarField2D, SourceTerm
from .symmat import jacobi_eigh
from .transforms import (
    Transform,
    identity_transform,
    negative_log_transform,
    negative_power_transform,
    negative_sqrt_transform,
)

GAMMA_CHOICES = (0.5, 1.0)

#: Boundary crossings whose axis direction is this far from the normal are
#: skipped when sampling |grad u| on the boundary (the better-aligned axis
#: always covers the same stretch of boundary).
MIN_NORMAL_ALIGNMENT = 0.5


@dataclass(frozen=True)
class PFunctionSpec:
    """Parameters of the auxiliary field: alpha, source exponent, quadrature."""

    alpha: float
    gamma: float = 0.5
    quad_rtol: float = 1e-10

    def __post_init__(self):
        if self.gamma not in GAMMA_CHOICES:
            raise InputError(f"gamma must be one of {GAMMA_CHOICES}")


@dataclass(frozen=True)
class PFunctionField:
    """The auxiliary field sampled on a solution's nodes and boundary."""

    alpha: float
    gamma: float
    kind: str                      # "radial" | "grid2d"
    positions: np.ndarray          # (n,) radii or (n, 2) coordinates
    u_values: np.ndarray
    grad_sq: np.ndarray
    integral: np.ndarray           # int_u^0 f^gamma per node
    interior: np.ndarray           # bool mask over nodes
    boundary_positions: np.ndarray
    boundary_grad_sq: np.ndarray
    source_label: str = ""
    domain: Optional[DomainSpec] = None
    radius: Optional[float] = None

    @property
    def phi(self) -> np.ndarray:
        return self.grad_sq + 2.0 * self.alpha * self.integral

    @property
    def boundary_phi(self) -> np.ndarray:
        # u = 0 on the boundary, so the integral term vanishes exactly.
        return self.boundary_grad_sq

    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.phi))),
                   float(np.max(np.abs(self.boundary_phi))))


@dataclass(frozen=True)
class PrincipleVerdict:
    """Comparison of interior and boundary extremes of a scalar field."""

    mode: str                       # "min" | "max"
    interior_extreme: float
    interior_argpoint: np.ndarray
    boundary_extreme: float
    boundary_argpoint: np.ndarray
    margin: float                   # >= -tol_margin iff the principle holds
    tol_margin: float
    holds: bool
    distance_argextreme_to_boundary: float


@dataclass(frozen=True)
class BoundsReport:
    """A priori bound audit: global slack at the critical point and pointwise."""

    application: int
    gamma: float
    lhs: float
    rhs: float
    slack: float
    pointwise_min_slack: float
    hypothesis_ok: bool
    transform_name: str
    holds: bool


@dataclass(frozen=True)
class CriticalPointReport:
    """Hessian data at the interior minimum of a solution."""

    location: np.ndarray
    hessian_spectrum: np.ndarray
    max_ratio: float                # max Hessian eigenvalue / sqrt(f at minimum)
    binom_bound: float              # (N choose 2)^(-1/2)
    s2_value: float
    f_value: float
    spectrum_positive: bool


def source_integral(f: SourceTerm, gamma: float, u_values,
                    rtol: float = 1e-10) -> np.ndarray:
    """I(u) = int_u^0 f(s)^gamma ds for each u <= 0, by adaptive quadrature.

    Values are accumulated over the sorted inputs so each segment is
    integrated once; per-segment adaptive tolerances keep the total relative
    error at the requested level.
    """
    u = np.asarray(u_values, dtype=float)
    if np.any(u > 1e-14):
        raise InputError("the source integral is defined for u <= 0")
    u = np.minimum(u, 0.0)

    def integrand(s):
        val = float(np.asarray(f.f(s)))
        if val < 0:
            raise InputError("source must be nonnegative on the solution range")
        return val ** gamma

    flat = u.ravel()
    order = np.argsort(flat)
    out = np.empty_like(flat)
    acc = 0.0
    prev = 0.0
    # Power-law sources have integrable endpoint singularities at zero; the
    # absolute floor keeps the subdivision finite there at no visible cost.
    atol = 1e-16
    for idx in order[::-1]:           # from the value closest to zero downward
        val = flat[idx]
        if val < prev:
            acc += adaptive_simpson(integrand, val, prev, rtol=rtol, atol=atol)
            prev = val
        out[idx] = acc
    return out.reshape(u.shape)


def boundary_gradient_samples(sol: ScalarField2D,
                              min_alignment: float = MIN_NORMAL_ALIGNMENT
                              ) -> tuple[np.ndarray, np.ndarray]:
    """(points, |grad u|) at boundary crossing feet of a planar solution.

    The tangential derivative of u vanishes on the boundary, so the full
    gradient is the normal derivative; it is recovered from a one-sided
    derivative along the grid line through the crossing, divided by the
    cosine between that line and the normal.  Crossings nearly tangential to
    the boundary are skipped.
    """
    mask = sol.mask
    h = mask.h
    points, values = [], []
    for crossing in mask.crossings:
        align = float(crossing.normal @ crossing.direction)
        if abs(align) < min_alignment:
            continue
        k = crossing.node_index
        dir_idx = _axis_direction_index(crossing.direction)
        prev = mask.neighbor[k, dir_idx ^ 1]   # neighbor opposite the crossing
        d1 = crossing.theta * h
        u1 = float(sol.u[k])
        if prev >= 0:
            deriv_inward = forward_first_derivative(0.0, u1, float(sol.u[prev]),
                                                    d1, d1 + h)
        else:
            deriv_inward = u1 / d1
        # deriv_inward differentiates along -direction; flip to the outward axis.
        deriv_axis = -deriv_inward
        values.append(abs(deriv_axis / align))
        points.append(crossing.foot)
    if not points:
        raise SolverError("no usable boundary crossings for gradient sampling")
    return np.asarray(points), np.asarray(values)


def _axis_direction_index(direction: np.ndarray) -> int:
    if direction[0] > 0.5:
        return 0
    if direction[0] < -0.5:
        return 1
    return 2 if direction[1] > 0.5 else 3


def pfunction_field(sol, f: SourceTerm, spec: PFunctionSpec) -> PFunctionField:
    """Sample the auxiliary field on a solved problem."""
    if isinstance(sol, RadialProfile):
        grad_sq = sol.up**2
        integral = source_integral(f, spec.gamma, sol.u, rtol=spec.quad_rtol)
        interior = np.ones(sol.r.size, dtype=bool)
        interior[-1] = False
        return PFunctionField(
            alpha=spec.alpha, gamma=spec.gamma, kind="radial",
            positions=sol.r, u_values=sol.u, grad_sq=grad_sq,
            integral=integral, interior=interior,
            boundary_positions=np.array([sol.radius]),
            boundary_grad_sq=np.array([sol.boundary_gradient**2]),
            source_label=f.label(), radius=sol.radius)
    if isinstance(sol, ScalarField2D):
        grad = sol.gradient()
        grad_sq = np.einsum("ij,ij->i", grad, grad)
        integral = source_integral(f, spec.gamma, sol.u, rtol=spec.quad_rtol)
        bpts, bvals = boundary_gradient_samples(sol)
        return PFunctionField(
            alpha=spec.alpha, gamma=spec.gamma, kind="grid2d",
            positions=sol.mask.node_xy, u_values=sol.u, grad_sq=grad_sq,
            integral=integral, interior=np.ones(sol.u.size, dtype=bool),
            boundary_positions=bpts, boundary_grad_sq=bvals**2,
            source_label=f.label(), domain=sol.mask.spec)
    raise InputError(f"unsupported solution type {type(sol).__name__}")


def verify_principle(pf: PFunctionField, mode: str,
                     tol_margin: float) -> PrincipleVerdict:
    """Check whether the field attains its min/max on the boundary.

    Ties within tol_margin count as boundary attainment, so constant fields
    satisfy both modes.
    """
    if mode not in ("min", "max"):
        raise InputError("mode must be 'min' or 'max'")
    phi = pf.phi[pf.interior]
    pos = pf.positions[pf.interior]
    bphi = pf.boundary_phi
    if mode == "min":
        i = int(np.argmin(phi))
        b = int(np.argmin(bphi))
        margin = float(phi[i] - bphi[b])
        global_interior = phi[i] < bphi[b]
    else:
        i = int(np.argmax(phi))
        b = int(np.argmax(bphi))
        margin = float(bphi[b] - phi[i])
        global_interior = phi[i] > bphi[b]
    interior_arg = np.atleast_1d(pos[i])
    boundary_arg = np.atleast_1d(pf.boundary_positions[b])
    if global_interior:
        distance = _distance_to_boundary(pf, interior_arg)
    else:
        distance = 0.0
    return PrincipleVerdict(
        mode=mode, interior_extreme=float(phi[i]), interior_argpoint=interior_arg,
        boundary_extreme=float(bphi[b]), boundary_argpoint=boundary_arg,
        margin=margin, tol_margin=tol_margin, holds=bool(margin >= -tol_margin),
        distance_argextreme_to_boundary=float(distance))


def _distance_to_boundary(pf: PFunctionField, point: np.ndarray) -> float:
    if pf.kind == "radial":
        return float(pf.radius - abs(float(point[0])))
    return float(-signed_distance(pf.domain, np.atleast_2d(point))[0])


def transform_preset(application: int, p: float | None = None) -> Transform:
    """The convexity transform attached to each application family.

    1: constant source, U(t) = -sqrt(-t).
    2: eigenvalue source, U(t) = -log(-t).
    3: power source with exponent 0 < p < 2, U(t) = -(-t)^((2-p)/4);
       p >= 2 makes the transform decreasing and is rejected.
    """
    if application == 1:
        return negative_sqrt_transform()
    if application == 2:
        return negative_log_transform()
    if application == 3:
        if p is None:
            raise InputError("application 3 needs the exponent p")
        return negative_power_transform(p)
    raise InputError(f"unknown application {application}")


def convexity_scan_solution(sol, tr: Transform, tol: float = 1e-8) -> ConvexityReport:
    """Minimum eigenvalue of D^2 U(u) over a solution's strictly interior nodes."""
    if isinstance(sol, RadialProfile):
        idx = slice(0, sol.r.size - 1)   # u = 0 on the boundary node itself
        u = sol.u[idx]
        tr.check_domain(u)
        du = np.array([tr.du(t) for t in u])
        d2u = np.array([tr.d2u(t) for t in u])
        eigs = sol.hessian_eigenvalues()[idx]
        upp, tang = eigs[:, 0], eigs[:, 1]
        e_rad = du * upp + d2u * sol.up[idx] ** 2
        e_tan = du * tang
        stacked = np.column_stack([e_rad, e_tan])
        min_idx = np.unravel_index(np.argmin(stacked), stacked.shape)
        min_eig = float(stacked[min_idx])
        scale = max(1.0, float(np.max(np.abs(stacked))))
        argmin = np.array([sol.r[min_idx[0]]])
        n_points = int(u.size)
    elif isinstance(sol, ScalarField2D):
        u = sol.u
        tr.check_domain(u)
        du = np.array([tr.du(t) for t in u])
        d2u = np.array([tr.d2u(t) for t in u])
        uxx, uyy, uxy = sol.hessian_entries()
        grad = sol.gradient()
        a = du * uxx + d2u * grad[:, 0] ** 2
        c = du * uyy + d2u * grad[:, 1] ** 2
        b = du * uxy + d2u * grad[:, 0] * grad[:, 1]
        half = 0.5 * (a + c)
        disc = np.sqrt(np.maximum(0.25 * (a - c) ** 2 + b * b, 0.0))
        low = half - disc
        k = int(np.argmin(low))
        min_eig = float(low[k])
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(c))),
                    float(np.max(np.abs(b))))
        argmin = sol.mask.node_xy[k]
        n_points = int(u.size)
    else:
        raise InputError(f"unsupported solution type {type(sol).__name__}")
    tolerance = tol * scale
    return ConvexityReport(transform_name=tr.name, n_points=n_points,
                           min_eigenvalue=min_eig, argmin_point=argmin,
                           convex=bool(min_eig >= -tolerance), tolerance=tolerance)


def bounds_report(sol, f: SourceTerm, application: int, *,
                  p: float | None = None, gamma: float = 1.0,
                  transform: Transform | None = None,
                  allow_identity_fallback: bool = True,
                  tol: float = 1e-6) -> BoundsReport:
    """Audit the application's a priori bound on a solved problem.

    lhs is twice the source integral at the solution minimum (the field value
    at the critical point for alpha = 1), rhs the squared minimum boundary
    gradient.  The convexity hypothesis is scanned with the application's
    transform; planar solutions may fall back to the identity transform,
    whose convexity follows from admissibility in the plane.
    """
    if gamma not in GAMMA_CHOICES:
        raise InputError(f"gamma must be one of {GAMMA_CHOICES}")
    if transform is None:
        transform = transform_preset(application, p)
    scan = convexity_scan_solution(sol, transform)
    used = transform.name
    if not scan.convex and allow_identity_fallback:
        scan = convexity_scan_solution(sol, identity_transform())
        used = "identity"
    hypothesis_ok = bool(scan.convex and f.nonincreasing)

    pf = pfunction_field(sol, f, PFunctionSpec(alpha=1.0, gamma=gamma))
    rhs = float(np.min(pf.boundary_phi))
    lhs = 2.0 * float(np.max(pf.integral))
    slack = lhs - rhs
    pointwise = pf.phi[pf.interior] - rhs
    pointwise_min = float(np.min(pointwise))
    holds = bool(hypothesis_ok and slack >= -tol and pointwise_min >= -tol)
    return BoundsReport(application=application, gamma=gamma, lhs=lhs, rhs=rhs,
                        slack=slack, pointwise_min_slack=pointwise_min,
                        hypothesis_ok=hypothesis_ok, transform_name=used,
                        holds=holds)


def critical_point_report(sol, f: SourceTerm,
                          cluster_radius_steps: float = 3.0) -> CriticalPointReport:
    """Hessian spectrum and saturation ratio at the solution's interior minimum."""
    if isinstance(sol, RadialProfile):
        upp0 = sol.second_derivative_origin()
        spectrum = np.full(sol.dim, upp0)
        location = np.zeros(1)
        n_dim = sol.dim
        u_min = sol.u_min
    elif isinstance(sol, ScalarField2D):
        u = sol.u
        k = int(np.argmin(u))
        u_min = float(u[k])
        near = np.nonzero(u <= u_min * (1.0 - 1e-9))[0]
        pts = sol.mask.node_xy[near]
        if len(pts) > 1:
            spread = np.max(np.linalg.norm(pts - pts.mean(axis=0), axis=1))
            if spread > cluster_radius_steps * sol.mask.h:
                raise SolverError("multiple separated minima; critical point not unique")
        uxx, uyy, uxy = sol.hessian_entries()
        hess = np.array([[uxx[k], uxy[k]], [uxy[k], uyy[k]]])
        spectrum, _ = jacobi_eigh(hess)
        location = sol.mask.node_xy[k]
        n_dim = 2
    else:
        raise InputError(f"unsupported solution type {type(sol).__name__}")
    f_val = float(np.asarray(f.f(u_min)))
    if f_val <= 0:
        raise InputError("source must be positive at the solution minimum")
    pairs = math.comb(n_dim, 2)
    if n_dim == 2:
        s2_val = float(spectrum[0] * spectrum[1])
    else:
        s2_val = float(pairs * spectrum[0] ** 2)  # isotropic radial Hessian
    return CriticalPointReport(
        location=np.atleast_1d(location),
        hessian_spectrum=np.asarray(spectrum, dtype=float),
        max_ratio=float(np.max(spectrum)) / math.sqrt(f_val),
        binom_bound=pairs ** -0.5,
        s2_value=s2_val, f_value=f_val,
        spectrum_positive=bool(np.min(spectrum) > 0))
