"""Convex planar/spatial domains: signed distance, rasterization, boundary data.

Grids are node lattices aligned with the domain center.  A node strictly
inside the domain is classified `interior` when all four axis neighbors are
inside too, otherwise `boundary-adjacent`.  Boundary-adjacent stencil arms
carry the exact fractional distance to the boundary along each of the eight
compass directions, which is what one-sided curved-boundary stencils consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, InputError

INTERIOR, BOUNDARY_ADJACENT, EXTERIOR = 0, 1, 2

#: Stencil directions: +x, -x, +y, -y, then the four diagonals.
DIRECTIONS = np.array([
    [1, 0], [-1, 0], [0, 1], [0, -1],
    [1, 1], [-1, -1], [1, -1], [-1, 1],
], dtype=int)

#: Arms thinner than this fraction of a step are clamped to keep stencils finite.
THETA_FLOOR = 1e-6


@dataclass(frozen=True)
class DomainSpec:
    """A bounded convex domain: ball, axis-aligned ellipse, or convex polygon."""

    kind: str                       # "ball" | "ellipse" | "polygon"
    dim: int
    center: np.ndarray
    radius: float = 0.0             # ball
    semi_axes: tuple[float, float] = (0.0, 0.0)  # ellipse
    vertices: Optional[np.ndarray] = None        # polygon, counterclockwise


def ball(radius: float, center=None, dim: int = 2) -> DomainSpec:
    if radius <= 0:
        raise InputError("ball radius must be positive")
    if dim not in (2, 3):
        raise InputError("balls support dim 2 or 3")
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    if c.shape != (dim,):
        raise InputError("center dimension mismatch")
    return DomainSpec(kind="ball", dim=dim, center=c, radius=radius)


def ellipse(a: float, b: float, center=None) -> DomainSpec:
    if a <= 0 or b <= 0:
        raise InputError("ellipse semi-axes must be positive")
    c = np.zeros(2) if center is None else np.asarray(center, dtype=float)
    return DomainSpec(kind="ellipse", dim=2, center=c, semi_axes=(a, b))


def polygon_is_convex(vertices) -> bool:
    """Strict convexity: all consecutive-edge cross products share a sign, none zero."""
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    if n < 3:
        return False
    crosses = []
    for i in range(n):
        e1 = v[(i + 1) % n] - v[i]
        e2 = v[(i + 2) % n] - v[(i + 1) % n]
        crosses.append(e1[0] * e2[1] - e1[1] * e2[0])
    crosses = np.asarray(crosses)
    if np.any(crosses == 0.0):
        return False
    return bool(np.all(crosses > 0) or np.all(crosses < 0))


def convex_polygon(vertices) -> DomainSpec:
    """Strictly convex polygon; vertices are reordered counterclockwise."""
    v = np.asarray(vertices, dtype=float)
    if not polygon_is_convex(v):
        raise InputError("vertex list is not strictly convex")
    area2 = 0.0
    for i in range(len(v)):
        j = (i + 1) % len(v)
        area2 += v[i, 0] * v[j, 1] - v[j, 0] * v[i, 1]
    if area2 < 0:
        v = v[::-1].copy()
    centroid = v.mean(axis=0)
    return DomainSpec(kind="polygon", dim=2, center=centroid, vertices=v)


def assert_convex(spec: DomainSpec) -> bool:
    """Convexity verdict; balls and ellipses are convex by construction."""
    if spec.kind in ("ball", "ellipse"):
        return True
    return polygon_is_convex(spec.vertices)


def is_inside(spec: DomainSpec, pts) -> np.ndarray:
    """Exact strict-interior test, vectorized over points (n, dim)."""
    p = np.atleast_2d(np.asarray(pts, dtype=float)) - spec.center
    if spec.kind == "ball":
        return np.einsum("ij,ij->i", p, p) < spec.radius ** 2
    if spec.kind == "ellipse":
        a, b = spec.semi_axes
        return (p[:, 0] / a) ** 2 + (p[:, 1] / b) ** 2 < 1.0
    verts = spec.vertices - spec.center
    inside = np.ones(len(p), dtype=bool)
    for i in range(len(verts)):
        v0, v1 = verts[i], verts[(i + 1) % len(verts)]
        edge = v1 - v0
        rel = p - v0
        inside &= (edge[0] * rel[:, 1] - edge[1] * rel[:, 0]) > 0.0
    return inside


def _ellipse_closest_point(a: float, b: float, pts: np.ndarray) -> np.ndarray:
    """Closest boundary points on x^2/a^2 + y^2/b^2 = 1, vectorized bisection."""
    px, py = np.abs(pts[:, 0]), np.abs(pts[:, 1])
    # Order axes so e0 >= e1; fold points into the first quadrant.
    if b > a:
        e0, e1, y0, y1 = b, a, py, px
    else:
        e0, e1, y0, y1 = a, b, px, py
    x0 = np.empty_like(y0)
    x1 = np.empty_like(y1)

    general = y1 > 0
    # General case: bisect F(t) = (e0 y0/(t+e0^2))^2 + (e1 y1/(t+e1^2))^2 - 1,
    # strictly decreasing on (-e1^2, inf); the bracket below pins its root.
    if np.any(general):
        f0, f1 = y0[general], y1[general]
        lo = -e1 * e1 + e1 * f1
        hi = -e1 * e1 + np.sqrt((e0 * f0) ** 2 + (e1 * f1) ** 2)
        hi = np.maximum(hi, lo + 1e-300)
        for _ in range(110):
            mid = 0.5 * (lo + hi)
            val = (e0 * f0 / (mid + e0 * e0)) ** 2 + (e1 * f1 / (mid + e1 * e1)) ** 2 - 1.0
            take_lo = val > 0
            lo = np.where(take_lo, mid, lo)
            hi = np.where(take_lo, hi, mid)
        t = 0.5 * (lo + hi)
        x0[general] = e0 * e0 * f0 / (t + e0 * e0)
        x1[general] = e1 * e1 * f1 / (t + e1 * e1)

    # y1 == 0: the closest point may sit off-axis inside the evolute.
    on_axis = ~general
    if np.any(on_axis):
        f0 = y0[on_axis]
        denom = e0 * e0 - e1 * e1
        if denom > 0:
            inner = e0 * f0 < denom
            xx0 = np.where(inner, e0 * e0 * f0 / denom, e0)
        else:
            inner = np.zeros_like(f0, dtype=bool)
            xx0 = np.full_like(f0, e0)
        xx1 = np.where(inner, e1 * np.sqrt(np.clip(1.0 - (xx0 / e0) ** 2, 0.0, None)), 0.0)
        x0[on_axis] = xx0
        x1[on_axis] = xx1

    if b > a:
        cx, cy = x1, x0
    else:
        cx, cy = x0, x1
    cx = np.copysign(cx, np.where(pts[:, 0] == 0.0, 1.0, pts[:, 0]))
    cy = np.copysign(cy, np.where(pts[:, 1] == 0.0, 1.0, pts[:, 1]))
    return np.column_stack([cx, cy])


def signed_distance(spec: DomainSpec, pts) -> np.ndarray:
    """Signed distance to the boundary: negative inside, positive outside.

    Exact for balls and polygons; ellipses use a bisection on the
    closest-point equation resolved to ~1e-12.
    """
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    rel = p - spec.center
    if spec.kind == "ball":
        d = np.linalg.norm(rel, axis=1) - spec.radius
    elif spec.kind == "ellipse":
        a, b = spec.semi_axes
        closest = _ellipse_closest_point(a, b, rel)
        dist = np.linalg.norm(rel - closest, axis=1)
        inside = (rel[:, 0] / a) ** 2 + (rel[:, 1] / b) ** 2 < 1.0
        d = np.where(inside, -dist, dist)
    else:
        verts = spec.vertices
        n = len(verts)
        halfplane = np.full(len(p), -np.inf)
        seg_dist = np.full(len(p), np.inf)
        for i in range(n):
            v0, v1 = verts[i], verts[(i + 1) % n]
            edge = v1 - v0
            elen = np.linalg.norm(edge)
            normal = np.array([edge[1], -edge[0]]) / elen  # outward for ccw
            halfplane = np.maximum(halfplane, (p - v0) @ normal)
            t = np.clip(((p - v0) @ edge) / (elen * elen), 0.0, 1.0)
            foot = v0 + t[:, None] * edge
            seg_dist = np.minimum(seg_dist, np.linalg.norm(p - foot, axis=1))
        d = np.where(halfplane <= 0.0, halfplane, seg_dist)
    if np.asarray(pts).ndim == 1:
        return float(d[0])
    return d


def boundary_normal(spec: DomainSpec, pts) -> np.ndarray:
    """Outward unit normals at points assumed to lie on the boundary."""
    p = np.atleast_2d(np.asarray(pts, dtype=float)) - spec.center
    if spec.kind == "ball":
        return p / np.linalg.norm(p, axis=1, keepdims=True)
    if spec.kind == "ellipse":
        a, b = spec.semi_axes
        g = np.column_stack([2.0 * p[:, 0] / a**2, 2.0 * p[:, 1] / b**2])
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    verts = spec.vertices - spec.center
    n = len(verts)
    normals = np.empty_like(p)
    for k, x in enumerate(p):
        best, best_d = None, np.inf
        for i in range(n):
            v0, v1 = verts[i], verts[(i + 1) % n]
            edge = v1 - v0
            elen = np.linalg.norm(edge)
            t = np.clip(((x - v0) @ edge) / (elen * elen), 0.0, 1.0)
            d = np.linalg.norm(x - (v0 + t * edge))
            if d < best_d:
                best_d = d
                best = np.array([edge[1], -edge[0]]) / elen
        normals[k] = best
    return normals


def ray_crossing(spec: DomainSpec, origin, direction, max_len: float) -> Optional[float]:
    """Distance along `direction` (unit) from an inside point to the boundary.

    Returns t in (0, max_len] or None if the segment stays inside.  Convexity
    guarantees at most one crossing on the segment.
    """
    o = np.asarray(origin, dtype=float) - spec.center
    d = np.asarray(direction, dtype=float)
    if spec.kind == "ball":
        b = o @ d
        c = o @ o - spec.radius ** 2
        disc = b * b - c
        if disc < 0:
            return None
        t = -b + math.sqrt(disc)
    elif spec.kind == "ellipse":
        a_ax, b_ax = spec.semi_axes
        qa = (d[0] / a_ax) ** 2 + (d[1] / b_ax) ** 2
        qb = o[0] * d[0] / a_ax**2 + o[1] * d[1] / b_ax**2
        qc = (o[0] / a_ax) ** 2 + (o[1] / b_ax) ** 2 - 1.0
        disc = qb * qb - qa * qc
        if disc < 0:
            return None
        t = (-qb + math.sqrt(disc)) / qa
    else:
        verts = spec.vertices - spec.center
        n = len(verts)
        t = math.inf
        for i in range(n):
            v0, v1 = verts[i], verts[(i + 1) % n]
            edge = v1 - v0
            denom = d[0] * edge[1] - d[1] * edge[0]
            if denom == 0.0:
                continue
            rel = v0 - o
            tt = (rel[0] * edge[1] - rel[1] * edge[0]) / denom
            ss = (rel[0] * d[1] - rel[1] * d[0]) / (-denom)
            if tt > 0 and -1e-12 <= ss <= 1 + 1e-12:
                t = min(t, tt)
        if not math.isfinite(t):
            return None
    if t <= 0 or t > max_len * (1 + 1e-12):
        return None
    return float(min(t, max_len))


@dataclass(frozen=True)
class BoundaryCrossing:
    """An axis stencil arm leaving the domain: its foot point and normal data."""

    node_index: int          # inside-node index the arm starts from
    direction: np.ndarray    # outward unit axis direction
    theta: float             # crossing distance as a fraction of h
    foot: np.ndarray         # crossing point on the boundary
    normal: np.ndarray       # outward unit normal at the foot


@dataclass(frozen=True)
class GridMask:
    """Rasterization of a convex domain on a uniform node lattice."""

    spec: DomainSpec
    h: float
    origin: np.ndarray            # coordinate of node (0, 0)
    shape: tuple[int, int]        # (nx, ny) node counts
    node_xy: np.ndarray           # (n_inside, 2) coordinates of inside nodes
    grid_index: np.ndarray        # (nx, ny) -> inside index or -1
    classification: np.ndarray    # (n_inside,) INTERIOR or BOUNDARY_ADJACENT
    theta: np.ndarray             # (n_inside, 8) arm fractions in (0, 1]
    neighbor: np.ndarray          # (n_inside, 8) inside index or -1
    crossings: tuple[BoundaryCrossing, ...]
    _op_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_inside(self) -> int:
        return len(self.node_xy)

    @property
    def n_interior(self) -> int:
        return int(np.sum(self.classification == INTERIOR))

    def interior_mask(self) -> np.ndarray:
        return self.classification == INTERIOR


def rasterize(spec: DomainSpec, h: float, min_span: int = 16) -> GridMask:
    """Classify lattice nodes against the domain and collect stencil geometry.

    The lattice is anchored at the domain center so symmetric domains get
    symmetric grids.  Raises ConfigurationError when fewer than `min_span`
    inside nodes span the narrowest axis-aligned section.
    """
    if h <= 0:
        raise InputError("grid spacing must be positive")
    if spec.dim != 2:
        raise InputError("rasterization supports planar domains only")
    if not assert_convex(spec):
        raise InputError("domain must be convex")

    if spec.kind == "ball":
        ext = np.array([spec.radius, spec.radius])
    elif spec.kind == "ellipse":
        ext = np.array(spec.semi_axes, dtype=float)
    else:
        rel = spec.vertices - spec.center
        ext = np.max(np.abs(rel), axis=0)
    half = np.ceil(ext / h).astype(int) + 1
    nx, ny = 2 * half[0] + 1, 2 * half[1] + 1
    origin = spec.center - half * h

    xs = origin[0] + h * np.arange(nx)
    ys = origin[1] + h * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    inside_flat = is_inside(spec, nodes)
    inside = inside_flat.reshape(nx, ny)

    span_x = _max_run(inside, axis=0)
    span_y = _max_run(inside, axis=1)
    if min(span_x, span_y) < min_span:
        raise ConfigurationError(
            f"grid too coarse: {min(span_x, span_y)} inside nodes across the "
            f"narrowest section, need >= {min_span}")

    grid_index = -np.ones((nx, ny), dtype=int)
    ii, jj = np.nonzero(inside)
    n_inside = len(ii)
    grid_index[ii, jj] = np.arange(n_inside)
    node_xy = np.column_stack([xs[ii], ys[jj]])

    neighbor = -np.ones((n_inside, 8), dtype=int)
    theta = np.ones((n_inside, 8))
    classification = np.full(n_inside, INTERIOR, dtype=int)
    crossings: list[BoundaryCrossing] = []

    for k in range(n_inside):
        i, j = ii[k], jj[k]
        x = node_xy[k]
        for m, (di, dj) in enumerate(DIRECTIONS):
            ni, nj = i + di, j + dj
            nb_inside = (0 <= ni < nx and 0 <= nj < ny and inside[ni, nj])
            if nb_inside:
                neighbor[k, m] = grid_index[ni, nj]
                continue
            step = h * math.hypot(di, dj)
            unit = np.array([di, dj], dtype=float) / math.hypot(di, dj)
            t = ray_crossing(spec, x, unit, step)
            if t is None:
                t = step  # grazing float case: treat as full arm to boundary
            frac = min(max(t / step, THETA_FLOOR), 1.0)
            theta[k, m] = frac
            if m < 4:
                classification[k] = BOUNDARY_ADJACENT
                foot = x + frac * step * unit
                crossings.append(BoundaryCrossing(
                    node_index=k, direction=unit, theta=frac, foot=foot,
                    normal=boundary_normal(spec, foot[None, :])[0]))

    return GridMask(spec=spec, h=h, origin=origin, shape=(nx, ny),
                    node_xy=node_xy, grid_index=grid_index,
                    classification=classification, theta=theta,
                    neighbor=neighbor, crossings=tuple(crossings))


def _max_run(mask: np.ndarray, axis: int) -> int:
    """Longest run of True along the given axis."""
    best = 0
    moved = np.moveaxis(mask, axis, 0)
    for line in moved.T if moved.ndim > 1 else [moved]:
        run = 0
        for val in np.atleast_1d(line):
            run = run + 1 if val else 0
            best = max(best, run)
    return best
