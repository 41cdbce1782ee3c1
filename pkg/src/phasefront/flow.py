"""Front tracking and level-set evolution of the limiting anisotropic flow.

Both solvers realize the same law: the front moves with normal velocity
V_n = -kappa * (tau . mu(n) tau), which is the planar contraction of the
mobility tensor against the distance Hessian (the Hessian of a signed
distance restricted to the curve equals kappa tau tau^T). The level-set
route instead advances the signed distance field with

    d_t = sum_ij mu_ij(grad d / |grad d|) d_{x_i x_j},

reinitializing periodically so |grad d| stays near one in the band.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

import numpy as np

from .acsolver import Grid
from .curves import (
    FrontCurve,
    curve_length,
    enclosed_area,
    geometry,
    is_simple,
    marching_squares,
    points_to_curve_distance,
    resample,
)
from .errors import (
    Blowup,
    ConfigError,
    DegenerateCurve,
    Extinction,
    GradientDegeneracy,
    NoContour,
    SelfIntersection,
)
from .mobility import MobilityTensor

FRONT_CFL = 0.15
EXTINCTION_CELLS = 4.0


# ---------------------------------------------------------------------------
# front tracking
# ---------------------------------------------------------------------------

def _tangential_weights(mobility: MobilityTensor, normals: np.ndarray) -> np.ndarray:
    """tau . mu(n) tau per vertex; tau is the left rotation of the normal."""
    taus = np.stack([-normals[:, 1], normals[:, 0]], axis=1)
    if mobility.has_table:
        theta = np.arctan2(normals[:, 1], normals[:, 0])
        mu = mobility.mu_of_angles(theta)
        return np.einsum("vi,vij,vj->v", taus, mu, taus)
    out = np.empty(len(normals))
    for k, (nv, tv) in enumerate(zip(normals, taus)):
        out[k] = mobility.tangential_scalar(nv, tv)
    return out


def step_front(curve: FrontCurve, mobility: MobilityTensor, dt: float,
               cfl: float = FRONT_CFL) -> FrontCurve:
    """Advance the front by dt, substepping to honor the marker CFL bound.

    Each substep satisfies dt_sub <= cfl * (min spacing)^2 / max(tau.mu.tau)
    (the spline curvature operator is stiffer than a 3-point stencil, hence
    the margin below 1/6); redistribution to near-uniform arclength and the
    topology checks run once per outer step.
    """
    if dt <= 0.0:
        raise ConfigError("dt must be positive")
    cur = curve
    remaining = dt
    while remaining > 1e-18:
        cur = geometry(cur, checked=False)
        seg = np.linalg.norm(np.diff(cur.closed_loop(), axis=0), axis=1)
        weights = _tangential_weights(mobility, cur.normals)
        wmax = float(np.abs(weights).max())
        bound = cfl * float(seg.min()) ** 2 / max(wmax, 1e-300)
        sub = min(remaining, bound)
        vn = -cur.curvature * weights
        cur = replace(cur, vertices=cur.vertices + sub * vn[:, None] * cur.normals,
                      normals=None, curvature=None)
        remaining -= sub

    target = max(8, int(round(curve_length(cur) / cur.h_target)))
    cur = resample(cur, target)
    if cur.is_contractible and \
            abs(enclosed_area(cur)) < EXTINCTION_CELLS * cur.h_target**2:
        raise Extinction(
            f"front area {enclosed_area(cur):.3e} below the resolvable minimum")
    if not is_simple(cur):
        raise SelfIntersection("front crossed itself (topology change)")
    return geometry(cur)


def evolve_front(curve: FrontCurve, mobility: MobilityTensor, t_end: float,
                 dt: float, checkpoints=None) -> list[tuple[float, FrontCurve]]:
    """March to t_end in outer steps of dt, landing exactly on checkpoints."""
    targets = sorted(set(float(c) for c in (checkpoints or [])) | {float(t_end)})
    if targets and (targets[0] < 0.0 or targets[-1] > t_end):
        raise ConfigError("checkpoints must lie in [0, t_end]")
    out = []
    cur, t = curve, 0.0
    for target in targets:
        while t < target - 1e-14:
            sub = min(dt, target - t)
            cur = step_front(cur, mobility, sub)
            t += sub
        out.append((target, cur))
    return out


# ---------------------------------------------------------------------------
# signed distance construction
# ---------------------------------------------------------------------------

@dataclass
class SignedDistanceField:
    """Signed distance samples: positive outside the front (high-phase side)."""

    grid: Grid
    values: np.ndarray
    steps_taken: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ConfigError("field shape does not match the grid")

    def copy(self) -> "SignedDistanceField":
        return SignedDistanceField(self.grid, self.values.copy(), self.steps_taken)


def _inside_mask(curve: FrontCurve, grid: Grid) -> np.ndarray:
    """Even-odd interior test in the lifted planar frame of the curve."""
    loop = curve.closed_loop()
    extent = loop.max(axis=0) - loop.min(axis=0)
    if extent.max() >= 0.95:
        raise DegenerateCurve("curve spans nearly the whole torus; "
                              "interior is ill-defined")
    x0, y0 = loop.min(axis=0)
    n, h = grid.n, grid.h
    centers = (np.arange(n) + 0.5) * h
    xl = x0 + np.mod(centers - x0, 1.0)
    yl = y0 + np.mod(centers - y0, 1.0)

    a, b = loop[:-1], loop[1:]
    inside = np.zeros((n, n), dtype=bool)
    for j in range(n):
        y = yl[j]
        hit = (a[:, 1] <= y) != (b[:, 1] <= y)
        if not hit.any():
            continue
        aa, bb = a[hit], b[hit]
        xs = aa[:, 0] + (y - aa[:, 1]) * (bb[:, 0] - aa[:, 0]) / (bb[:, 1] - aa[:, 1])
        xs.sort()
        inside[:, j] = (np.searchsorted(xs, xl) % 2).astype(bool)
    return inside


def _band_cells(curve: FrontCurve, grid: Grid, band: float) -> np.ndarray:
    """Mask of cells within (roughly) the band radius of some segment bbox."""
    n, h = grid.n, grid.h
    mask = np.zeros((n, n), dtype=bool)
    loop = curve.closed_loop()
    pad = band + h
    for a, b in zip(loop[:-1], loop[1:]):
        lo = np.minimum(a, b) - pad
        hi = np.maximum(a, b) + pad
        i0 = int(np.floor((lo[0] - 0.5 * h) / h))
        i1 = int(np.ceil((hi[0] - 0.5 * h) / h))
        j0 = int(np.floor((lo[1] - 0.5 * h) / h))
        j1 = int(np.ceil((hi[1] - 0.5 * h) / h))
        ii = np.arange(i0, i1 + 1) % n
        jj = np.arange(j0, j1 + 1) % n
        mask[np.ix_(ii, jj)] = True
    return mask


def _fast_march(dist: np.ndarray, known: np.ndarray, h: float) -> np.ndarray:
    """First-order periodic fast marching from the known cells outward."""
    n0, n1 = dist.shape
    d = np.where(known, dist, np.inf)
    status = known.copy()

    def solve(i, j):
        dx = min(d[(i - 1) % n0, j], d[(i + 1) % n0, j])
        dy = min(d[i, (j - 1) % n1], d[i, (j + 1) % n1])
        if np.isinf(dx) and np.isinf(dy):
            return np.inf
        if np.isinf(dx) or np.isinf(dy) or abs(dx - dy) >= h:
            return min(dx, dy) + h
        return 0.5 * (dx + dy + np.sqrt(2.0 * h * h - (dx - dy) ** 2))

    heap = []
    ki, kj = np.nonzero(known)
    seeds = set()
    for i, j in zip(ki, kj):
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = (i + di) % n0, (j + dj) % n1
            if not status[ii, jj]:
                seeds.add((ii, jj))
    for i, j in seeds:
        heapq.heappush(heap, (solve(i, j), i, j))
    while heap:
        val, i, j = heapq.heappop(heap)
        if status[i, j]:
            continue
        status[i, j] = True
        d[i, j] = val
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = (i + di) % n0, (j + dj) % n1
            if not status[ii, jj]:
                heapq.heappush(heap, (solve(ii, jj), ii, jj))
    return d


def signed_distance(curve: FrontCurve, grid: Grid,
                    band_factor: float = 8.0) -> SignedDistanceField:
    """Exact point-to-segment distances in the band, fast marching beyond.

    The sign follows the curve orientation: positive on the high-phase side
    (the geometric interior is the low-phase side for a standard front).
    """
    if curve.n_vertices < 3 or not is_simple(curve):
        raise DegenerateCurve("need a simple closed curve")
    n, h = grid.n, grid.h
    band = band_factor * h
    bmask = _band_cells(curve, grid, band)
    x, y = grid.cell_centers()
    pts = np.stack([x[bmask], y[bmask]], axis=1)
    dist = np.full((n, n), np.inf)
    dist[bmask] = points_to_curve_distance(pts, curve)
    known = bmask & (dist <= band)
    dist = _fast_march(dist, known, h)

    inside = _inside_mask(curve, grid)
    interior_sign = -1.0 if enclosed_area(curve) > 0.0 else 1.0
    values = np.where(inside, interior_sign * dist, -interior_sign * dist)
    return SignedDistanceField(grid, values)


# ---------------------------------------------------------------------------
# level-set evolution
# ---------------------------------------------------------------------------

def reinitialize(sdf: SignedDistanceField, iterations: int = 20) -> SignedDistanceField:
    """Godunov upwind relaxation of |grad d| = 1 with a subcell interface fix.

    Cells whose stencil straddles the zero set relax toward the local linear
    distance estimate instead (Russo-Smereka), which keeps the zero crossing
    pinned across repeated reinitializations.
    """
    h = sdf.grid.h
    d0 = sdf.values
    d = d0.copy()
    sgn = d0 / np.sqrt(d0 * d0 + h * h)
    dtau = 0.5 * h

    d0xp = np.roll(d0, -1, axis=0)
    d0xm = np.roll(d0, 1, axis=0)
    d0yp = np.roll(d0, -1, axis=1)
    d0ym = np.roll(d0, 1, axis=1)
    interface = ((d0 * d0xp < 0.0) | (d0 * d0xm < 0.0)
                 | (d0 * d0yp < 0.0) | (d0 * d0ym < 0.0))
    grad0 = np.hypot((d0xp - d0xm) / (2.0 * h), (d0yp - d0ym) / (2.0 * h))
    target = d0 / np.maximum(grad0, 1e-8)          # linear distance estimate

    for _ in range(iterations):
        dxm = (d - np.roll(d, 1, axis=0)) / h
        dxp = (np.roll(d, -1, axis=0) - d) / h
        dym = (d - np.roll(d, 1, axis=1)) / h
        dyp = (np.roll(d, -1, axis=1) - d) / h
        pos = np.sqrt(np.maximum(np.maximum(dxm, 0.0) ** 2, np.minimum(dxp, 0.0) ** 2)
                      + np.maximum(np.maximum(dym, 0.0) ** 2, np.minimum(dyp, 0.0) ** 2))
        neg = np.sqrt(np.maximum(np.minimum(dxm, 0.0) ** 2, np.maximum(dxp, 0.0) ** 2)
                      + np.maximum(np.minimum(dym, 0.0) ** 2, np.maximum(dyp, 0.0) ** 2))
        grad = np.where(sgn >= 0.0, pos, neg)
        bulk = d - dtau * sgn * (grad - 1.0)
        pinned = d - dtau / h * (np.sign(d0) * np.abs(d) - target)
        d = np.where(interface, pinned, bulk)
    return SignedDistanceField(sdf.grid, d, sdf.steps_taken)


def level_set_dt(mobility: MobilityTensor, grid: Grid) -> float:
    return grid.h**2 / (8.0 * max(mobility.mu_scale, 1e-12))


def step_level_set(sdf: SignedDistanceField, mobility: MobilityTensor,
                   dt: float, reinit_every: int = 25) -> SignedDistanceField:
    """One explicit update of d_t = mu_ij(grad d/|grad d|) d_ij."""
    n, h = sdf.grid.n, sdf.grid.h
    d = sdf.values
    dxp = np.roll(d, -1, axis=0)
    dxm = np.roll(d, 1, axis=0)
    dyp = np.roll(d, -1, axis=1)
    dym = np.roll(d, 1, axis=1)
    gx = (dxp - dxm) / (2.0 * h)
    gy = (dyp - dym) / (2.0 * h)
    gnorm = np.hypot(gx, gy)
    ok = gnorm >= 0.5
    if np.any((np.abs(d) < 3.0 * h) & ~ok):
        raise GradientDegeneracy("|grad d| < 0.5 inside the narrow band")

    table, dtheta = mobility.mu_lookup()
    idx = (np.arctan2(gy, gx) % (2.0 * np.pi) / dtheta).astype(int) % len(table)
    mu = table[idx]                                 # (n, n, 2, 2)

    inv_h2 = 1.0 / (h * h)
    dxx = (dxp - 2.0 * d + dxm) * inv_h2
    dyy = (dyp - 2.0 * d + dym) * inv_h2
    dxy = (np.roll(dxp, -1, axis=1) - np.roll(dxp, 1, axis=1)
           - np.roll(dxm, -1, axis=1) + np.roll(dxm, 1, axis=1)) * (0.25 * inv_h2)
    # contract mu against the projected Hessian H - (Hn) x n, the grid form of
    # |grad d| * dn_j/dx_i; identical to mu:H on an exact distance function but
    # insensitive to |grad d| drifting between reinitializations
    safe = np.where(gnorm > 0.0, gnorm, 1.0)
    nx, ny = gx / safe, gy / safe
    hn_x = dxx * nx + dxy * ny
    hn_y = dxy * nx + dyy * ny
    rhs = (mu[..., 0, 0] * dxx + (mu[..., 0, 1] + mu[..., 1, 0]) * dxy
           + mu[..., 1, 1] * dyy
           - hn_x * (mu[..., 0, 0] * nx + mu[..., 0, 1] * ny)
           - hn_y * (mu[..., 1, 0] * nx + mu[..., 1, 1] * ny))
    new = d + dt * np.where(ok, rhs, 0.0)
    if not np.isfinite(new).all():
        raise Blowup("level-set update produced non-finite values")
    out = SignedDistanceField(sdf.grid, new, sdf.steps_taken + 1)
    if reinit_every > 0 and out.steps_taken % reinit_every == 0:
        out = reinitialize(out)
    return out


def evolve_level_set(sdf: SignedDistanceField, mobility: MobilityTensor,
                     t_end: float, dt: float | None = None,
                     reinit_every: int = 25,
                     checkpoints=None) -> list[tuple[float, SignedDistanceField]]:
    if dt is None:
        dt = level_set_dt(mobility, sdf.grid)
    targets = sorted(set(float(c) for c in (checkpoints or [])) | {float(t_end)})
    out = []
    cur, t = sdf.copy(), 0.0
    for target in targets:
        while t < target - 1e-14:
            sub = min(dt, target - t)
            cur = step_level_set(cur, mobility, sub, reinit_every)
            t += sub
        out.append((target, cur.copy()))
    return out


def zero_contour(sdf: SignedDistanceField) -> FrontCurve:
    loops = marching_squares(sdf.values, sdf.grid.h, 0.0)
    if not loops:
        raise NoContour("signed distance field has no zero crossing")
    return max(loops, key=lambda c: c.n_vertices)
