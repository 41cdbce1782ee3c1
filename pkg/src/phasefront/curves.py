"""Closed front curves on the unit torus: geometry, contouring, metrics.

Orientation convention: traversal keeps the high-phase side (u > level) on
the right, so the outward normal is the right-hand rotation (t_y, -t_x) of
the unit tangent and a contractible front enclosing a low-phase region runs
counterclockwise (positive shoelace area) with curvature +1/R on a circle.

Vertices are stored unwrapped (continuous coordinates, possibly outside
[0,1)); ``wraps`` records the net winding for non-contractible contours.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateCurve, OpenContour

_EDGE_AXIS = {"h": 0, "v": 1}


@dataclass
class FrontCurve:
    """Oriented closed polyline (implicitly closed: last connects to first)."""

    vertices: np.ndarray                 # (m, 2), unwrapped
    h_target: float
    wraps: tuple[int, int] = (0, 0)
    normals: np.ndarray | None = None
    curvature: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise DegenerateCurve("vertices must have shape (m, 2)")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def is_contractible(self) -> bool:
        return self.wraps == (0, 0)

    def wrapped_vertices(self) -> np.ndarray:
        return np.mod(self.vertices, 1.0)

    def closed_loop(self) -> np.ndarray:
        """Vertices with the closing point appended (unwrapped)."""
        end = self.vertices[0] + np.asarray(self.wraps, dtype=float)
        return np.vstack([self.vertices, end])

    def reversed(self) -> "FrontCurve":
        return replace(self, vertices=self.vertices[::-1].copy(),
                       wraps=(-self.wraps[0], -self.wraps[1]),
                       normals=None, curvature=None)


def curve_from_points(points, h_target: float | None = None) -> FrontCurve:
    pts = np.asarray(points, dtype=float)
    if h_target is None:
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        h_target = float(np.median(seg))
    return FrontCurve(pts, h_target)


def circle_curve(center, r: float, n: int, h_target: float | None = None) -> FrontCurve:
    th = 2.0 * np.pi * np.arange(n) / n
    pts = np.asarray(center, dtype=float) + r * np.stack([np.cos(th), np.sin(th)], axis=1)
    return curve_from_points(pts, h_target)


def ellipse_curve(center, a: float, b: float, n: int) -> FrontCurve:
    th = 2.0 * np.pi * np.arange(n) / n
    pts = np.asarray(center, dtype=float) + np.stack([a * np.cos(th), b * np.sin(th)], axis=1)
    return curve_from_points(pts)


def rounded_square_curve(center, half: float, corner_r: float, n_per_side: int = 32,
                         n_per_corner: int = 16) -> FrontCurve:
    """Axis-aligned square with circular corner fillets, counterclockwise."""
    cx, cy = center
    f = half - corner_r
    pts = []
    corners = [(cx + f, cy + f, 0.0), (cx - f, cy + f, 0.5 * np.pi),
               (cx - f, cy - f, np.pi), (cx + f, cy - f, 1.5 * np.pi)]
    for i, (qx, qy, th0) in enumerate(corners):
        for t in np.linspace(0, 0.5 * np.pi, n_per_corner, endpoint=False):
            pts.append((qx + corner_r * np.cos(th0 + t), qy + corner_r * np.sin(th0 + t)))
        nxt = corners[(i + 1) % 4]
        start = np.array([qx + corner_r * np.cos(th0 + 0.5 * np.pi),
                          qy + corner_r * np.sin(th0 + 0.5 * np.pi)])
        stop = np.array([nxt[0] + corner_r * np.cos(nxt[2]),
                         nxt[1] + corner_r * np.sin(nxt[2])])
        for t in np.linspace(0.0, 1.0, n_per_side, endpoint=False):
            pts.append(tuple(start + t * (stop - start)))
    return curve_from_points(np.array(pts))


def translate_curve(curve: FrontCurve, vec) -> FrontCurve:
    return replace(curve, vertices=curve.vertices + np.asarray(vec, dtype=float),
                   normals=None, curvature=None)


def rotate_curve(curve: FrontCurve, angle: float, center=(0.5, 0.5)) -> FrontCurve:
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    ctr = np.asarray(center, dtype=float)
    return replace(curve, vertices=(curve.vertices - ctr) @ rot.T + ctr,
                   normals=None, curvature=None)


# ---------------------------------------------------------------------------
# lengths, areas, geometry
# ---------------------------------------------------------------------------

def curve_length(curve: FrontCurve) -> float:
    loop = curve.closed_loop()
    return float(np.linalg.norm(np.diff(loop, axis=0), axis=1).sum())


def enclosed_area(curve: FrontCurve) -> float:
    """Signed shoelace area (contractible curves only)."""
    if not curve.is_contractible:
        raise DegenerateCurve("area is undefined for torus-wrapping contours")
    p = curve.vertices
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def turning_number(curve: FrontCurve) -> float:
    loop = curve.closed_loop()
    d = np.diff(loop, axis=0)
    ang = np.arctan2(d[:, 1], d[:, 0])
    turns = np.diff(np.concatenate([ang, ang[:1]]))
    turns = (turns + np.pi) % (2.0 * np.pi) - np.pi
    return float(np.sum(turns) / (2.0 * np.pi))


def _chord_spline(curve: FrontCurve):
    loop = curve.closed_loop()
    if np.any(np.all(np.abs(np.diff(loop, axis=0)) < 1e-15, axis=1)):
        raise DegenerateCurve("repeated consecutive vertices")
    chord = np.linalg.norm(np.diff(loop, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(chord)])
    closing = loop[-1] - loop[0]
    if np.abs(closing).max() > 1e-12:
        # periodic spline needs exact closure; wraps handled by the caller
        loop = loop.copy()
        loop[-1] = loop[0]
        spline = CubicSpline(t, loop, bc_type="periodic", axis=0)
        return spline, t, True
    return CubicSpline(t, loop, bc_type="periodic", axis=0), t, False


def geometry(curve: FrontCurve, checked: bool = True) -> FrontCurve:
    """Fill unit outward normals and curvature via a periodic spline fit.

    ``checked=False`` skips the simplicity test (inner-loop use; callers run
    the topology checks at their own cadence).
    """
    if curve.n_vertices < 8:
        raise DegenerateCurve(f"need >= 8 vertices, have {curve.n_vertices}")
    if checked and not is_simple(curve):
        raise DegenerateCurve("curve is self-intersecting")
    if curve.is_contractible:
        spline, t, _ = _chord_spline(curve)
        d1 = spline(t[:-1], 1)
        d2 = spline(t[:-1], 2)
    else:
        # wrapping contour: fit the displacement against a linear ramp so the
        # periodic spline sees matched endpoints
        loop = curve.closed_loop()
        chord = np.linalg.norm(np.diff(loop, axis=0), axis=1)
        t = np.concatenate([[0.0], np.cumsum(chord)])
        ramp = np.outer(t / t[-1], np.asarray(curve.wraps, dtype=float))
        spline = CubicSpline(t, loop - ramp, bc_type="periodic", axis=0)
        d1 = spline(t[:-1], 1) + np.asarray(curve.wraps, dtype=float) / t[-1]
        d2 = spline(t[:-1], 2)
    speed = np.linalg.norm(d1, axis=1)
    if speed.min() <= 0.0:
        raise DegenerateCurve("vanishing parameterization speed")
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    tau = d1 / speed[:, None]
    normals = np.stack([tau[:, 1], -tau[:, 0]], axis=1)
    return replace(curve, normals=normals, curvature=kappa)


def resample(curve: FrontCurve, n_vertices: int) -> FrontCurve:
    """Near-uniform arclength resampling (spline-based), keeping vertex 0."""
    if n_vertices < 8:
        raise DegenerateCurve("resampling below 8 vertices")
    if curve.is_contractible:
        spline, t, _ = _chord_spline(curve)
        targets = np.linspace(0.0, t[-1], n_vertices, endpoint=False)
        pts = spline(targets)
    else:
        loop = curve.closed_loop()
        chord = np.linalg.norm(np.diff(loop, axis=0), axis=1)
        t = np.concatenate([[0.0], np.cumsum(chord)])
        ramp = np.outer(t / t[-1], np.asarray(curve.wraps, dtype=float))
        spline = CubicSpline(t, loop - ramp, bc_type="periodic", axis=0)
        targets = np.linspace(0.0, t[-1], n_vertices, endpoint=False)
        pts = spline(targets) + np.outer(targets / t[-1],
                                         np.asarray(curve.wraps, dtype=float))
    return replace(curve, vertices=pts, normals=None, curvature=None)


# ---------------------------------------------------------------------------
# intersection / distances
# ---------------------------------------------------------------------------

def _orient(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) \
        - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def is_simple(curve: FrontCurve) -> bool:
    """Segment-pair intersection test (unwrapped coords, bbox prefilter)."""
    loop = curve.closed_loop()
    a = loop[:-1]
    b = loop[1:]
    m = len(a)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    overlap = ((lo[:, None, 0] <= hi[None, :, 0]) & (hi[:, None, 0] >= lo[None, :, 0])
               & (lo[:, None, 1] <= hi[None, :, 1]) & (hi[:, None, 1] >= lo[None, :, 1]))
    idx = np.arange(m)
    adjacent = (np.abs(idx[:, None] - idx[None, :]) <= 1) \
        | (np.abs(idx[:, None] - idx[None, :]) == m - 1)
    cand = np.argwhere(np.triu(overlap & ~adjacent, 1))
    for i, j in cand:
        d1 = _orient(a[i], b[i], a[j])
        d2 = _orient(a[i], b[i], b[j])
        d3 = _orient(a[j], b[j], a[i])
        d4 = _orient(a[j], b[j], b[i])
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
            return False
        if d1 == 0 and d2 == 0:   # collinear overlap within the bbox filter
            return False
    return True


_OFFSETS = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)


def points_to_curve_distance(points: np.ndarray, curve: FrontCurve,
                             chunk: int = 4096) -> np.ndarray:
    """Torus distance from each point to the closed polyline (min-image)."""
    pts = np.mod(np.asarray(points, dtype=float), 1.0)
    loop = np.mod(curve.closed_loop(), 1.0)
    a = loop[:-1]
    d = curve.closed_loop()[1:] - curve.closed_loop()[:-1]   # true segment vectors
    seg_len2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        best = np.full(len(p), np.inf)
        for off in _OFFSETS:
            rel = p[:, None, :] - (a[None, :, :] + off)      # (np, ns, 2)
            tpar = np.clip(np.einsum("psk,sk->ps", rel, d) / seg_len2, 0.0, 1.0)
            diff = rel - tpar[..., None] * d[None, :, :]
            dist2 = np.einsum("psk,psk->ps", diff, diff)
            best = np.minimum(best, dist2.min(axis=1))
        out[s:s + chunk] = np.sqrt(best)
    return out


def hausdorff(curve_a: FrontCurve, curve_b: FrontCurve) -> float:
    """Symmetric torus Hausdorff distance, vertex-to-segment resolution."""
    d_ab = points_to_curve_distance(curve_a.wrapped_vertices(), curve_b).max()
    d_ba = points_to_curve_distance(curve_b.wrapped_vertices(), curve_a).max()
    return float(max(d_ab, d_ba))


# ---------------------------------------------------------------------------
# marching squares on the periodic grid
# ---------------------------------------------------------------------------

_CASE_SEGMENTS = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(2, 3)], 8: [(2, 3)], 9: [(0, 2)],
    11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(0, 3)],
}


def marching_squares(values: np.ndarray, h: float, level: float,
                     origin: float | None = None) -> list[FrontCurve]:
    """Extract level-set loops of a periodic cell-centered field.

    Returns closed loops oriented with the high side (values > level) on the
    right of travel; ambiguous saddle cells are split by the midpoint rule.
    """
    n0, n1 = values.shape
    if origin is None:
        origin = 0.5 * h
    high = values > level

    cross_h = high ^ np.roll(high, -1, axis=0)     # edge (i,j)->(i+1,j)
    cross_v = high ^ np.roll(high, -1, axis=1)     # edge (i,j)->(i,j+1)
    if not (cross_h.any() or cross_v.any()):
        return []

    u_next_x = np.roll(values, -1, axis=0)
    u_next_y = np.roll(values, -1, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac_h = (level - values) / (u_next_x - values)
        frac_v = (level - values) / (u_next_y - values)

    def edge_point(kind, i, j):
        if kind == "h":
            return np.array([origin + (i + frac_h[i, j]) * h, origin + j * h])
        return np.array([origin + i * h, origin + (j + frac_v[i, j]) * h])

    # cell segments: list of (key_a, key_b); keys identify crossed edges
    cell_has = cross_h | np.roll(cross_h, -1, axis=1) | cross_v | np.roll(cross_v, -1, axis=0)
    segments = []                 # (key_a, key_b)
    key_segments: dict = {}       # key -> [segment ids]
    for i, j in np.argwhere(cell_has):
        ip, jp = (i + 1) % n0, (j + 1) % n1
        c = (int(high[i, j]) | int(high[ip, j]) << 1
             | int(high[ip, jp]) << 2 | int(high[i, jp]) << 3)
        if c in (0, 15):
            continue
        keys = (("h", i, j), ("v", ip, j), ("h", i, jp), ("v", i, j))
        if c in (5, 10):
            center_high = (values[i, j] + values[ip, j]
                           + values[ip, jp] + values[i, jp]) > 4.0 * level
            if c == 5:
                pairs = [(0, 1), (2, 3)] if center_high else [(0, 3), (1, 2)]
            else:
                pairs = [(0, 3), (1, 2)] if center_high else [(0, 1), (2, 3)]
        else:
            pairs = _CASE_SEGMENTS[c]
        for ea, eb in pairs:
            sid = len(segments)
            segments.append((keys[ea], keys[eb]))
            key_segments.setdefault(keys[ea], []).append(sid)
            key_segments.setdefault(keys[eb], []).append(sid)

    for key, sids in key_segments.items():
        if len(sids) != 2:
            raise OpenContour(f"edge {key} has {len(sids)} incident segments")

    positions = {key: edge_point(*key) % 1.0 for key in key_segments}
    loops = _stitch_loops(segments, key_segments, positions)
    return [_orient_loop(loop_keys, verts, wraps, high, n0, n1, h)
            for loop_keys, verts, wraps in loops]


def _min_image(delta: np.ndarray) -> np.ndarray:
    return delta - np.round(delta)


def _stitch_loops(segments, key_segments, positions):
    used = np.zeros(len(segments), dtype=bool)
    loops = []
    for start in range(len(segments)):
        if used[start]:
            continue
        keys = [segments[start][0]]
        verts = [positions[keys[0]]]
        sid, enter = start, segments[start][0]
        while True:
            used[sid] = True
            ka, kb = segments[sid]
            exit_key = kb if enter == ka else ka
            prev = verts[-1]
            step = _min_image(positions[exit_key] - (prev % 1.0))
            verts.append(prev + step)
            a, b = key_segments[exit_key]
            nxt = b if a == sid else a
            if nxt == start:
                break
            keys.append(exit_key)
            sid, enter = nxt, exit_key
        verts = np.array(verts)
        wraps = tuple(int(round(w)) for w in
                      (verts[-1] + _min_image(positions[keys[0]] - (verts[-1] % 1.0))
                       - verts[0]))
        loops.append((keys, verts[:len(keys)] if len(verts) > len(keys) else verts,
                      wraps))
    return loops


def _orient_loop(keys, verts, wraps, high, n0, n1, h) -> FrontCurve:
    curve = FrontCurve(verts, h_target=h, wraps=wraps)
    m = len(verts)
    for k in range(m):
        kind, i, j = keys[k]
        t = verts[(k + 1) % m] - verts[k]
        if np.linalg.norm(t) < 1e-15:
            continue
        if kind == "h":
            d_high = np.array([-1.0, 0.0]) if high[i, j] else np.array([1.0, 0.0])
        else:
            d_high = np.array([0.0, -1.0]) if high[i, j] else np.array([0.0, 1.0])
        cross = t[0] * d_high[1] - t[1] * d_high[0]
        if abs(cross) < 1e-12:
            continue
        if cross > 0.0:
            curve = curve.reversed()
        return curve
    return curve
