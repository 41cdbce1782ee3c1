"""Explicit finite-difference solver for the bistable reaction-diffusion
problem in divergence form on the periodic unit torus.

Scheme: forward Euler; diagonal fluxes use face-centered diffusivity evaluated
at the arithmetic mean of the adjacent cell values, cross terms use
cell-centered diffusivity with centered mixed differences, and the reaction
is pointwise. Every flux term telescopes over the torus, so the reaction-free
scheme conserves mass to round-off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import FrontCurve, marching_squares
from .errors import Blowup, CFLViolated, ConfigError, NoContour
from .model import ModelSpec

CFL_REACTION_SAFETY = 0.2


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with cell centers at ((i+1/2)h, (j+1/2)h)."""

    n: int

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def cell_centers(self):
        x = (np.arange(self.n) + 0.5) * self.h
        return np.meshgrid(x, x, indexing="ij")


@dataclass
class ScalarField:
    """Order-parameter samples on the grid at one time."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ConfigError("field shape does not match the grid")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.t)


def mass(fld: ScalarField) -> float:
    return float(fld.values.sum()) * fld.grid.h**2


def stability_dt(spec: ModelSpec, grid: Grid) -> float:
    """Explicit-step bound: min of the diffusion and reaction restrictions."""
    r = spec.reaction
    lo = r.alpha_minus - r.eta0
    hi = r.alpha_plus + r.eta0
    f_lip = r.max_abs_f_prime(lo, hi)
    dt_diff = grid.h**2 / (4.0 * 2 * spec.c_upper)
    dt_react = CFL_REACTION_SAFETY * spec.epsilon**2 / f_lip
    return min(dt_diff, dt_react)


def _diffusion(u: np.ndarray, spec: ModelSpec, h: float) -> np.ndarray:
    d = spec.diffusivity
    uxp = np.roll(u, -1, axis=0)
    uxm = np.roll(u, 1, axis=0)
    uyp = np.roll(u, -1, axis=1)
    uym = np.roll(u, 1, axis=1)
    inv_h2 = 1.0 / (h * h)

    if d.is_constant:
        d11 = float(d.entry(0, 0)(0.0))
        d22 = float(d.entry(1, 1)(0.0))
        d12 = float(d.entry(0, 1)(0.0))
        out = (d11 * (uxp - 2.0 * u + uxm) + d22 * (uyp - 2.0 * u + uym)) * inv_h2
        if d12 != 0.0:
            uxpyp = np.roll(uxp, -1, axis=1)
            uxpym = np.roll(uxp, 1, axis=1)
            uxmyp = np.roll(uxm, -1, axis=1)
            uxmym = np.roll(uxm, 1, axis=1)
            out += 2.0 * d12 * (uxpyp - uxpym - uxmyp + uxmym) * (0.25 * inv_h2)
        return out

    d11c = d.entry(0, 0).coef[::-1]
    d22c = d.entry(1, 1).coef[::-1]
    face_x = np.polyval(d11c, 0.5 * (u + uxp))
    flux_x = face_x * (uxp - u)
    face_y = np.polyval(d22c, 0.5 * (u + uyp))
    flux_y = face_y * (uyp - u)
    out = (flux_x - np.roll(flux_x, 1, axis=0)
           + flux_y - np.roll(flux_y, 1, axis=1)) * inv_h2

    d12_poly = d.entry(0, 1)
    if d12_poly.coef.size > 1 or d12_poly.coef[0] != 0.0:
        d12 = np.polyval(d12_poly.coef[::-1], u)
        gx = d12 * (uyp - uym)            # D12(u) * 2h u_y
        gy = d12 * (uxp - uxm)
        out += ((np.roll(gx, -1, axis=0) - np.roll(gx, 1, axis=0))
                + (np.roll(gy, -1, axis=1) - np.roll(gy, 1, axis=1))) * (0.25 * inv_h2)
    return out


def step(fld: ScalarField, spec: ModelSpec, dt: float, *,
         reaction: bool = True) -> ScalarField:
    """One forward-Euler step; raises CFLViolated/Blowup on contract breaks."""
    if dt > stability_dt(spec, fld.grid) * (1.0 + 1e-9):
        raise CFLViolated(
            f"dt = {dt:g} exceeds the stability bound "
            f"{stability_dt(spec, fld.grid):g}")
    u = fld.values
    rhs = _diffusion(u, spec, fld.grid.h)
    if reaction:
        rhs += np.polyval(spec.reaction.poly.coef[::-1], u) / spec.epsilon**2
    new = u + dt * rhs
    if not np.isfinite(new).all():
        raise Blowup(f"non-finite value at t = {fld.t + dt:g}")
    return ScalarField(fld.grid, new, fld.t + dt)


def simulate(u0: ScalarField, spec: ModelSpec, t_end: float,
             snapshot_times=None, *, reaction: bool = True) -> list[ScalarField]:
    """March to t_end with the stability step, landing exactly on snapshots."""
    if t_end < 0.0:
        raise ConfigError("t_end must be nonnegative")
    if not np.isfinite(u0.values).all():
        raise Blowup("initial data is not finite")
    targets = sorted(set(float(s) for s in (snapshot_times or [])) | {float(t_end)})
    if targets[0] < 0.0 or targets[-1] > t_end:
        raise ConfigError("snapshot times must lie in [0, t_end]")

    dt0 = stability_dt(spec, u0.grid)
    out = []
    cur = u0.copy()
    for target in targets:
        while cur.t < target - 1e-14:
            dt = min(dt0, target - cur.t)
            cur = step(cur, spec, dt, reaction=reaction)
        cur.t = target
        out.append(cur.copy())
    return out


def extract_level_set(fld: ScalarField, level: float) -> list[FrontCurve]:
    """Marching-squares contours of the field, longest loop first."""
    loops = marching_squares(fld.values, fld.grid.h, level)
    if not loops:
        raise NoContour(f"level {level:g} is not crossed")
    return sorted(loops, key=lambda c: -c.n_vertices)


def ordering_check(u_low: ScalarField, u_high: ScalarField, spec: ModelSpec,
                   t_end: float, tol: float = 1e-8):
    """March both fields in lockstep; report the worst comparison violation."""
    if u_low.grid.n != u_high.grid.n:
        raise ConfigError("fields live on different grids")
    violation = float(np.max(u_low.values - u_high.values))
    if violation > 0.0:
        raise ConfigError("u_low must not exceed u_high initially")
    dt0 = stability_dt(spec, u_low.grid)
    lo, hi = u_low.copy(), u_high.copy()
    t = 0.0
    while t < t_end - 1e-14:
        dt = min(dt0, t_end - t)
        lo = step(lo, spec, dt)
        hi = step(hi, spec, dt)
        t += dt
        violation = max(violation, float(np.max(lo.values - hi.values)))
    return violation <= tol, violation


# ---------------------------------------------------------------------------
# initial data generators
# ---------------------------------------------------------------------------

def trig_product_field(grid: Grid, amplitude: float = 0.5, kx: int = 1,
                       ky: int = 1, offset: float = 0.0) -> ScalarField:
    x, y = grid.cell_centers()
    vals = offset + amplitude * np.cos(2 * np.pi * kx * x) * np.cos(2 * np.pi * ky * y)
    return ScalarField(grid, vals)


def random_smooth_field(grid: Grid, rng, amplitude: float = 0.5,
                        max_mode: int = 3, offset: float = 0.0) -> ScalarField:
    """Random low-mode trigonometric polynomial with sup-norm <= amplitude."""
    x, y = grid.cell_centers()
    vals = np.zeros_like(x)
    for kx in range(max_mode + 1):
        for ky in range(max_mode + 1):
            if kx == 0 and ky == 0:
                continue
            amp = rng.normal()
            px, py = rng.uniform(0, 2 * np.pi, size=2)
            vals += (amp * np.cos(2 * np.pi * kx * x + px)
                     * np.cos(2 * np.pi * ky * y + py))
    sup = np.abs(vals).max()
    if sup > 0:
        vals *= amplitude / sup
    return ScalarField(grid, offset + vals)


def softstep_circle_field(grid: Grid, spec: ModelSpec, center, r: float,
                          width: float) -> ScalarField:
    """Step-softened disk: low phase inside the circle, high outside."""
    x, y = grid.cell_centers()
    d = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2) - r
    rct = spec.reaction
    mid = 0.5 * (rct.alpha_plus + rct.alpha_minus)
    half = 0.5 * (rct.alpha_plus - rct.alpha_minus)
    return ScalarField(grid, mid + half * np.tanh(d / width))


# ---------------------------------------------------------------------------
# field dumps: raw little-endian float64, row-major, with a JSON sidecar
# ---------------------------------------------------------------------------

def write_field_dump(prefix, fld: ScalarField, epsilon: float) -> None:
    prefix = str(Path(prefix))
    fld.values.astype("<f8").tofile(prefix + ".f64")
    sidecar = {"n": fld.grid.n, "h": fld.grid.h, "t": fld.t, "epsilon": epsilon}
    with open(prefix + ".json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")


def read_field_dump(prefix) -> tuple[ScalarField, float]:
    prefix = str(Path(prefix))
    with open(prefix + ".json") as fh:
        meta = json.load(fh)
    n = int(meta["n"])
    values = np.fromfile(prefix + ".f64", dtype="<f8").reshape(n, n)
    return ScalarField(Grid(n), values, float(meta["t"])), float(meta["epsilon"])
