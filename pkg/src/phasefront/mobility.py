"""Direction-dependent mobility tensor of the limiting curvature flow.

For a unit direction e the tensor splits as mu = mu1 + mu2 with

    lambda(e)         = int sqrt(W_e(s)) ds,
    lambda mu1_ij(e)  = int D_ij(s) sqrt(W_e(s)) ds,
    lambda mu2_ij(e)  = -(1/2) int dW_i(s) d(a_e/sqrt(W_e))_j(s) ds,

integrated over the well interval. The e-derivatives entering mu2 are the
sphere-tangential ones (ambient gradients projected by I - e e^T); see the
model module for why the integrand is evaluated in the deflated form

    sqrt(W_e) * R_i * (da_j - a_e R_j / 2),    R = grad W_e / W_e,

which is smooth through the double roots of W_e at the wells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    ConfigError,
    EquipotentialViolated,
    NegativeW,
    NotTangential,
    SingularEndpoint,
)
from .model import DirectionSection, ModelSpec, check_unit
from .quadrature import gauss_adaptive, gauss_adaptive_vec


class MobilityValues(NamedTuple):
    lam: float
    mu1: np.ndarray
    mu2: np.ndarray
    mu: np.ndarray


def _section(spec: ModelSpec, e) -> DirectionSection:
    try:
        return DirectionSection(spec, e)
    except (EquipotentialViolated, NegativeW) as exc:
        raise SingularEndpoint(
            f"mobility integrand is not integrable for e={np.asarray(e)}: {exc}"
        ) from exc


def lambda_e(spec: ModelSpec, e, tol: float = 1e-10) -> float:
    """Line tension lambda(e) = int sqrt(W_e(s)) ds > 0."""
    sec = _section(spec, e)
    lam = gauss_adaptive(sec.sqrt_w, sec.alpha_minus, sec.alpha_plus, tol)
    return float(lam)


def mu_tensor(spec: ModelSpec, e, tol: float = 1e-10) -> MobilityValues:
    """Evaluate (lambda, mu1, mu2, mu) at one unit direction."""
    e = check_unit(e)
    sec = _section(spec, e)
    d = spec.diffusivity
    n = d.dim

    def stacked(s: np.ndarray) -> np.ndarray:
        sw = sec.sqrt_w(s)
        rows = [sw]
        for i in range(n):
            for j in range(i, n):
                rows.append(d.entry(i, j)(s) * sw)
        ratio = sec.tan_ratio(s)
        tga = sec.tan_grad_a(s)
        av = sec.a(s)
        right = tga - 0.5 * av * ratio      # (n, len(s))
        for i in range(n):
            for j in range(n):
                rows.append(sw * ratio[i] * right[j])
        return np.vstack(rows)

    vals = gauss_adaptive_vec(stacked, sec.alpha_minus, sec.alpha_plus, tol)
    lam = float(vals[0])
    if lam <= 0.0:
        raise SingularEndpoint(f"lambda(e) = {lam:.3e} is not positive")

    mu1 = np.empty((n, n))
    k = 1
    for i in range(n):
        for j in range(i, n):
            mu1[i, j] = mu1[j, i] = vals[k] / lam
            k += 1
    mu2 = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            mu2[i, j] = -0.5 * vals[k] / lam
            k += 1
    return MobilityValues(lam, mu1, mu2, mu1 + mu2)


def tangential_form(spec: ModelSpec, e, eta, tol: float = 1e-10) -> float:
    """Quadratic form eta . (lambda mu)(e) eta for a unit tangent eta."""
    e = check_unit(e)
    eta = np.asarray(eta, dtype=float)
    if abs(np.linalg.norm(eta) - 1.0) > 1e-9:
        raise NotTangential(f"|eta| = {np.linalg.norm(eta):.12f} is not 1")
    if abs(float(np.dot(e, eta))) > 1e-9:
        raise NotTangential(f"e . eta = {float(np.dot(e, eta)):.3e} is not 0")
    vals = mu_tensor(spec, e, tol)
    return float(vals.lam * eta @ vals.mu @ eta)


def tangential_lower_bound(spec: ModelSpec, e, tol: float = 1e-10) -> float:
    """Certified lower bound int min_eig(D(s)) sqrt(W_e(s)) ds for the form."""
    sec = _section(spec, e)
    d = spec.diffusivity

    def integrand(s: np.ndarray) -> np.ndarray:
        mats = np.moveaxis(d.d_matrix(s), -1, 0)
        dmin = np.linalg.eigvalsh(mats)[:, 0]
        return dmin * sec.sqrt_w(s)

    return float(gauss_adaptive(integrand, sec.alpha_minus, sec.alpha_plus, tol))


# ---------------------------------------------------------------------------
# tabulated tensor
# ---------------------------------------------------------------------------

@dataclass
class MobilityTensor:
    """Evaluator e -> (lambda, mu1, mu2, mu), optionally angle-tabulated (2-D).

    With a table installed, evaluation goes through periodic cubic splines in
    the angle; a dense lookup (``mu_lookup``) serves the level-set hot path.
    """

    spec: ModelSpec
    dim: int
    thetas: np.ndarray | None = None
    lam_table: np.ndarray | None = None
    mu_table: np.ndarray | None = None        # (m, dim, dim)
    _lam_spline: Callable | None = None
    _mu_splines: list | None = None
    _dense: tuple | None = None

    @property
    def has_table(self) -> bool:
        return self.thetas is not None

    def evaluate(self, e) -> MobilityValues:
        return mu_tensor(self.spec, e)

    def lam_mu(self, e) -> tuple[float, np.ndarray]:
        """(lambda, mu) at e, via the table when present."""
        if not self.has_table:
            v = mu_tensor(self.spec, e)
            return v.lam, v.mu
        e = check_unit(e)
        th = float(np.arctan2(e[1], e[0])) % (2.0 * np.pi)
        mu = np.array([[float(self._mu_splines[i][j](th)) for j in range(2)]
                       for i in range(2)])
        return float(self._lam_spline(th)), mu

    def mu_of_angles(self, theta: np.ndarray) -> np.ndarray:
        """Spline-interpolated mu(theta); shape theta.shape + (2, 2)."""
        if not self.has_table:
            raise ConfigError("mobility tensor has no angular table")
        th = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
        out = np.empty(th.shape + (2, 2))
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self._mu_splines[i][j](th)
        return out

    def mu_lookup(self, k: int = 16384):
        """Dense (theta-quantized) mu table for vectorized field evaluation."""
        if self._dense is None or self._dense[0].shape[0] != k:
            th = 2.0 * np.pi * np.arange(k) / k
            self._dense = (self.mu_of_angles(th), 2.0 * np.pi / k)
        return self._dense

    def tangential_scalar(self, e, tau) -> float:
        """tau . mu(e) tau, the normal-velocity weight of the flow."""
        lam, mu = self.lam_mu(e)
        tau = np.asarray(tau, dtype=float)
        return float(tau @ mu @ tau)

    @property
    def mu_scale(self) -> float:
        """Max |mu| entry over the table (or the axis directions)."""
        if self.has_table:
            return float(np.abs(self.mu_table).max())
        vals = [np.abs(mu_tensor(self.spec, e).mu).max()
                for e in ((1.0, 0.0), (0.0, 1.0))]
        return float(max(vals))

    @property
    def asymmetry(self) -> float:
        """Diagnostic: max |mu - mu^T| entry over the table."""
        if not self.has_table:
            return 0.0
        return float(np.abs(self.mu_table
                            - self.mu_table.transpose(0, 2, 1)).max())


def tabulate_mobility(spec: ModelSpec, m_angles: int = 256,
                      tol: float = 1e-10) -> MobilityTensor:
    """Evaluate the tensor at equispaced angles with periodic cubic splines."""
    if spec.diffusivity.dim != 2:
        raise ConfigError("angular tabulation is 2-D only")
    if m_angles < 64:
        raise ConfigError("m_angles must be at least 64")
    thetas = 2.0 * np.pi * np.arange(m_angles) / m_angles
    lam = np.empty(m_angles)
    mu = np.empty((m_angles, 2, 2))
    for k, th in enumerate(thetas):
        v = mu_tensor(spec, (np.cos(th), np.sin(th)), tol)
        lam[k] = v.lam
        mu[k] = v.mu

    th_ext = np.concatenate([thetas, [2.0 * np.pi]])
    lam_spline = CubicSpline(th_ext, np.concatenate([lam, lam[:1]]),
                             bc_type="periodic")
    mu_splines = [[CubicSpline(th_ext, np.concatenate([mu[:, i, j], mu[:1, i, j]]),
                               bc_type="periodic") for j in range(2)]
                  for i in range(2)]
    return MobilityTensor(spec=spec, dim=2, thetas=thetas, lam_table=lam,
                          mu_table=mu, _lam_spline=lam_spline,
                          _mu_splines=mu_splines)


def direct_mobility(spec: ModelSpec) -> MobilityTensor:
    """Untabulated evaluator (library mode)."""
    return MobilityTensor(spec=spec, dim=spec.diffusivity.dim)
