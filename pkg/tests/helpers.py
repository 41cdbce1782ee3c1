"""Shared oracle helpers for the test suite."""

import numpy as np

from phasefront.model import (
    ModelSpec,
    cubic_reaction,
    polynomial_diffusivity,
)


def random_spd_polynomial_model(rng, epsilon: float = 0.02) -> ModelSpec:
    """Random validated model: D(s) = A + B s^2 with A, A+4B SPD.

    Even entries against the odd cubic reaction keep the well balance exact,
    and min-eig concavity along the segment A + t B, t in [0, 4], makes
    endpoint checks sufficient for ellipticity on the validation range.
    """
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
    a = q @ np.diag(rng.uniform(0.5, 2.0, 2)) @ q.T
    b = rng.normal(size=(2, 2))
    b = 0.5 * (b + b.T)
    lam_min = float(np.linalg.eigvalsh(a)[0])
    b *= 0.05 * lam_min / max(float(np.abs(np.linalg.eigvalsh(b)).max()), 1e-12)
    entries = [[[a[i, j], 0.0, b[i, j]] for j in range(2)] for i in range(2)]
    amp = float(rng.uniform(0.5, 2.0))
    return ModelSpec(cubic_reaction(amp), polynomial_diffusivity(entries), epsilon)


def random_tangential_pair(rng):
    th = rng.uniform(0.0, 2.0 * np.pi)
    e = np.array([np.cos(th), np.sin(th)])
    eta = np.array([-np.sin(th), np.cos(th)])
    if rng.random() < 0.5:
        eta = -eta
    return e, eta


def constant_d_mu_oracle(dmat: np.ndarray, e) -> np.ndarray:
    """Closed-form mu for constant D with sphere-tangential d(sqrt a_e)."""
    e = np.asarray(e, dtype=float)
    a = float(e @ dmat @ e)
    proj = np.eye(len(e)) - np.outer(e, e)
    g = proj @ (dmat @ e) / np.sqrt(a)
    return dmat - np.outer(g, g)
