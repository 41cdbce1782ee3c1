"""Quadrature helpers shared by the model/mobility modules.

Two routes are provided: a Gauss-Kronrod wrapper around QUADPACK for the
scalar model operations, and an order-doubling Gauss-Legendre scheme for the
vectorized mobility integrands (which are smooth after endpoint deflation).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureFailure

ABS_TOL = 1e-10


def quad_gk(f, a: float, b: float, tol: float = ABS_TOL) -> float:
    """Adaptive Gauss-Kronrod integral of a scalar callable on [a, b]."""
    if a == b:
        return 0.0
    value, abserr, info, *rest = quad(f, a, b, epsabs=tol, epsrel=1e-12,
                                      full_output=True)
    if rest:  # quad appends an explanation message on failure
        raise QuadratureFailure(f"quadrature did not converge on [{a}, {b}]: {rest[0]}")
    if abserr > max(tol, 1e-10 * abs(value)) * 1e3:
        raise QuadratureFailure(
            f"quadrature error estimate {abserr:.3e} too large on [{a}, {b}]")
    return value


@lru_cache(maxsize=32)
def _gl_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_adaptive(f, a: float, b: float, tol: float = ABS_TOL,
                   start_order: int = 48, max_order: int = 1536) -> float:
    """Integrate a vectorized callable by doubling Gauss-Legendre orders.

    The integrand must accept an ndarray of abscissae. Convergence is declared
    when two consecutive orders agree within ``tol`` (absolute).
    """
    if a == b:
        return 0.0
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    order = start_order
    x, w = _gl_nodes(order)
    prev = half * float(np.dot(w, f(mid + half * x)))
    while order < max_order:
        order *= 2
        x, w = _gl_nodes(order)
        cur = half * float(np.dot(w, f(mid + half * x)))
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureFailure(
        f"Gauss-Legendre doubling did not reach tol={tol:g} by order {max_order}")


def gauss_adaptive_vec(f, a: float, b: float, tol: float = ABS_TOL,
                       start_order: int = 48, max_order: int = 1536) -> np.ndarray:
    """Order-doubling Gauss-Legendre for a stacked family of integrands.

    ``f(x)`` must return shape (k, len(x)); the result has shape (k,).
    Convergence requires every component to settle within ``tol``.
    """
    if a == b:
        raise QuadratureFailure("empty integration interval")
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    order = start_order
    x, w = _gl_nodes(order)
    prev = half * (f(mid + half * x) @ w)
    while order < max_order:
        order *= 2
        x, w = _gl_nodes(order)
        cur = half * (f(mid + half * x) @ w)
        if np.abs(cur - prev).max() <= tol:
            return cur
        prev = cur
    raise QuadratureFailure(
        f"Gauss-Legendre doubling did not reach tol={tol:g} by order {max_order}")


def cumulative_trapezoid_from(y: np.ndarray, x: np.ndarray, i0: int) -> np.ndarray:
    """Cumulative trapezoid integral of samples y(x) anchored at index i0.

    Returns F with F[i] = integral from x[i0] to x[i]; F[i0] == 0 exactly.
    """
    dx = np.diff(x)
    seg = 0.5 * (y[1:] + y[:-1]) * dx
    csum = np.concatenate(([0.0], np.cumsum(seg)))
    return csum - csum[i0]
