"""Legendre polynomial machinery on the reference interval [-1, 1].

The time stepping scheme, the post-processing and the error measurement all
work in a local Legendre basis, so this module owns polynomial evaluation,
the trial/test coupling matrices G and H, Gauss-Legendre quadrature and the
right Gauss-Radau abscissas.  Everything is computed from the three-term
recurrence; no tabulated nodes or weights are used.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "LegendreWorkspace",
    "make_workspace",
    "legendre_eval",
    "legendre_deriv",
    "legendre_table",
    "g_matrix",
    "h_diag",
    "radau_abscissas",
    "radau_rule",
    "gauss_rule",
    "legendre_coeff",
]

MAX_GAUSS_SIZE = 64


def legendre_eval(j: int, tau):
    """Evaluate the Legendre polynomial P_j (normalized so P_j(1) = 1).

    Accepts a scalar or an array of points in [-1, 1].
    """
    if j < 0:
        raise ValueError("polynomial degree must be nonnegative")
    t = np.asarray(tau, dtype=float)
    scalar = t.ndim == 0
    p_prev = np.ones_like(t)
    if j == 0:
        return float(p_prev) if scalar else p_prev
    p = t.copy()
    for m in range(2, j + 1):
        p_prev, p = p, ((2 * m - 1) * t * p - (m - 1) * p_prev) / m
    return float(p) if scalar else p


def legendre_deriv(j: int, tau):
    """Derivative P_j' via (1 - tau^2) P_j' = j (P_{j-1} - tau P_j)."""
    if j < 0:
        raise ValueError("polynomial degree must be nonnegative")
    t = np.asarray(tau, dtype=float)
    scalar = t.ndim == 0
    if j == 0:
        out = np.zeros_like(t)
        return float(out) if scalar else out
    pj = legendre_eval(j, t)
    pjm1 = legendre_eval(j - 1, t)
    interior = np.abs(t) < 1.0
    out = np.where(interior, j * (pjm1 - t * pj) / np.where(interior, 1.0 - t * t, 1.0), 0.0)
    # endpoint values P_j'(+-1) = (+-1)^{j-1} j(j+1)/2
    edge = 0.5 * j * (j + 1)
    out = np.where(t == 1.0, edge, out)
    out = np.where(t == -1.0, (-1.0) ** (j - 1) * edge, out)
    return float(out) if scalar else out


def legendre_table(jmax: int, taus: np.ndarray) -> np.ndarray:
    """Table of P_0..P_jmax at the given points, shape (len(taus), jmax + 1)."""
    t = np.atleast_1d(np.asarray(taus, dtype=float))
    table = np.empty((t.size, jmax + 1))
    table[:, 0] = 1.0
    if jmax >= 1:
        table[:, 1] = t
    for m in range(2, jmax + 1):
        table[:, m] = ((2 * m - 1) * t * table[:, m - 1] - (m - 1) * table[:, m - 2]) / m
    return table


def g_matrix(r: int) -> np.ndarray:
    """Coupling matrix G[i, j] = (-1)^(i+j) if i >= j else 1 (0-based)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    i, j = np.indices((r, r))
    lower = (-1.0) ** (i + j)
    return np.where(i >= j, lower, 1.0)


def h_diag(r: int) -> np.ndarray:
    """Diagonal of the mass matrix on [-1, 1]: H[j] = 1 / (2j + 1)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return 1.0 / (2.0 * np.arange(r) + 1.0)


def _radau_poly(r: int, tau):
    return legendre_eval(r, tau) - legendre_eval(r - 1, tau)


def radau_abscissas(r: int) -> np.ndarray:
    """The r roots of P_r - P_{r-1} in increasing order; the last is exactly 1.

    These are the right-hand Gauss-Radau points.  Interior roots are found by
    bracketing sign changes on a cos-spaced grid and then running a Newton
    iteration safeguarded by bisection (the Newton step falls back to the
    bracket midpoint whenever it would leave the bracket).
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if r == 1:
        return np.array([1.0])

    # the largest interior root stays well below cos(0.005) for r <= 12
    grid = np.cos(np.linspace(np.pi, 0.005, 80 * r))
    w = _radau_poly(r, grid)
    sign_change = np.nonzero(np.sign(w[:-1]) * np.sign(w[1:]) < 0)[0]
    if sign_change.size != r - 1:
        raise RuntimeError(f"expected {r - 1} interior Radau brackets, found {sign_change.size}")

    roots = np.empty(r)
    for idx, s in enumerate(sign_change):
        lo, hi = grid[s], grid[s + 1]
        flo = w[s]
        x = 0.5 * (lo + hi)
        converged = False
        for _ in range(100):
            fx = _radau_poly(r, x)
            if fx == 0.0:
                converged = True
                break
            if (fx > 0) == (flo > 0):
                lo = x
            else:
                hi = x
            dfx = legendre_deriv(r, x) - legendre_deriv(r - 1, x)
            step = fx / dfx if dfx != 0.0 else np.inf
            x_new = x - step
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) <= 1e-14 * max(1.0, abs(x)):
                x = x_new
                converged = True
                break
            x = x_new
        if not converged:
            raise RuntimeError(f"Radau root iteration failed to converge for r={r}")
        # one final bisection safeguard keeps the root inside its bracket
        if not (grid[s] <= x <= grid[s + 1]):
            x = 0.5 * (grid[s] + grid[s + 1])
        roots[idx] = x
    roots[r - 1] = 1.0
    return roots


def radau_rule(r: int) -> tuple[np.ndarray, np.ndarray]:
    """r-point right Gauss-Radau rule on [-1, 1], exact for degree <= 2r - 2.

    Weights come from solving the monomial moment system on the Radau
    abscissas; exactness beyond degree r - 1 is then automatic and checked
    in the tests.
    """
    nodes = radau_abscissas(r)
    vander = np.vander(nodes, r, increasing=True).T
    moments = np.array([2.0 / (j + 1) if j % 2 == 0 else 0.0 for j in range(r)])
    weights = np.linalg.solve(vander, moments)
    return nodes, weights


def gauss_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss-Legendre rule on [-1, 1], exact for degree <= 2m - 1.

    Nodes from Newton iteration on P_m; weights 2 / ((1 - x^2) P_m'(x)^2).
    """
    if m < 1:
        raise ValueError("rule size must be at least 1")
    if m > MAX_GAUSS_SIZE:
        raise ValueError(f"rule size {m} exceeds supported maximum {MAX_GAUSS_SIZE}")
    i = np.arange(m)
    x = np.cos(np.pi * (4 * i + 3) / (4 * m + 2))
    for _ in range(100):
        p = legendre_eval(m, x)
        dp = legendre_deriv(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    dp = legendre_deriv(m, x)
    weights = 2.0 / ((1.0 - x * x) * dp * dp)
    # enforce the exact +-symmetry of the rule
    x = 0.5 * (x - x[::-1])
    weights = 0.5 * (weights + weights[::-1])
    order = np.argsort(x)
    return x[order], weights[order]


def legendre_coeff(v: Callable, interval: tuple[float, float], j: int,
                   quad: tuple[np.ndarray, np.ndarray] | None = None):
    """Local Fourier-Legendre coefficient of v on an interval.

    Computes ((2j + 1) / k) * integral of v(t) p_j(t) over (a, b), where p_j
    is P_j mapped to the interval and k = b - a.  The integral is evaluated
    by mapping the supplied quadrature rule (default: Gauss of size j + 3)
    through the affine map, so it is exact (to roundoff) whenever v is a
    polynomial of degree <= 2m - 1 - j.

    v may return scalars or state vectors; the result matches.
    """
    a, b = interval
    if not b > a:
        raise ValueError("interval must satisfy b > a")
    if quad is None:
        quad = gauss_rule(j + 3)
    nodes, weights = quad
    t = 0.5 * ((b - a) * nodes + (b + a))
    vals = np.array([np.asarray(v(tt), dtype=float) for tt in t])
    pj = legendre_eval(j, nodes)
    integral = np.tensordot(weights * pj, vals, axes=1)
    coeff = 0.5 * (2 * j + 1) * integral
    return coeff if np.ndim(coeff) else float(coeff)


@dataclass(frozen=True)
class LegendreWorkspace:
    """Immutable per-degree basis tables shared across all time steps."""

    r: int
    G: np.ndarray
    H: np.ndarray
    radau: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray

    @property
    def quad(self) -> tuple[np.ndarray, np.ndarray]:
        return self.quad_nodes, self.quad_weights


@lru_cache(maxsize=None)
def _cached_workspace(r: int, quad_size: int) -> LegendreWorkspace:
    arrays = (g_matrix(r), h_diag(r), radau_abscissas(r), *gauss_rule(quad_size))
    for arr in arrays:
        arr.setflags(write=False)
    return LegendreWorkspace(r, *arrays)


def make_workspace(r: int, quad_size: int | None = None) -> LegendreWorkspace:
    """Build (or fetch the cached) workspace for degree count r.

    The default quadrature size r + 3 integrates all polynomial terms of the
    scheme exactly and resolves the smooth model forcings to ~1e-14.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if quad_size is None:
        quad_size = r + 3
    return _cached_workspace(r, quad_size)
