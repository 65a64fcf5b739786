"""Post-processing of the DG solution.

Three consumers of the jump structure live here: the continuous degree-r
reconstruction, the jump error indicator, and the interpolating projector
that fixes the value at the right node of each interval.  A diagnostic
measures how far the actual error deviates from its leading Radau-polynomial
profile.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .basis import LegendreWorkspace, legendre_coeff, legendre_eval, legendre_table, make_workspace
from .dg import DgSolution, PiecewiseLegendre, state_norm
from .mesh import TimeMesh

__all__ = [
    "Reconstruction",
    "reconstruct",
    "jump_indicator",
    "pi_tilde_project",
    "error_profile_deviation",
]


class Reconstruction(PiecewiseLegendre):
    """Continuous piecewise polynomial of degree r correcting the DG solution."""

    def __init__(self, mesh: TimeMesh, r: int, coeffs: np.ndarray, norm_weight: float = 1.0):
        super().__init__(mesh, coeffs)
        if coeffs.shape[1] != r + 1:
            raise ValueError("reconstruction must carry r + 1 coefficients")
        self.r = r
        self.norm_weight = norm_weight


def reconstruct(sol: DgSolution, u0: np.ndarray | None = None) -> Reconstruction:
    """Build the continuous reconstruction from the DG coefficients.

    On interval n the correction subtracts (-1)^r / 2 times the jump at
    t_{n-1} multiplied by the degree-r Radau polynomial, which in coefficient
    form means: keep coefficients 0..r-2, add half the signed jump to
    coefficient r-1, and set coefficient r to minus half the signed jump.
    The result matches the DG solution at the interior Radau points and the
    left-limit nodal values, and it starts from u0.
    """
    if u0 is None:
        u0 = sol.u0
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    mesh, r = sol.mesh, sol.r
    N, _, M = sol.coeffs.shape
    jumps = np.empty((N, M))
    for n in range(1, N + 1):
        outgoing = u0 if n == 1 else sol.left_limit(n - 1)
        jumps[n - 1] = sol.right_limit(n - 1) - outgoing
    half_signed = 0.5 * (-1.0) ** r * jumps

    coeffs = np.empty((N, r + 1, M))
    coeffs[:, :r, :] = sol.coeffs
    coeffs[:, r - 1, :] += half_signed
    coeffs[:, r, :] = -half_signed
    return Reconstruction(mesh, r, coeffs, sol.norm_weight)


def jump_indicator(sol: DgSolution, n: int) -> float:
    """Norm of the solution jump at t_{n-1}; estimates the max error on I_n."""
    return state_norm(sol.jump(n), sol.norm_weight)


def pi_tilde_project(v: Callable, mesh: TimeMesh, r: int,
                     ws: LegendreWorkspace | None = None) -> PiecewiseLegendre:
    """Project a continuous function onto piecewise polynomials of degree r - 1.

    Coefficients 0..r-2 are the plain Fourier-Legendre coefficients; the top
    coefficient is adjusted so the projection interpolates v at the right
    node of every interval.
    """
    if ws is None:
        ws = make_workspace(r)
    if ws.r != r:
        raise ValueError("workspace degree does not match r")
    table = legendre_table(max(r - 2, 0), ws.quad_nodes)  # (m, r-1) when r >= 2
    scale = 0.5 * (2.0 * np.arange(max(r - 1, 0)) + 1.0)

    first = np.atleast_1d(np.asarray(v(mesh.nodes[-1]), dtype=float))
    M = first.size
    coeffs = np.zeros((mesh.N, r, M))
    for n in range(1, mesh.N + 1):
        t_quad = mesh.to_physical(n, ws.quad_nodes)
        vals = np.array([np.atleast_1d(np.asarray(v(tq), dtype=float)) for tq in t_quad])
        if r >= 2:
            low = scale[:, None] * (table[:, : r - 1].T @ (ws.quad_weights[:, None] * vals))
            coeffs[n - 1, : r - 1] = low
        v_right = np.atleast_1d(np.asarray(v(mesh.nodes[n]), dtype=float))
        coeffs[n - 1, r - 1] = v_right - coeffs[n - 1, : r - 1].sum(axis=0)
    return PiecewiseLegendre(mesh, coeffs)


def error_profile_deviation(sol: DgSolution, u: Callable, n: int,
                            ws: LegendreWorkspace | None = None,
                            samples: int = 50) -> tuple[np.ndarray, float]:
    """Leading Legendre coefficient of the reference and the profile residual.

    Returns (a_nr, deviation): a_nr is the degree-r coefficient of the
    reference u on interval n, and deviation is the sampled maximum norm of
    U - u + a_nr (p_r - p_{r-1}), i.e. what is left of the error after
    removing its predicted Radau-polynomial profile.
    """
    if ws is None:
        ws = make_workspace(sol.r)
    r = sol.r
    a, b = sol.mesh.nodes[n - 1], sol.mesh.nodes[n]
    anr = np.atleast_1d(legendre_coeff(u, (a, b), r, ws.quad))

    taus = np.linspace(-1.0, 1.0, samples)
    profile = legendre_eval(r, taus) - legendre_eval(r - 1, taus)
    uvals = np.array([np.atleast_1d(np.asarray(u(t), dtype=float))
                      for t in sol.mesh.to_physical(n, taus)])
    resid = sol.sample_interval(n, taus) - uvals + profile[:, None] * anr[None, :]
    dev = max(state_norm(row, sol.norm_weight) for row in resid)
    return anr, dev
