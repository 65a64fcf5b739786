"""Discontinuous Galerkin time stepping for u' + A u = f.

The solution on each interval is a polynomial of degree at most r - 1 stored
as local Legendre coefficients, so it may jump at the break points.  One step
advances the expansion by solving the block system assembled in `system`;
the right-hand side combines the outgoing value from the previous interval
with moments of the forcing against the local test polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import LegendreWorkspace, legendre_table, make_workspace, radau_rule
from .mesh import TimeMesh
from .system import LinearOperator, factorize_step_matrix, solve_step

__all__ = ["LinearProblem", "PiecewiseLegendre", "DgSolution", "dg_solve", "state_norm"]


def state_norm(v: np.ndarray, weight: float = 1.0) -> float:
    """Discrete norm: |v| for scalars, sqrt(weight) * l2 for grid states."""
    return float(np.sqrt(weight) * np.linalg.norm(np.atleast_1d(v)))


@dataclass
class LinearProblem:
    """Initial-value problem u' + A u = f on (0, T] with u(0) = u0.

    norm_weight is the mesh weight of the discrete spatial norm (1 for
    scalar problems, h or hx*hy for grid states).  fhat, when present, is
    the Laplace transform of the scalar time factor of a spatially constant
    forcing; reference solvers use it to build resolvent right-hand sides.
    """

    A: LinearOperator
    f: Callable[[float], np.ndarray] | None
    u0: np.ndarray
    T: float
    norm_weight: float = 1.0
    fhat: Callable[[complex], complex] | None = None

    def __post_init__(self):
        self.u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        if self.u0.shape != (self.A.dim,):
            raise ValueError("initial state dimension does not match the operator")
        if self.T <= 0:
            raise ValueError("final time must be positive")


class PiecewiseLegendre:
    """Piecewise polynomial stored as per-interval Legendre coefficients.

    coeffs has shape (N, q, M): N intervals, q coefficients per interval,
    state dimension M.  Evaluation at a break point returns the left limit.
    """

    def __init__(self, mesh: TimeMesh, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[0] != mesh.N:
            raise ValueError("coefficient array must have shape (N, q, M)")
        self.mesh = mesh
        self.coeffs = coeffs

    @property
    def degree_count(self) -> int:
        return self.coeffs.shape[1]

    @property
    def dim(self) -> int:
        return self.coeffs.shape[2]

    def sample_interval(self, n: int, taus) -> np.ndarray:
        """Values on interval n at reference coordinates, shape (S, M)."""
        self.mesh._check_index(n)
        table = legendre_table(self.degree_count - 1, taus)
        return table @ self.coeffs[n - 1]

    def eval(self, t: float) -> np.ndarray:
        n = self.mesh.interval_of(t)
        tau = self.mesh.to_reference(n, t)
        return self.sample_interval(n, [tau])[0]

    def left_limit(self, n: int) -> np.ndarray:
        """Value at t_n from interval n (all local polynomials equal 1 there)."""
        self.mesh._check_index(n)
        return self.coeffs[n - 1].sum(axis=0)

    def right_limit(self, n: int) -> np.ndarray:
        """Value at t_n from interval n + 1, for 0 <= n <= N - 1."""
        self.mesh._check_index(n + 1)
        signs = (-1.0) ** np.arange(self.degree_count)
        return signs @ self.coeffs[n]


class DgSolution(PiecewiseLegendre):
    """DG solution with its trial degree, initial state and norm weight."""

    def __init__(self, mesh: TimeMesh, r: int, coeffs: np.ndarray,
                 u0: np.ndarray, norm_weight: float = 1.0):
        super().__init__(mesh, coeffs)
        if coeffs.shape[1] != r:
            raise ValueError("coefficient count must equal r")
        self.r = r
        self.u0 = np.atleast_1d(np.asarray(u0, dtype=float))
        self.norm_weight = norm_weight

    def jump(self, n: int) -> np.ndarray:
        """Jump at t_{n-1}: incoming right limit minus outgoing left limit."""
        self.mesh._check_index(n)
        outgoing = self.u0 if n == 1 else self.left_limit(n - 1)
        return self.right_limit(n - 1) - outgoing


def dg_solve(problem: LinearProblem, mesh: TimeMesh, r: int,
             ws: LegendreWorkspace | None = None,
             moment_quadrature: str = "gauss") -> DgSolution:
    """Run the DG time stepping loop over the whole mesh.

    Per step the right-hand side entries are (-1)^i times the previous left
    limit plus the forcing moments, integrated by a quadrature rule mapped
    through the interval.  The default "gauss" rule (workspace size, r + 3)
    resolves the moments essentially exactly for smooth forcings; passing
    "radau" evaluates them by the r-point right Radau rule instead, which
    makes the stepper coincide with the r-stage Radau IIA Runge-Kutta
    method.  Factorizations are cached per distinct step size (grouped at
    12 significant digits), so a uniform mesh factors exactly once.
    """
    if ws is None:
        ws = make_workspace(r)
    if ws.r != r:
        raise ValueError("workspace degree does not match r")
    if moment_quadrature == "gauss":
        q_nodes, q_weights = ws.quad
    elif moment_quadrature == "radau":
        q_nodes, q_weights = radau_rule(r)
    else:
        raise ValueError(f"unknown moment quadrature {moment_quadrature!r}")
    M = problem.A.dim
    N = mesh.N
    test_table = legendre_table(r - 1, q_nodes)  # (m, r)
    signs = (-1.0) ** np.arange(r)

    coeffs = np.empty((N, r, M))
    factorizations: dict[str, object] = {}
    prev_left = problem.u0.copy()
    for n in range(1, N + 1):
        k = float(mesh.steps[n - 1])
        key = np.format_float_scientific(k, precision=12)
        fac = factorizations.get(key)
        if fac is None:
            fac = factorize_step_matrix(problem.A, ws, k)
            factorizations[key] = fac

        rhs = signs[:, None] * prev_left[None, :]
        if problem.f is not None:
            t_quad = mesh.to_physical(n, q_nodes)
            fvals = np.empty((t_quad.size, M))
            for q, tq in enumerate(t_quad):
                try:
                    fvals[q] = np.atleast_1d(np.asarray(problem.f(tq), dtype=float))
                except Exception as exc:
                    raise RuntimeError(f"forcing evaluation failed at t={tq}") from exc
            rhs = rhs + 0.5 * k * test_table.T @ (q_weights[:, None] * fvals)

        U = solve_step(fac, rhs)
        coeffs[n - 1] = U
        prev_left = U.sum(axis=0)

    return DgSolution(mesh, r, coeffs, problem.u0, problem.norm_weight)
