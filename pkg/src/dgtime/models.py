"""Model problems: a scalar ODE and heat equations in one and two dimensions.

The PDEs are discretized in space by standard central differences (method of
lines), producing stiff linear systems that the DG time stepper advances.
Thermal conductivities are chosen so the smallest discrete eigenvalue is
close to 1, which normalises the time scale of the slowest mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .dg import LinearProblem
from .reference import fhat
from .system import scalar_operator, sparse_operator, tridiagonal_operator

__all__ = [
    "Heat1dConfig",
    "Heat2dConfig",
    "ode_problem",
    "heat1d_problem",
    "heat2d_problem",
    "heat1d_min_eigenvalue",
    "heat2d_min_eigenvalue",
]


def _forcing_value(t: float) -> float:
    return (1.0 + t) * math.exp(-t)


def ode_problem() -> LinearProblem:
    """u' + u/2 = cos(pi t) on (0, 2] with u(0) = 1."""
    return LinearProblem(
        A=scalar_operator(0.5),
        f=lambda t: np.array([math.cos(math.pi * t)]),
        u0=np.array([1.0]),
        T=2.0,
    )


@dataclass(frozen=True)
class Heat1dConfig:
    """1D heat equation u_t - kappa u_xx = f on (0, L) with zero boundary values.

    u0_poly lists the polynomial coefficients of the initial profile in
    increasing powers of x; the default is x(L - x).  The forcing, when
    enabled, is the spatially constant (1 + t) exp(-t).
    """

    L: float = 2.0
    kappa: float = (2.0 / math.pi) ** 2
    P: int = 500
    T: float = 2.0
    u0_poly: tuple[float, ...] = (0.0, 2.0, -1.0)
    with_forcing: bool = True

    def __post_init__(self):
        if self.P < 2:
            raise ValueError("need at least two spatial intervals")
        if self.kappa <= 0:
            raise ValueError("conductivity must be positive")

    @property
    def h(self) -> float:
        return self.L / self.P

    @property
    def x_interior(self) -> np.ndarray:
        return self.h * np.arange(1, self.P)

    def u0(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x), self.u0_poly)

    def f(self, x, t):
        value = _forcing_value(t) if self.with_forcing else 0.0
        return np.full(np.shape(x), value)

    def refined(self, factor: int = 2) -> "Heat1dConfig":
        """Same problem on a spatial grid refined by an integer factor."""
        return Heat1dConfig(self.L, self.kappa, factor * self.P, self.T,
                            self.u0_poly, self.with_forcing)


def heat1d_problem(cfg: Heat1dConfig) -> LinearProblem:
    """Method-of-lines system on the interior grid points of cfg."""
    n = cfg.P - 1
    c = cfg.kappa / cfg.h**2
    A = tridiagonal_operator(np.full(n - 1, -c), np.full(n, 2.0 * c), np.full(n - 1, -c))
    x = cfg.x_interior
    forcing = (lambda t: cfg.f(x, t)) if cfg.with_forcing else None
    return LinearProblem(
        A=A,
        f=forcing,
        u0=cfg.u0(x),
        T=cfg.T,
        norm_weight=cfg.h,
        fhat=fhat if cfg.with_forcing else None,
    )


def heat1d_min_eigenvalue(cfg: Heat1dConfig) -> float:
    """Smallest eigenvalue of the discrete operator: 4 kappa/h^2 sin^2(pi h / 2L)."""
    return 4.0 * cfg.kappa / cfg.h**2 * math.sin(math.pi * cfg.h / (2.0 * cfg.L)) ** 2


def _default_u0_2d(x, y):
    return x * (2.0 - x) * y * (2.0 - y)


@dataclass(frozen=True)
class Heat2dConfig:
    """2D heat equation on (0, Lx) x (0, Ly) with the 5-point Laplacian.

    Unknowns are ordered column-major: the x index varies fastest, so the
    state vector has dimension M = (Px - 1)(Py - 1).
    """

    Lx: float = 2.0
    Ly: float = 2.0
    Px: int = 50
    Py: int = 50
    kappa: float = 2.0 / math.pi**2
    T: float = 2.0
    u0: Callable = _default_u0_2d
    with_forcing: bool = True

    def __post_init__(self):
        if self.Px < 2 or self.Py < 2:
            raise ValueError("need at least two spatial intervals per direction")

    @property
    def hx(self) -> float:
        return self.Lx / self.Px

    @property
    def hy(self) -> float:
        return self.Ly / self.Py

    @property
    def dim(self) -> int:
        return (self.Px - 1) * (self.Py - 1)

    def f(self, x, y, t):
        value = _forcing_value(t) if self.with_forcing else 0.0
        return np.full(np.broadcast(x, y).shape, value)


def heat2d_problem(cfg: Heat2dConfig) -> LinearProblem:
    """Semidiscrete system from the 5-point Laplacian on the interior grid."""
    nx, ny = cfg.Px - 1, cfg.Py - 1
    cx = cfg.kappa / cfg.hx**2
    cy = cfg.kappa / cfg.hy**2

    # assemble the stencil directly in the column-major (x fastest) ordering
    p = np.tile(np.arange(nx), ny)
    q = np.repeat(np.arange(ny), nx)
    idx = q * nx + p
    rows = [idx]
    cols = [idx]
    vals = [np.full(cfg.dim, 2.0 * (cx + cy))]
    west = p > 0
    rows.append(idx[west]); cols.append(idx[west] - 1); vals.append(np.full(west.sum(), -cx))
    east = p < nx - 1
    rows.append(idx[east]); cols.append(idx[east] + 1); vals.append(np.full(east.sum(), -cx))
    south = q > 0
    rows.append(idx[south]); cols.append(idx[south] - nx); vals.append(np.full(south.sum(), -cy))
    north = q < ny - 1
    rows.append(idx[north]); cols.append(idx[north] + nx); vals.append(np.full(north.sum(), -cy))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(cfg.dim, cfg.dim),
    ).tocsr()
    A = sparse_operator(mat)

    xg = cfg.hx * np.arange(1, cfg.Px)
    yg = cfg.hy * np.arange(1, cfg.Py)
    X, Y = np.meshgrid(xg, yg, indexing="ij")
    u0 = cfg.u0(X, Y).ravel(order="F")  # Fortran ravel keeps the x index fastest

    if cfg.with_forcing:
        ones = np.ones(cfg.dim)
        forcing = lambda t: _forcing_value(t) * ones
    else:
        forcing = None
    return LinearProblem(
        A=A,
        f=forcing,
        u0=u0,
        T=cfg.T,
        norm_weight=cfg.hx * cfg.hy,
        fhat=fhat if cfg.with_forcing else None,
    )


def heat2d_min_eigenvalue(cfg: Heat2dConfig) -> float:
    """Smallest eigenvalue of the discrete 5-point operator."""
    sx = 4.0 / cfg.hx**2 * math.sin(math.pi * cfg.hx / (2.0 * cfg.Lx)) ** 2
    sy = 4.0 / cfg.hy**2 * math.sin(math.pi * cfg.hy / (2.0 * cfg.Ly)) ** 2
    return cfg.kappa * (sx + sy)
