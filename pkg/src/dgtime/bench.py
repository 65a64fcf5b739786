"""Benchmark harness: error norms, convergence tables, and the CLI.

Errors are estimated by sampling each time interval on an equispaced
reference grid (both endpoints included, so the one-sided limits at the
break points are seen), optionally restricted to a window or damped by the
weight min(t^alpha, 1).  Tables report errors of the DG solution, of its
reconstruction, and of the nodal values, with observed rates between
consecutive mesh halvings.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dg import dg_solve, state_norm
from .mesh import uniform_mesh
from .models import Heat1dConfig, Heat2dConfig, heat1d_problem, heat2d_problem, ode_problem
from .postprocess import reconstruct
from .reference import Heat1dReference, Heat2dReference, ode_exact, richardson

__all__ = [
    "TableRow",
    "ConvergenceTable",
    "ExtrapolatedSolution",
    "max_error_sampled",
    "observed_rates",
    "run_experiment",
    "run_profile",
    "main",
]

DEFAULT_SAMPLES = 50
HEAT2D_SAMPLES = 4
ODE_N_LIST = (4, 8, 16, 32, 64, 128)
HEAT_N_LIST = (8, 16, 32, 64, 128)


class ExtrapolatedSolution:
    """Richardson combination of solutions on spatial grids h and h/2.

    Both members must share the time mesh; values are extrapolated pointwise
    in time onto the coarse grid, which also supplies the norm weight.
    """

    def __init__(self, coarse, fine):
        if not np.array_equal(coarse.mesh.nodes, fine.mesh.nodes):
            raise ValueError("extrapolation partners must share the time mesh")
        self.coarse = coarse
        self.fine = fine
        self.mesh = coarse.mesh
        self.norm_weight = coarse.norm_weight

    def sample_interval(self, n: int, taus) -> np.ndarray:
        return richardson(self.coarse.sample_interval(n, taus),
                          self.fine.sample_interval(n, taus))

    def left_limit(self, n: int) -> np.ndarray:
        return richardson(self.coarse.left_limit(n), self.fine.left_limit(n))


def _reference_values(reference, ts: np.ndarray) -> np.ndarray:
    if hasattr(reference, "eval_many"):
        return reference.eval_many(ts)
    return np.array([np.atleast_1d(np.asarray(reference(t), dtype=float)) for t in ts])


def max_error_sampled(approx, reference, samples_per_interval: int = DEFAULT_SAMPLES,
                      weight: float | None = None,
                      window: tuple[float, float] | None = None,
                      nodal: bool = False, min_interval: int = 1) -> float:
    """Maximum sampled (weighted) error of a piecewise solution.

    approx needs .mesh, .sample_interval(n, taus), .left_limit(n) and a
    .norm_weight; reference maps t to the exact state.  With nodal=True only
    the left limits at the mesh nodes enter.  weight is the exponent alpha
    of min(t^alpha, 1).  The window selects whole intervals: interval n
    counts exactly when its right node t_n lies inside, and then all of its
    samples count, so a window starting at a break point still sees the
    one-sided values just left of it.  min_interval skips leading intervals
    (the sampled sup on I_1 is dominated by the reduced regularity at t = 0,
    and some references cannot be evaluated there).
    """
    mesh = approx.mesh
    norm_weight = getattr(approx, "norm_weight", 1.0)
    lo, hi = window if window is not None else (mesh.nodes[0], mesh.nodes[-1])
    if not hi > lo:
        raise ValueError("empty error window")
    tol = 1e-12 * mesh.T

    worst = 0.0
    taus = np.linspace(-1.0, 1.0, samples_per_interval)
    for n in range(min_interval, mesh.N + 1):
        tn = mesh.nodes[n]
        if not (lo - tol <= tn <= hi + tol):
            continue
        if nodal:
            err = np.atleast_1d(approx.left_limit(n)) - _reference_values(reference, [tn])[0]
            w = min(tn ** weight, 1.0) if weight is not None else 1.0
            worst = max(worst, w * state_norm(err, norm_weight))
            continue
        ts = mesh.to_physical(n, taus)
        vals = approx.sample_interval(n, taus)
        refs = _reference_values(reference, ts)
        errs = np.sqrt(norm_weight) * np.linalg.norm(vals - refs, axis=1)
        if weight is not None:
            errs = errs * np.minimum(ts ** weight, 1.0)
        worst = max(worst, float(np.max(errs)))
    return worst


def observed_rates(errors: Sequence[float], n_values: Sequence[int] | None = None) -> list[float]:
    """Rates log2(e_i / e_{i+1}) between consecutive rows of a halving study."""
    if n_values is not None:
        for a, b in zip(n_values, n_values[1:]):
            if b != 2 * a:
                raise ValueError("N values must double between rows")
    return [float(np.log2(a / b)) for a, b in zip(errors, errors[1:])]


@dataclass
class TableRow:
    N: int
    P: int
    err_u: float
    rate_u: float | None
    err_ustar: float
    rate_ustar: float | None
    err_nodal: float
    rate_nodal: float | None


@dataclass
class ConvergenceTable:
    """Rows of a convergence study plus descriptors of how errors are measured."""

    experiment: str
    norm: str
    weight: str
    window: str
    rows: list[TableRow]

    CSV_HEADER = "N,P,err_U,rate_U,err_Ustar,rate_Ustar,err_nodal,rate_nodal"

    def to_csv(self) -> str:
        def cell(v):
            return "" if v is None else repr(float(v))

        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([str(r.N), str(r.P), cell(r.err_u), cell(r.rate_u),
                                   cell(r.err_ustar), cell(r.rate_ustar),
                                   cell(r.err_nodal), cell(r.rate_nodal)]))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        def err(v):
            return f"{v:.2e}"

        def rate(v):
            return "" if v is None else f"{v:.3f}"

        head = (f"## {self.experiment}  (norm: {self.norm}, weight: {self.weight}, "
                f"window: {self.window})")
        lines = [
            head,
            "",
            "| N | P | err_U | rate | err_U* | rate | err_nodal | rate |",
            "|---:|---:|---:|---:|---:|---:|---:|---:|",
        ]
        for r in self.rows:
            lines.append(f"| {r.N} | {r.P} | {err(r.err_u)} | {rate(r.rate_u)} | "
                         f"{err(r.err_ustar)} | {rate(r.rate_ustar)} | "
                         f"{err(r.err_nodal)} | {rate(r.rate_nodal)} |")
        return "\n".join(lines) + "\n"


def _attach_rates(rows_raw: list[tuple[int, int, float, float, float]]) -> list[TableRow]:
    ns = [row[0] for row in rows_raw]
    cols = list(zip(*[(r[2], r[3], r[4]) for r in rows_raw]))
    rates = [observed_rates(col, ns) for col in cols]
    out = []
    for i, (n, p, eu, es, en) in enumerate(rows_raw):
        pick = lambda c: None if i == 0 else rates[c][i - 1]
        out.append(TableRow(n, p, eu, pick(0), es, pick(1), en, pick(2)))
    return out


def _weight_exponents(r: int, weighted: float | None) -> tuple[float | None, float | None, float | None]:
    """Per-column weight exponents from the regularity deficit.

    The three error families converge at orders r, r + 1 and 2r - 1, so a
    data regularity deficit alpha is compensated by the weight exponents
    r - alpha, r + 1 - alpha and 2r - 1 - alpha.
    """
    if weighted is None:
        return None, None, None
    return r - weighted, r + 1 - weighted, 2 * r - 1 - weighted


def _window(T: float, cutoff: bool) -> tuple[float, float] | None:
    return (T / 4.0, T) if cutoff else None


def _sample_floor(T: float, n_max: int, samples: int) -> float:
    """Smallest positive sample time: the first interior grid point of I_1."""
    return (T / n_max) / (samples - 1)


def _reference_floor(T: float, n_list: Sequence[int], cutoff: bool, samples: int) -> float:
    """Smallest positive time the reference will be asked for.

    Without a cutoff that is the first sample inside I_1 on the finest mesh.
    With the cutoff window the first included interval is the one whose
    right node reaches T/4, and its samples extend down to its left node.
    """
    if not cutoff:
        return _sample_floor(T, max(n_list), samples)
    floors = []
    for n in n_list:
        first = math.ceil(n / 4.0)
        left = (first - 1) * T / n
        floors.append(left if left > 0 else _sample_floor(T, n, samples))
    return min(floors)


def run_experiment(experiment: str, r: int | None = None,
                   n_list: Sequence[int] | None = None, p: int | None = None,
                   weighted: float | None = None, cutoff: bool = False,
                   homogeneous: bool = False, samples: int | None = None,
                   half_nodes: int | None = None,
                   moments: str | None = None) -> ConvergenceTable:
    """Run one of the built-in convergence experiments.

    weighted, when given, is the regularity deficit alpha of the initial
    data; see _weight_exponents.  homogeneous switches off the forcing.
    half_nodes overrides the contour node count of the PDE references.
    samples and moments default per experiment: the 2D study measures on a
    coarse grid of 4 points per interval and integrates the forcing moments
    by the Radau rule (the Radau IIA form of the stepper); the others use
    50 points and near-exact Gauss moments.
    """
    if experiment == "ode":
        return _run_ode(r or 4, tuple(n_list or ODE_N_LIST), weighted, cutoff,
                        samples or DEFAULT_SAMPLES)
    if experiment == "heat1d":
        return _run_heat1d(r or 3, tuple(n_list or HEAT_N_LIST), p or 500,
                           weighted, cutoff, homogeneous, samples or DEFAULT_SAMPLES,
                           half_nodes, moments or "gauss")
    if experiment == "heat2d":
        return _run_heat2d(r or 3, tuple(n_list or HEAT_N_LIST), p or 50,
                           weighted, cutoff, homogeneous, samples or HEAT2D_SAMPLES,
                           half_nodes, moments or "radau")
    raise ValueError(f"unknown experiment {experiment!r}")


def _descriptors(weighted, cutoff, T):
    weight_desc = "none" if weighted is None else f"min(t^(order-{weighted}),1)"
    window_desc = f"[{T / 4}, {T}]" if cutoff else "full"
    return weight_desc, window_desc


def _row_errors(approx, approx_star, reference, exps, window, samples, skip_first=False):
    # weighted full-window runs measure the sampled sups from I_2 on (the
    # nodal maximum still sees every node, including t_1)
    first = 2 if skip_first else 1
    w_u, w_star, w_nodal = exps
    err_u = max_error_sampled(approx, reference, samples, w_u, window, min_interval=first)
    err_star = max_error_sampled(approx_star, reference, samples, w_star, window,
                                 min_interval=first)
    err_nodal = max_error_sampled(approx, reference, samples, w_nodal, window, nodal=True)
    return err_u, err_star, err_nodal


def _run_ode(r, n_list, weighted, cutoff, samples) -> ConvergenceTable:
    problem = ode_problem()
    reference = lambda t: np.array([ode_exact(t)])
    exps = _weight_exponents(r, weighted)
    window = _window(problem.T, cutoff)
    raw = []
    for n in n_list:
        mesh = uniform_mesh(problem.T, n)
        sol = dg_solve(problem, mesh, r)
        recon = reconstruct(sol)
        raw.append((n, 1, *_row_errors(sol, recon, reference, exps, window, samples)))
    weight_desc, window_desc = _descriptors(weighted, cutoff, problem.T)
    return ConvergenceTable("ode", "abs", weight_desc, window_desc, _attach_rates(raw))


def _run_heat1d(r, n_list, p, weighted, cutoff, homogeneous, samples, half_nodes,
                moments="gauss") -> ConvergenceTable:
    cfg = Heat1dConfig(P=p, with_forcing=not homogeneous)
    prob_c = heat1d_problem(cfg)
    prob_f = heat1d_problem(cfg.refined())
    t_lo = _reference_floor(cfg.T, n_list, cutoff, samples)
    kwargs = {} if half_nodes is None else {"half_nodes": half_nodes}
    reference = Heat1dReference(cfg, t_lo, cfg.T, **kwargs)
    exps = _weight_exponents(r, weighted)
    window = _window(cfg.T, cutoff)
    raw = []
    for n in n_list:
        mesh = uniform_mesh(cfg.T, n)
        sol_c = dg_solve(prob_c, mesh, r, moment_quadrature=moments)
        sol_f = dg_solve(prob_f, mesh, r, moment_quadrature=moments)
        sol = ExtrapolatedSolution(sol_c, sol_f)
        recon = ExtrapolatedSolution(reconstruct(sol_c), reconstruct(sol_f))
        raw.append((n, p, *_row_errors(sol, recon, reference, exps, window, samples,
                                       skip_first=weighted is not None)))
    weight_desc, window_desc = _descriptors(weighted, cutoff, cfg.T)
    return ConvergenceTable("heat1d", "discrete-L2(h)", weight_desc, window_desc,
                            _attach_rates(raw))


def _run_heat2d(r, n_list, p, weighted, cutoff, homogeneous, samples, half_nodes,
                moments="radau") -> ConvergenceTable:
    cfg = Heat2dConfig(Px=p, Py=p, with_forcing=not homogeneous)
    problem = heat2d_problem(cfg)
    t_lo = _reference_floor(cfg.T, n_list, cutoff, samples)
    kwargs = {} if half_nodes is None else {"half_nodes": half_nodes}
    reference = Heat2dReference(problem, t_lo, cfg.T, **kwargs)
    exps = _weight_exponents(r, weighted)
    window = _window(cfg.T, cutoff)
    raw = []
    for n in n_list:
        mesh = uniform_mesh(cfg.T, n)
        sol = dg_solve(problem, mesh, r, moment_quadrature=moments)
        recon = reconstruct(sol)
        raw.append((n, p, *_row_errors(sol, recon, reference, exps, window, samples,
                                       skip_first=weighted is not None)))
    weight_desc, window_desc = _descriptors(weighted, cutoff, cfg.T)
    return ConvergenceTable("heat2d", "discrete-L2(hx*hy)", weight_desc, window_desc,
                            _attach_rates(raw))


def run_profile(experiment: str, r: int | None = None, n: int = 8,
                p: int | None = None, samples: int = DEFAULT_SAMPLES) -> str:
    """Per-sample error profile data: t, U - u, U - U* (norms for PDE states).

    For the scalar ODE the two columns are signed differences, matching the
    usual error-profile plots; for the PDEs they are discrete norms.
    """
    if experiment == "ode":
        problem, reference, r = ode_problem(), (lambda t: np.array([ode_exact(t)])), (r or 4)
        scalar = True
    elif experiment == "heat1d":
        cfg = Heat1dConfig(P=p or 500)
        problem, r = heat1d_problem(cfg), (r or 3)
        reference = Heat1dReference(cfg, _sample_floor(cfg.T, n, samples), cfg.T)
        scalar = False
    elif experiment == "heat2d":
        cfg = Heat2dConfig(Px=p or 50, Py=p or 50)
        problem, r = heat2d_problem(cfg), (r or 3)
        reference = Heat2dReference(problem, _sample_floor(cfg.T, n, samples), cfg.T)
        scalar = False
    else:
        raise ValueError(f"unknown experiment {experiment!r}")

    mesh = uniform_mesh(problem.T, n)
    sol = dg_solve(problem, mesh, r)
    recon = reconstruct(sol)
    taus = np.linspace(-1.0, 1.0, samples)
    lines = ["t,U_minus_u,U_minus_Ustar"]
    for m in range(1, mesh.N + 1):
        ts = mesh.to_physical(m, taus)
        uvals = sol.sample_interval(m, taus)
        svals = recon.sample_interval(m, taus)
        rvals = _reference_values(reference, ts)
        for i, t in enumerate(ts):
            if scalar:
                a = uvals[i, 0] - rvals[i, 0]
                b = uvals[i, 0] - svals[i, 0]
            else:
                a = state_norm(uvals[i] - rvals[i], problem.norm_weight)
                b = state_norm(uvals[i] - svals[i], problem.norm_weight)
            lines.append(f"{float(t)!r},{float(a)!r},{float(b)!r}")
    return "\n".join(lines) + "\n"


def _parse_n_list(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise SystemExit(f"invalid --N list: {text!r}") from exc


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dgtime",
        description="Convergence benchmarks for DG time stepping of parabolic problems",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in ("ode", "heat1d", "heat2d"):
        q = sub.add_parser(name, help=f"run the {name} experiment")
        q.add_argument("--r", type=int, default=None, help="polynomial degree count")
        q.add_argument("--N", type=str, default=None, help="comma list of step counts")
        q.add_argument("--P", type=int, default=None, help="spatial intervals")
        q.add_argument("--weighted", type=float, default=None, metavar="ALPHA",
                       help="weighted errors with regularity deficit ALPHA")
        q.add_argument("--cutoff", action="store_true",
                       help="restrict errors to the window [T/4, T]")
        q.add_argument("--homogeneous", action="store_true", help="drop the forcing")
        q.add_argument("--samples", type=int, default=None,
                       help="sample points per interval (default 50; 4 for heat2d)")
        q.add_argument("--moments", choices=("gauss", "radau"), default=None,
                       help="forcing moment quadrature (default gauss; radau for heat2d)")
        q.add_argument("--format", choices=("csv", "md"), default="md")
        q.add_argument("--out", type=str, default=None)
        q.add_argument("--profile", action="store_true",
                       help="dump per-sample error profile data instead of a table")
    args = parser.parse_args(argv)

    n_list = _parse_n_list(args.N)
    if args.profile:
        if n_list is None or len(n_list) != 1:
            raise SystemExit("--profile needs exactly one value in --N")
        text = run_profile(args.experiment, r=args.r, n=n_list[0], p=args.P,
                           samples=args.samples or DEFAULT_SAMPLES)
    else:
        table = run_experiment(args.experiment, r=args.r, n_list=n_list, p=args.P,
                               weighted=args.weighted, cutoff=args.cutoff,
                               homogeneous=args.homogeneous, samples=args.samples,
                               moments=args.moments)
        text = table.to_csv() if args.format == "csv" else table.to_markdown()

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
