"""Approximate Fekete nodes via box-constrained convex energy minimization.

Maximizing the Gaussian-weighted node-separation product is equivalent to
minimizing the smooth energy

    I(x_1, ..., x_n) = eps^2 * sum_k x_k^2 - sum_{i<j} log|x_i - x_j|

over ordered tuples in the interval.  The Hessian of ``I`` is strictly
diagonally dominant with positive diagonal, hence positive-definite, so the
energy is convex and the minimizer unique.  :func:`solve_fekete` runs a
damped projected Newton method with an active set for nodes clamped at the
interval endpoints; the line search preserves the strict node ordering,
which costs nothing because the energy blows up when nodes collide.

The solver runs in hardware precision.  Energy, gradient and Hessian are
well-conditioned; extended precision is only needed downstream, for Gram
solves and determinant checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .baselines import chebyshev_points
from .basis import (
    CoincidentNodesError,
    Interval,
    PointSet,
    Rectangle,
    as_nodes,
    log_weighted_vandermonde,
)
from .numerics import Matrix, PrecisionContext

__all__ = [
    "ConvergenceError",
    "EnergyProblem",
    "SolveReport",
    "energy",
    "energy_gradient",
    "energy_hessian",
    "solve_fekete",
    "tensor_fekete",
]

_ARMIJO_SLOPE = 1e-4
_MAX_BACKTRACKS = 80


class ConvergenceError(RuntimeError):
    """Solver stopped before reaching the optimality tolerance.

    The best iterate found is attached as ``report``.
    """

    def __init__(self, message: str, report: "SolveReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class EnergyProblem:
    """Instance data for the node energy: count, kernel scale, and domain."""

    n: int
    eps: float
    interval: Interval

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not float(self.eps) > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of :func:`solve_fekete`.

    ``final_grad_norm`` is the optimality residual in the max norm: plain
    gradient magnitude at interior nodes, one-sided at clamped nodes.
    ``active_bounds`` holds the (0-based) indices of nodes sitting exactly
    at an interval endpoint.  ``energy_trace`` records the energy at the
    start of every iteration and is non-increasing.
    """

    points: PointSet
    iterations: int
    final_grad_norm: float
    active_bounds: frozenset
    converged: bool
    energy_trace: tuple


def energy(points, eps: float) -> float:
    """Node energy ``eps^2 sum x_k^2 - sum_{i<j} log|x_i - x_j|``.

    Raises :class:`CoincidentNodesError` when two nodes coincide (the
    energy is +infinity there).
    """
    return -log_weighted_vandermonde(points, eps)


def energy_gradient(points, eps: float) -> np.ndarray:
    """Analytic gradient: ``2 eps^2 x_i - sum_{j != i} 1/(x_i - x_j)``."""
    x = np.asarray(as_nodes(points), dtype=float)
    _require_distinct(x)
    return _gradient(x, float(eps) ** 2)


def energy_hessian(points, eps: float) -> Matrix:
    """Analytic Hessian, symmetric and strictly diagonally dominant.

    Diagonal entries are ``2 eps^2 + sum_{k != i} (x_i - x_k)^-2`` and
    off-diagonal entries ``-(x_i - x_j)^-2``, so Gershgorin gives positive
    definiteness outright.
    """
    x = np.asarray(as_nodes(points), dtype=float)
    _require_distinct(x)
    return Matrix(_hessian(x, float(eps) ** 2).tolist())


def solve_fekete(
    problem: EnergyProblem,
    tol: float = 1e-10,
    max_iter: int = 200,
    ctx: PrecisionContext | None = None,
) -> SolveReport:
    """Minimize the node energy over ordered tuples in the interval.

    Damped Newton iteration started from the Chebyshev nodes of the
    interval, with projection onto the box and an active set for clamped
    coordinates.  By convexity the minimizer is unique, so the outcome does
    not depend on the initialization beyond the tolerance.

    Parameters
    ----------
    problem : EnergyProblem
    tol : float
        Optimality residual (max norm) required for convergence.
    max_iter : int
        Iteration budget.
    ctx : PrecisionContext, optional
        Accepted for interface uniformity; the solve itself runs in
        hardware precision, which the well-conditioned energy permits.

    Raises
    ------
    ConvergenceError
        If the budget is exhausted; the best iterate rides along.
    """
    del ctx  # hardware precision suffices for the energy landscape
    if not tol > 0:
        raise ValueError("tol must be positive")
    interval = problem.interval
    a, b = interval.a, interval.b
    e2 = float(problem.eps) ** 2
    n = problem.n

    x = np.asarray(chebyshev_points(n, interval).nodes, dtype=float)
    value = _energy(x, e2)
    trace = [value]
    iterations = 0
    residual = _kkt_residual(x, _gradient(x, e2), a, b)

    for iterations in range(max_iter):
        grad = _gradient(x, e2)
        residual = _kkt_residual(x, grad, a, b)
        if residual <= tol:
            return _report(x, interval, iterations, residual, True, trace)

        at_lo = x <= a
        at_hi = x >= b
        clamped = (at_lo & (grad > 0)) | (at_hi & (grad < 0))
        free = ~clamped
        direction = np.zeros(n)
        g_free = grad[free]
        hess_free = _hessian(x, e2)[np.ix_(free, free)]
        try:
            step_free = np.linalg.solve(hess_free, -g_free)
        except np.linalg.LinAlgError:
            step_free = -g_free
        if float(step_free @ g_free) >= 0.0:
            step_free = -g_free
        direction[free] = step_free

        # Backtrack until the projected trial point keeps the strict node
        # ordering and achieves sufficient decrease.  The decrease test gets
        # a roundoff allowance: near the optimum the true improvement of a
        # full Newton step falls below the resolution of the energy in
        # doubles and must not be rejected.
        t = 1.0
        accepted = False
        slack = 1e-14 * (1.0 + abs(value))
        for _ in range(_MAX_BACKTRACKS):
            trial = np.clip(x + t * direction, a, b)
            if not np.all(np.diff(trial) > 0.0):
                t *= 0.5
                continue
            move = trial - x
            if not move.any():
                break
            trial_value = _energy(trial, e2)
            if trial_value <= value + _ARMIJO_SLOPE * float(grad @ move) + slack:
                x, value = trial, trial_value
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # No productive step left at this scale; report at the current point.
            residual = _kkt_residual(x, _gradient(x, e2), a, b)
            if residual <= tol:
                return _report(x, interval, iterations + 1, residual, True, trace)
            raise ConvergenceError(
                f"line search stalled at residual {residual:.3e} (tol {tol:.1e})",
                _report(x, interval, iterations + 1, residual, False, trace),
            )
        trace.append(value)

    residual = _kkt_residual(x, _gradient(x, e2), a, b)
    if residual <= tol:
        return _report(x, interval, max_iter, residual, True, trace)
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations; residual {residual:.3e} (tol {tol:.1e})",
        _report(x, interval, max_iter, residual, False, trace),
    )


def tensor_fekete(
    n_per_dim,
    eps_per_dim,
    rectangle: Rectangle,
    tol: float = 1e-10,
    max_iter: int = 200,
    ctx: PrecisionContext | None = None,
) -> tuple:
    """Cartesian product of per-dimension approximate Fekete nodes.

    Returns the full grid of ``prod(n_i)`` points as tuples, ordered
    lexicographically by dimension index and then node index.  Solver
    failures in any dimension propagate.
    """
    ns = tuple(int(v) for v in n_per_dim)
    epss = tuple(float(v) for v in eps_per_dim)
    if len(ns) != len(epss) or len(ns) != rectangle.dim or not ns:
        raise ValueError(
            "n_per_dim, eps_per_dim and rectangle must share one length per dimension"
        )
    axes = []
    for n_i, eps_i, interval in zip(ns, epss, rectangle.intervals):
        report = solve_fekete(EnergyProblem(n_i, eps_i, interval), tol, max_iter, ctx)
        axes.append(report.points.nodes)
    return tuple(itertools.product(*axes))


def _energy(x: np.ndarray, e2: float) -> float:
    total = e2 * float(x @ x)
    if x.size > 1:
        i, j = np.triu_indices(x.size, k=1)
        total -= float(np.sum(np.log(np.abs(x[j] - x[i]))))
    return total


def _gradient(x: np.ndarray, e2: float) -> np.ndarray:
    n = x.size
    grad = 2.0 * e2 * x
    if n > 1:
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, np.inf)
        grad -= np.sum(1.0 / diff, axis=1)
    return grad


def _hessian(x: np.ndarray, e2: float) -> np.ndarray:
    n = x.size
    if n == 1:
        return np.array([[2.0 * e2]])
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    inv_sq = 1.0 / (diff * diff)
    hess = -inv_sq
    np.fill_diagonal(hess, 2.0 * e2 + np.sum(inv_sq, axis=1))
    return hess


def _kkt_residual(x: np.ndarray, grad: np.ndarray, a: float, b: float) -> float:
    residual = np.abs(grad)
    at_lo = x <= a
    at_hi = x >= b
    residual[at_lo] = np.maximum(0.0, -grad[at_lo])
    residual[at_hi] = np.maximum(0.0, grad[at_hi])
    return float(residual.max())


def _report(x, interval, iterations, residual, converged, trace) -> SolveReport:
    active = frozenset(
        i for i, v in enumerate(x) if v <= interval.a or v >= interval.b
    )
    return SolveReport(
        points=PointSet(tuple(float(v) for v in x), interval),
        iterations=iterations,
        final_grad_norm=float(residual),
        active_bounds=active,
        converged=converged,
        energy_trace=tuple(trace),
    )


def _require_distinct(x: np.ndarray) -> None:
    if len(set(x.tolist())) != x.size:
        raise CoincidentNodesError("nodes must be pairwise distinct")
