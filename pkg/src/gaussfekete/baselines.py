"""Competitor node constructions: Chebyshev, equispaced, and power-greedy.

The greedy selector picks, on a fixed discretization of the interval, the
point where the current power function is largest; the power values for the
whole grid are carried forward with an incremental Cholesky update, so a
full run costs ``O(grid_size * n^2)`` scalar operations plus one kernel
evaluation per grid point and step.  Gaussian Gram matrices make this
computation hopeless in doubles beyond a handful of nodes, hence the
precision context argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .basis import GaussianKernel, Interval, PointSet
from .numerics import PrecisionContext, PrecisionError

__all__ = [
    "GreedyTrace",
    "chebyshev_points",
    "equispaced_points",
    "fill_distance",
    "p_greedy",
]


@dataclass(frozen=True)
class GreedyTrace:
    """Greedy selection history: nodes in pick order and the running power maxima.

    ``power_maxima[k]`` is the largest power-function value on the grid
    after the ``(k+1)``-th node has been added; the sequence is
    non-increasing.  Because greedy selections are nested, the first ``k``
    nodes are exactly the result of a length-``k`` run.
    """

    nodes: tuple
    power_maxima: tuple
    interval: Interval

    def point_set(self, count: int | None = None) -> PointSet:
        """First ``count`` selected nodes (default: all), sorted ascending."""
        chosen = self.nodes if count is None else self.nodes[:count]
        return PointSet(sorted(chosen), self.interval)


def chebyshev_points(n: int, interval: Interval) -> PointSet:
    """The ``n`` Chebyshev nodes ``cos((2k-1) pi / (2n))`` mapped to the interval.

    Built from one half and mirrored so that the set is exactly symmetric
    about the interval midpoint, returned in ascending order.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    half = [math.cos((2 * k - 1) * math.pi / (2 * n)) for k in range(1, n // 2 + 1)]
    reference = [-t for t in half]
    if n % 2 == 1:
        reference.append(0.0)
    reference.extend(reversed(half))
    mid = 0.5 * (interval.a + interval.b)
    scale = 0.5 * (interval.b - interval.a)
    return PointSet([mid + scale * t for t in reference], interval)


def equispaced_points(n: int, interval: Interval) -> PointSet:
    """``n`` uniformly spaced nodes including both endpoints."""
    if n < 2:
        raise ValueError(f"equispaced nodes need n >= 2, got {n}")
    a, b = interval.a, interval.b
    nodes = [a]
    for k in range(1, n - 1):
        u = k / (n - 1)
        nodes.append(a * (1.0 - u) + b * u)
    nodes.append(b)
    return PointSet(nodes, interval)


def fill_distance(points, interval: Interval) -> float:
    """Largest distance from a point of the interval to its nearest node.

    Computed exactly from the boundary gaps and half the interior gaps, not
    on a grid.
    """
    nodes = points.nodes if isinstance(points, PointSet) else tuple(sorted(points))
    if not nodes:
        raise ValueError("fill distance needs at least one node")
    worst = max(nodes[0] - interval.a, interval.b - nodes[-1])
    for left, right in zip(nodes, nodes[1:]):
        worst = max(worst, 0.5 * (right - left))
    return float(worst)


def p_greedy(
    n: int,
    kernel: GaussianKernel,
    interval: Interval,
    grid_size: int = 1000,
    ctx: PrecisionContext | None = None,
) -> GreedyTrace:
    """Select ``n`` nodes by greedy power-function maximization on a grid.

    The interval is discretized into ``grid_size`` equispaced points
    (endpoints included).  Each step picks the grid point with the largest
    current power-function value; ties go to the point nearest the interval
    midpoint, then to the smaller coordinate.  Already selected points are
    never picked again (their power value vanishes).

    Parameters
    ----------
    n : int
        Number of nodes to select; at most ``grid_size``.
    kernel : GaussianKernel
    interval : Interval
    grid_size : int
        Grid resolution, default 1000.
    ctx : PrecisionContext
        Working precision; on exhaustion a :class:`PrecisionError` asks the
        caller to raise digits.

    Returns
    -------
    GreedyTrace
    """
    if ctx is None:
        raise ValueError("p_greedy requires a PrecisionContext")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if grid_size < n:
        raise ValueError(f"grid_size {grid_size} is smaller than n={n}")
    grid = equispaced_points(grid_size, interval).nodes
    mid = interval.midpoint

    with ctx.active():
        e2 = ctx.mpf(kernel.epsilon) ** 2
        xs = [ctx.mpf(g) for g in grid]
        one = ctx.mpf(1)
        # Running state per grid point: squared power and the forward-solved
        # kernel column against the selected nodes (a growing Cholesky row).
        power_sq = [one] * grid_size
        solved = [[] for _ in range(grid_size)]
        selected: list[int] = []
        selected_set: set[int] = set()
        chosen_nodes = []
        maxima = []

        for _ in range(n):
            pick = _argmax_with_ties(power_sq, grid, mid, selected_set)
            peak_sq = power_sq[pick]
            if not peak_sq > 0:
                raise PrecisionError(
                    f"power function vanished on the whole grid after "
                    f"{len(selected)} selections at {ctx.digits} digits; raise digits"
                )
            pivot = gmpy2.sqrt(peak_sq)
            pivot_solved = list(solved[pick])
            x_new = xs[pick]
            selected.append(pick)
            selected_set.add(pick)
            chosen_nodes.append(grid[pick])

            for j in range(grid_size):
                d = xs[j] - x_new
                kv = gmpy2.exp(-e2 * d * d)
                sj = solved[j]
                acc = kv
                for t in range(len(pivot_solved)):
                    acc -= sj[t] * pivot_solved[t]
                value = acc / pivot
                sj.append(value)
                power_sq[j] -= value * value

            best = max(power_sq)
            maxima.append(gmpy2.sqrt(best) if best > 0 else ctx.mpf(0))

        return GreedyTrace(tuple(chosen_nodes), tuple(maxima), interval)


def _argmax_with_ties(values, grid, mid, excluded) -> int:
    """Index of the largest value; ties prefer proximity to ``mid``, then smaller x."""
    best = -1
    for j in range(len(values)):
        if j in excluded:
            continue
        if best < 0:
            best = j
            continue
        v, bv = values[j], values[best]
        if v > bv:
            best = j
        elif v == bv:
            dj, db = abs(grid[j] - mid), abs(grid[best] - mid)
            if dj < db or (dj == db and grid[j] < grid[best]):
                best = j
    return best
