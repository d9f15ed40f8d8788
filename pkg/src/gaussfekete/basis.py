"""Gaussian kernel, its polynomial-times-envelope expansion, and tail bounds.

The univariate Gaussian kernel ``K(x, y) = exp(-eps^2 (x - y)^2)`` admits the
orthonormal expansion

    K(x, y) = sum_{ell >= 0} b_ell(x) b_ell(y),
    b_ell(x) = sqrt((2 eps^2)^ell / ell!) * x^ell * exp(-eps^2 x^2),

indexed from ``ell = 0``.  This module provides the basis functions, the
collocation matrix of the first ``n`` of them, the truncated kernel, the
log-domain weighted Vandermonde product whose maximization defines the
approximate Fekete nodes, and computable bounds on the expansion tail.

All products and factorials are accumulated in log domain with explicit sign
tracking; the raw coefficients ``(2 eps^2)^ell / ell!`` overflow or underflow
hardware floats near ``ell = 150``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2

from .numerics import Matrix, PrecisionContext, lu_logdet

__all__ = [
    "CoincidentNodesError",
    "Interval",
    "Rectangle",
    "GaussianKernel",
    "PointSet",
    "as_nodes",
    "basis_function",
    "basis_matrix",
    "truncated_kernel",
    "log_weighted_vandermonde",
    "det_factorization_discrepancy",
    "tail_sup_bound",
    "tail_sum",
]

_MAX_TAIL_TERMS = 100_000


class CoincidentNodesError(ValueError):
    """Two nodes coincide, so the log node-separation product is -infinity."""


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def sup_abs(self) -> float:
        """Largest magnitude attained on the interval, ``max(|a|, |b|)``."""
        return max(abs(self.a), abs(self.b))

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, x: float) -> bool:
        return self.a <= x <= self.b


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned product of intervals, one per dimension."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple(self.intervals)
        if not ivs:
            raise ValueError("rectangle needs at least one interval")
        for iv in ivs:
            if not isinstance(iv, Interval):
                raise TypeError("rectangle sides must be Interval instances")
        object.__setattr__(self, "intervals", ivs)

    @property
    def dim(self) -> int:
        return len(self.intervals)


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian kernel ``exp(-eps^2 (x - y)^2)`` with scale ``eps > 0``."""

    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be a positive real, got {self.epsilon}")

    def value(self, x, y, ctx: PrecisionContext | None = None):
        """Kernel value ``K(x, y)``, in hardware floats or under ``ctx``."""
        if ctx is None:
            d = float(x) - float(y)
            return math.exp(-(self.epsilon * self.epsilon) * d * d)
        with ctx.active():
            d = ctx.mpf(x) - ctx.mpf(y)
            e = ctx.mpf(self.epsilon)
            return gmpy2.exp(-(e * e) * (d * d))

    def __call__(self, x, y):
        return self.value(x, y)


class PointSet:
    """Strictly increasing finite set of real nodes, optionally inside an interval.

    Parameters
    ----------
    nodes : sequence of float
        Strictly increasing coordinates.
    interval : Interval, optional
        Domain the nodes must lie in; membership is validated when given.
    """

    __slots__ = ("nodes", "interval")

    def __init__(self, nodes: Sequence[float], interval: Interval | None = None):
        coords = tuple(float(v) for v in nodes)
        for v in coords:
            if not math.isfinite(v):
                raise ValueError("nodes must be finite")
        for left, right in zip(coords, coords[1:]):
            if not left < right:
                raise ValueError("nodes must be strictly increasing")
        if interval is not None:
            for v in coords:
                if not interval.contains(v):
                    raise ValueError(f"node {v} lies outside [{interval.a}, {interval.b}]")
        self.nodes = coords
        self.interval = interval

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __getitem__(self, i: int) -> float:
        return self.nodes[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet) and other.nodes == self.nodes

    def __hash__(self) -> int:
        return hash(self.nodes)

    def __repr__(self) -> str:
        return f"PointSet(n={len(self.nodes)})"


def as_nodes(points) -> tuple:
    """Coordinates of ``points`` (a :class:`PointSet` or plain sequence)."""
    if isinstance(points, PointSet):
        return points.nodes
    return tuple(float(v) for v in points)


def basis_function(ell: int, x: float, eps: float, ctx: PrecisionContext):
    """Expansion basis function of degree ``ell`` at ``x``.

    The coefficient ``sqrt((2 eps^2)^ell / ell!)`` is accumulated in log
    domain together with ``|x|^ell`` so that no intermediate quantity
    overflows, and the sign of ``x^ell`` is applied at the end.
    """
    if ell < 0:
        raise ValueError(f"basis degree must be non-negative, got {ell}")
    with ctx.active():
        xm = ctx.mpf(x)
        e2 = ctx.mpf(eps) ** 2
        if xm == 0:
            return ctx.mpf(1) if ell == 0 else ctx.mpf(0)
        log_coef = (ell * gmpy2.log(2 * e2) - gmpy2.log(gmpy2.fac(ell))) / 2
        magnitude = gmpy2.exp(log_coef + ell * gmpy2.log(abs(xm)) - e2 * xm * xm)
        if xm < 0 and ell % 2 == 1:
            return -magnitude
        return magnitude


def basis_matrix(points, eps: float, ctx: PrecisionContext) -> Matrix:
    """Collocation matrix of the first ``n`` basis functions at ``n`` nodes.

    Row ``k`` holds degrees ``0 .. n-1`` evaluated at the ``k``-th node.  The
    matrix is invertible whenever the nodes are distinct, by the weighted
    Vandermonde factorization checked in
    :func:`det_factorization_discrepancy`.
    """
    nodes = as_nodes(points)
    _require_distinct(nodes)
    n = len(nodes)
    rows = [[basis_function(ell, x, eps, ctx) for ell in range(n)] for x in nodes]
    return Matrix(rows)


def truncated_kernel(x: float, y: float, n: int, eps: float, ctx: PrecisionContext):
    """Partial sum of the kernel expansion, degrees ``0`` through ``n - 1``.

    Converges to ``K(x, y)`` as ``n`` grows.  The terms
    ``(2 eps^2 x y)^ell / ell! * exp(-eps^2 (x^2 + y^2))`` are generated by a
    stable multiplicative recurrence.
    """
    if n < 1:
        raise ValueError(f"truncation order must be >= 1, got {n}")
    with ctx.active():
        xm, ym = ctx.mpf(x), ctx.mpf(y)
        e2 = ctx.mpf(eps) ** 2
        term = gmpy2.exp(-e2 * (xm * xm + ym * ym))
        z = 2 * e2 * xm * ym
        total = term
        for ell in range(1, n):
            term = term * z / ell
            total += term
        return total


def log_weighted_vandermonde(points, eps: float, ctx: PrecisionContext | None = None):
    """Log of the Gaussian-weighted node-separation product.

    For nodes ``x_1, ..., x_n`` this is

        -eps^2 * sum_k x_k^2  +  sum_{i < j} log|x_i - x_j|,

    the log of the quantity the approximate Fekete nodes maximize.  Computed
    in hardware floats by default or under ``ctx`` when given.

    Raises
    ------
    CoincidentNodesError
        If two nodes coincide (the product vanishes, log is -infinity).
    """
    nodes = as_nodes(points)
    _require_distinct(nodes)
    if ctx is None:
        e2 = float(eps) ** 2
        total = -e2 * sum(v * v for v in nodes)
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                total += math.log(abs(nodes[i] - nodes[j]))
        return total
    with ctx.active():
        e2 = ctx.mpf(eps) ** 2
        xs = [ctx.mpf(v) for v in nodes]
        total = ctx.mpf(0)
        for x in xs:
            total -= e2 * x * x
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                total += gmpy2.log(abs(xs[i] - xs[j]))
        return total


def det_factorization_discrepancy(points, eps: float, ctx: PrecisionContext):
    """Gap between the LU log-determinant of the collocation matrix and its closed form.

    The determinant of :func:`basis_matrix` factors exactly into the product
    of the basis coefficients and the weighted Vandermonde product, so

        | log|det B|  -  ( 1/2 * sum_ell log((2 eps^2)^ell / ell!)
                           + log_weighted_vandermonde ) |

    must vanish up to roundoff.  Returns that absolute gap, which for
    well-separated nodes stays below ``10**(-digits + 6)``.
    """
    nodes = as_nodes(points)
    log_abs_det, sign = lu_logdet(basis_matrix(nodes, eps, ctx), ctx)
    if sign == 0:
        raise CoincidentNodesError("collocation matrix is singular at working precision")
    with ctx.active():
        e2 = ctx.mpf(eps) ** 2
        log_2e2 = gmpy2.log(2 * e2)
        closed_form = ctx.mpf(0)
        for ell in range(len(nodes)):
            closed_form += (ell * log_2e2 - gmpy2.log(gmpy2.fac(ell))) / 2
        closed_form += log_weighted_vandermonde(nodes, eps, ctx)
        return abs(log_abs_det - closed_form)


def tail_sup_bound(n: int, eps: float, c_sup: float) -> float:
    """Bound ``(sqrt(2) eps c)^n / sqrt(n!)`` on the expansion tail supremum.

    Valid (and only accepted) when ``n >= 2 eps^2 c^2``; it dominates the
    square root of ``sum_{ell >= n} b_ell(x)^2`` uniformly over ``|x| <= c``.
    """
    eps = float(eps)
    c_sup = float(c_sup)
    if eps <= 0 or c_sup <= 0:
        raise ValueError("eps and c_sup must be positive")
    if n < 2.0 * eps * eps * c_sup * c_sup:
        raise ValueError(
            f"tail bound requires n >= 2*eps^2*c^2 = {2.0 * eps * eps * c_sup * c_sup:g}, got n={n}"
        )
    log_value = n * math.log(math.sqrt(2.0) * eps * c_sup) - 0.5 * math.lgamma(n + 1)
    return math.exp(log_value)


def tail_sum(x: float, n: int, eps: float, tol: float, ctx: PrecisionContext):
    """Numerically summed expansion tail ``sum_{ell >= n} b_ell(x)^2``.

    Terms follow ``t_ell = (2 eps^2 x^2)^ell / ell! * exp(-2 eps^2 x^2)``.
    Summation stops at the smallest ``L > max(n, 4 eps^2 x^2)`` whose term
    ratio drops below one half and whose geometric remainder estimate
    ``t_{L+1} / (1 - ratio)`` is below ``tol``, so the returned value is
    within ``tol`` of the infinite tail.
    """
    if n < 0:
        raise ValueError(f"tail start index must be >= 0, got {n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    with ctx.active():
        xm = ctx.mpf(x)
        e2 = ctx.mpf(eps) ** 2
        z = 2 * e2 * xm * xm
        if z == 0:
            return ctx.mpf(1) if n == 0 else ctx.mpf(0)
        if n == 0:
            term = gmpy2.exp(-z)
        else:
            term = gmpy2.exp(n * gmpy2.log(z) - gmpy2.log(gmpy2.fac(n)) - z)
        tol_mp = ctx.mpf(tol)
        total = term
        ell = n
        threshold = max(n, 2 * z)  # ratio z/(ell+1) < 1/2 beyond this index
        while True:
            next_term = term * z / (ell + 1)
            if ell + 1 > threshold:
                ratio = z / (ell + 2)
                if next_term / (1 - ratio) < tol_mp:
                    break
            total += next_term
            term = next_term
            ell += 1
            if ell - n > _MAX_TAIL_TERMS:
                raise RuntimeError("tail summation failed to terminate")
        return total


def _require_distinct(nodes: tuple) -> None:
    if len(set(nodes)) != len(nodes):
        raise CoincidentNodesError("nodes must be pairwise distinct")
