"""Kernel interpolants, the power function, and Gaussian Lagrange machinery.

Everything touching a Gaussian Gram matrix runs at extended precision: the
smallest Gram eigenvalue decays like the squared expansion tail, so the
condition number grows super-exponentially with the node count.  The default
policy :func:`auto_digits` (4 digits per node, at least 30) keeps all solves
comfortably inside their residual tolerances for scales up to ``eps = 2`` on
unit-size intervals; the tolerances are re-checked at runtime when fitting.

Lebesgue constants are the exception: the Gaussian-weighted Lagrange basis
is evaluated through the second barycentric formula, which is numerically
stable in hardware floats, while solving the underlying collocation system
directly would be hopeless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np

from .basis import GaussianKernel, PointSet
from .numerics import (
    CholeskyFactor,
    Matrix,
    PrecisionContext,
    PrecisionError,
    cholesky_factor,
)

__all__ = [
    "auto_digits",
    "gram",
    "fit",
    "Interpolant",
    "kernel_columns",
    "power_function",
    "max_power_on_grid",
    "lagrange_values",
    "lebesgue_constant",
    "TensorInterpolant",
    "tensor_fit",
    "tensor_power",
]


def auto_digits(n: int) -> int:
    """Default working precision (decimal digits) for ``n``-node Gram solves."""
    return max(30, math.ceil(4 * n))


def gram(points: PointSet, kernel: GaussianKernel, ctx: PrecisionContext) -> Matrix:
    """Kernel Gram matrix of the node set: symmetric positive-definite, unit diagonal."""
    nodes = points.nodes
    n = len(nodes)
    with ctx.active():
        e2 = ctx.mpf(kernel.epsilon) ** 2
        xs = [ctx.mpf(v) for v in nodes]
        one = ctx.mpf(1)
        rows = [[one] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                d = xs[i] - xs[j]
                value = gmpy2.exp(-e2 * d * d)
                rows[i][j] = value
                rows[j][i] = value
        return Matrix(rows)


def kernel_columns(
    points: PointSet, kernel: GaussianKernel, xs: Sequence[float], ctx: PrecisionContext
) -> list:
    """Kernel values ``K(x, x_k)`` for every ``x`` in ``xs``, one row per ``x``."""
    with ctx.active():
        e2 = ctx.mpf(kernel.epsilon) ** 2
        nodes = [ctx.mpf(v) for v in points.nodes]
        rows = []
        for x in xs:
            xm = ctx.mpf(x)
            row = []
            for xk in nodes:
                d = xm - xk
                row.append(gmpy2.exp(-e2 * d * d))
            rows.append(row)
        return rows


@dataclass(frozen=True, eq=False)
class Interpolant:
    """Kernel interpolant ``s(x) = sum_k c_k K(x, x_k)``.

    Immutable once fitted; evaluation is read-only and safe to run
    concurrently.  The coefficients satisfy the Gram system for the fitted
    values to within ``10**(-digits/2)`` relative residual (checked by
    :func:`fit`).
    """

    nodes: PointSet
    kernel: GaussianKernel
    coeffs: tuple
    ctx: PrecisionContext

    def evaluate(self, x, column: Sequence | None = None):
        """Value at ``x``; ``column`` may carry precomputed ``K(x, x_k)`` values."""
        ctx = self.ctx
        with ctx.active():
            if column is None:
                column = kernel_columns(self.nodes, self.kernel, [x], ctx)[0]
            total = ctx.mpf(0)
            for c, kv in zip(self.coeffs, column):
                total += c * kv
            return total

    def __call__(self, x):
        return self.evaluate(x)


def fit(
    points: PointSet, values: Sequence, kernel: GaussianKernel, ctx: PrecisionContext
) -> Interpolant:
    """Interpolate ``values`` given at the nodes by solving the Gram system.

    Raises
    ------
    PrecisionError
        If the Gram Cholesky breaks down or the solution's residual exceeds
        ``10**(-digits/2)`` relative to the data; both mean ``digits`` is
        too small for this node count.
    ValueError
        If the number of values does not match the number of nodes.
    """
    n = len(points)
    if len(values) != n:
        raise ValueError(f"got {len(values)} values for {n} nodes")
    matrix = gram(points, kernel, ctx)
    factor = cholesky_factor(matrix, ctx)
    with ctx.active():
        rhs = [ctx.mpf(v) for v in values]
        coeffs = factor.solve(rhs)
        residual = ctx.mpf(0)
        scale = ctx.mpf(0)
        for i in range(n):
            acc = -rhs[i]
            row = matrix.row(i)
            for j in range(n):
                acc += row[j] * coeffs[j]
            residual = max(residual, abs(acc))
            scale = max(scale, abs(rhs[i]))
        if residual > ctx.pow10(-ctx.digits / 2) * scale:
            raise PrecisionError(
                f"Gram solve residual {float(residual):.2e} exceeds tolerance at "
                f"{ctx.digits} digits for n={n}; raise digits"
            )
    return Interpolant(points, kernel, tuple(coeffs), ctx)


def power_function(points: PointSet, kernel: GaussianKernel, x, ctx: PrecisionContext):
    """Pointwise worst-case interpolation error over the unit ball of the native space.

    ``P(x) = sqrt(K(x, x) - k(x)^T G^{-1} k(x))`` with ``G`` the Gram matrix
    and ``k(x)`` the kernel column at ``x``.  For an empty node set the
    convention ``P(x) = sqrt(K(x, x)) = 1`` applies (no data, the worst case
    is the function value itself).

    Near nodes, roundoff can push the square-root argument slightly below
    zero; values within ``10**(-digits/2)`` of zero are clamped, anything
    more negative raises :class:`PrecisionError`.
    """
    if len(points) == 0:
        with ctx.active():
            return ctx.mpf(1)
    factor = cholesky_factor(gram(points, kernel, ctx), ctx)
    column = kernel_columns(points, kernel, [x], ctx)[0]
    return _power_from_factor(factor, column, ctx)


def max_power_on_grid(
    points: PointSet,
    kernel: GaussianKernel,
    grid: Sequence[float],
    ctx: PrecisionContext,
) -> tuple:
    """Largest power-function value over ``grid`` and the attaining point.

    The Gram factorization is computed once and reused across the grid.
    Ties are broken toward the grid point nearest the midpoint of the
    grid's extent, then toward the smaller coordinate.

    Returns
    -------
    (max_value, argmax_point)
    """
    if len(grid) == 0:
        raise ValueError("grid must be non-empty")
    grid = [float(g) for g in grid]
    mid = 0.5 * (min(grid) + max(grid))
    factor = None
    if len(points) > 0:
        factor = cholesky_factor(gram(points, kernel, ctx), ctx)
    with ctx.active():
        best_value = None
        best_x = None
        best_dist = None
        rows = kernel_columns(points, kernel, grid, ctx) if factor is not None else None
        for idx, x in enumerate(grid):
            if factor is None:
                value = ctx.mpf(1)
            else:
                value = _power_from_factor(factor, rows[idx], ctx)
            dist = abs(x - mid)
            if (
                best_value is None
                or value > best_value
                or (value == best_value and (dist < best_dist or (dist == best_dist and x < best_x)))
            ):
                best_value, best_x, best_dist = value, x, dist
        return best_value, best_x


def _power_from_factor(factor: CholeskyFactor, column: Sequence, ctx: PrecisionContext):
    with ctx.active():
        solved = factor.forward(column)
        arg = ctx.mpf(1)
        for v in solved:
            arg -= v * v
        if arg < 0:
            if arg >= -ctx.pow10(-ctx.digits / 2):
                return ctx.mpf(0)
            raise PrecisionError(
                f"power function argument {float(arg):.2e} is negative beyond roundoff "
                f"at {ctx.digits} digits; raise digits"
            )
        return gmpy2.sqrt(arg)


def lagrange_values(
    points: PointSet, eps: float, x, ctx: PrecisionContext | None = None
) -> tuple:
    """Gaussian-weighted Lagrange basis values at ``x``.

    These are ``exp(eps^2 x_k^2) * exp(-eps^2 x^2) * l_k(x)`` with ``l_k``
    the polynomial Lagrange cardinal functions, so the vector is the unit
    vector ``e_m`` whenever ``x`` equals node ``m``.  The polynomial part
    uses the second barycentric form; the underlying collocation system is
    catastrophically ill-conditioned and is never solved directly.

    Hardware floats by default; pass ``ctx`` for extended precision.
    """
    nodes = points.nodes
    if ctx is None:
        return _lagrange_float(nodes, float(eps), float(x))
    return _lagrange_mp(nodes, eps, x, ctx)


def lebesgue_constant(points: PointSet, eps: float, grid: Sequence[float]) -> float:
    """Maximum over the grid of the summed absolute Lagrange basis values.

    A lower estimate of the true supremum over the interval; the caller
    picks the grid density (1000 equispaced points by default elsewhere).
    """
    if len(grid) == 0:
        raise ValueError("grid must be non-empty")
    nodes = points.nodes
    eps = float(eps)
    weights = _bary_weights(nodes)
    e2 = eps * eps
    scaled = [math.exp(e2 * v * v) for v in nodes]
    best = 0.0
    for x in grid:
        u = _lagrange_float(nodes, eps, float(x), weights, scaled)
        best = max(best, sum(abs(v) for v in u))
    return best


def _bary_weights(nodes) -> list:
    weights = []
    for k, xk in enumerate(nodes):
        w = 1.0
        for j, xj in enumerate(nodes):
            if j != k:
                w /= xk - xj
        weights.append(w)
    return weights


def _lagrange_float(nodes, eps, x, weights=None, scaled=None) -> tuple:
    n = len(nodes)
    if x in nodes:
        return tuple(1.0 if x == xk else 0.0 for xk in nodes)
    if weights is None:
        weights = _bary_weights(nodes)
    e2 = eps * eps
    if scaled is None:
        scaled = [math.exp(e2 * v * v) for v in nodes]
    terms = [weights[k] / (x - nodes[k]) for k in range(n)]
    denom = sum(terms)
    envelope = math.exp(-e2 * x * x)
    return tuple(scaled[k] * envelope * terms[k] / denom for k in range(n))


def _lagrange_mp(nodes, eps, x, ctx) -> tuple:
    with ctx.active():
        xs = [ctx.mpf(v) for v in nodes]
        xm = ctx.mpf(x)
        if xm in xs:
            return tuple(ctx.mpf(1) if xm == xk else ctx.mpf(0) for xk in xs)
        e2 = ctx.mpf(eps) ** 2
        weights = []
        for k, xk in enumerate(xs):
            w = ctx.mpf(1)
            for j, xj in enumerate(xs):
                if j != k:
                    w /= xk - xj
            weights.append(w)
        terms = [weights[k] / (xm - xs[k]) for k in range(len(xs))]
        denom = sum(terms)
        envelope = gmpy2.exp(-e2 * xm * xm)
        return tuple(
            gmpy2.exp(e2 * xs[k] * xs[k]) * envelope * terms[k] / denom
            for k in range(len(xs))
        )


@dataclass(frozen=True, eq=False)
class TensorInterpolant:
    """Product-kernel interpolant on a tensor grid.

    The coefficient tensor solves the Kronecker-structured Gram system; the
    interpolation conditions hold at all grid points (validated at fit
    time).
    """

    node_sets: tuple
    kernels: tuple
    coeffs: np.ndarray = field(repr=False)
    ctx: PrecisionContext

    @property
    def shape(self) -> tuple:
        return tuple(len(ps) for ps in self.node_sets)

    def evaluate(self, point: Sequence[float]):
        """Value at a ``d``-dimensional point."""
        if len(point) != len(self.node_sets):
            raise ValueError(f"point has {len(point)} coordinates, expected {len(self.node_sets)}")
        ctx = self.ctx
        with ctx.active():
            current = self.coeffs
            for points_i, kernel_i, x_i in zip(self.node_sets, self.kernels, point):
                column = np.array(
                    kernel_columns(points_i, kernel_i, [x_i], ctx)[0], dtype=object
                )
                current = np.tensordot(current, column, axes=([0], [0]))
            return current.item() if isinstance(current, np.ndarray) else current

    def __call__(self, point):
        return self.evaluate(point)


def tensor_fit(
    node_sets: Sequence[PointSet],
    kernels: Sequence[GaussianKernel],
    values,
    ctx: PrecisionContext,
) -> TensorInterpolant:
    """Fit a product-kernel interpolant on a tensor grid of nodes.

    Solves one small Gram system per dimension sequentially across the
    value tensor (cost ``O(N * sum n_i^2)`` instead of ``O(N^3)`` for the
    dense product system).  The reconstruction ``G c`` is compared against
    the input values at all grid points as a runtime residual check.
    """
    node_sets = tuple(node_sets)
    kernels = tuple(kernels)
    if not node_sets or len(node_sets) != len(kernels):
        raise ValueError("need one node set and one kernel per dimension")
    shape = tuple(len(ps) for ps in node_sets)
    with ctx.active():
        tensor = np.empty(shape, dtype=object)
        source = np.asarray(values, dtype=object)
        if source.shape != shape:
            raise ValueError(f"value tensor shape {source.shape} does not match grid {shape}")
        for idx in np.ndindex(shape):
            tensor[idx] = ctx.mpf(source[idx])
        original = tensor.copy()

        grams = [gram(ps, kn, ctx) for ps, kn in zip(node_sets, kernels)]
        factors = [cholesky_factor(g, ctx) for g in grams]
        for axis, factor in enumerate(factors):
            tensor = _solve_along_axis(tensor, factor, axis)

        reconstructed = tensor
        for axis, g in enumerate(grams):
            reconstructed = _multiply_along_axis(reconstructed, g, axis)
        worst = ctx.mpf(0)
        scale = ctx.mpf(0)
        for idx in np.ndindex(shape):
            worst = max(worst, abs(reconstructed[idx] - original[idx]))
            scale = max(scale, abs(original[idx]))
        if worst > ctx.pow10(-ctx.digits / 2) * scale:
            raise PrecisionError(
                f"tensor Gram residual {float(worst):.2e} exceeds tolerance at "
                f"{ctx.digits} digits; raise digits"
            )
    return TensorInterpolant(node_sets, kernels, tensor, ctx)


def tensor_power(
    node_sets: Sequence[PointSet],
    kernels: Sequence[GaussianKernel],
    point: Sequence[float],
    ctx: PrecisionContext,
):
    """Power function of the product kernel on a tensor node grid.

    Factorizes across dimensions: with ``g_i = k_i^T G_i^{-1} k_i`` per
    dimension, the squared power is ``1 - prod_i g_i``, which equals the
    dense product-grid power function.  The same clamp rule as
    :func:`power_function` applies near grid points.
    """
    node_sets = tuple(node_sets)
    kernels = tuple(kernels)
    if len(point) != len(node_sets) or len(kernels) != len(node_sets) or not node_sets:
        raise ValueError("point, node_sets and kernels must share one entry per dimension")
    with ctx.active():
        product = ctx.mpf(1)
        for points_i, kernel_i, x_i in zip(node_sets, kernels, point):
            factor = cholesky_factor(gram(points_i, kernel_i, ctx), ctx)
            column = kernel_columns(points_i, kernel_i, [x_i], ctx)[0]
            solved = factor.forward(column)
            quad = ctx.mpf(0)
            for v in solved:
                quad += v * v
            product *= quad
        arg = 1 - product
        if arg < 0:
            if arg >= -ctx.pow10(-ctx.digits / 2):
                return ctx.mpf(0)
            raise PrecisionError(
                f"tensor power argument {float(arg):.2e} is negative beyond roundoff "
                f"at {ctx.digits} digits; raise digits"
            )
        return gmpy2.sqrt(arg)


def _solve_along_axis(tensor: np.ndarray, factor: CholeskyFactor, axis: int) -> np.ndarray:
    moved = np.moveaxis(tensor, axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    for r in range(flat.shape[0]):
        flat[r, :] = factor.solve(list(flat[r, :]))
    return np.moveaxis(flat.reshape(moved.shape), -1, axis)


def _multiply_along_axis(tensor: np.ndarray, matrix: Matrix, axis: int) -> np.ndarray:
    moved = np.moveaxis(tensor, axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    n = matrix.rows
    out = np.empty_like(flat)
    for r in range(flat.shape[0]):
        row_values = flat[r, :]
        for i in range(n):
            acc = 0
            mrow = matrix.row(i)
            for j in range(n):
                acc += mrow[j] * row_values[j]
            out[r, i] = acc
    return np.moveaxis(out.reshape(moved.shape), -1, axis)
