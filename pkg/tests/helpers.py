"""Independent oracles shared by the test modules.

Everything here recomputes quantities from their defining formulas, without
going through the library code paths under test: energies are evaluated
directly in extended precision, minimizers are located by grid refinement,
and linear systems are solved by plain Gaussian elimination on MPFR
scalars.
"""

from __future__ import annotations

import math
import random

import gmpy2
import numpy as np


def mp_context(digits):
    return gmpy2.context(precision=math.ceil(digits * math.log2(10)) + 4)


def mp_energy(nodes, eps, digits=60):
    """Node energy evaluated directly from its formula at high precision."""
    with mp_context(digits):
        e2 = gmpy2.mpfr(eps) ** 2
        xs = [gmpy2.mpfr(v) for v in nodes]
        total = gmpy2.mpfr(0)
        for x in xs:
            total += e2 * x * x
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                total -= gmpy2.log(abs(xs[i] - xs[j]))
        return total


def fd_gradient(nodes, eps, step=1e-6, digits=60):
    """Central finite differences of the energy, carried in extended precision."""
    grads = []
    with mp_context(digits):
        h = gmpy2.mpfr(step)
        for i in range(len(nodes)):
            plus = list(nodes)
            minus = list(nodes)
            plus[i] = gmpy2.mpfr(nodes[i]) + h
            minus[i] = gmpy2.mpfr(nodes[i]) - h
            grads.append(float((mp_energy(plus, eps, digits) - mp_energy(minus, eps, digits)) / (2 * h)))
    return np.array(grads)


def energy_grid_min(n, eps, interval, initial_step=0.02, final_step=1e-5):
    """Brute-force minimizer of the node energy by nested grid refinement.

    Scans ordered tuples on a coarse lattice over the interval and then
    repeatedly re-scans a shrinking box around the incumbent, down to
    ``final_step`` resolution.  Only practical for n in {1, 2, 3}.
    """
    a, b = float(interval[0]), float(interval[1])
    e2 = float(eps) ** 2

    def scan(lo, hi, step):
        axes = [np.arange(max(a, lo[i]), min(b, hi[i]) + 0.5 * step, step) for i in range(n)]
        grids = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        keep = np.ones(len(coords), dtype=bool)
        for i in range(n - 1):
            keep &= coords[:, i + 1] - coords[:, i] >= 0.5 * step
        coords = coords[keep]
        values = e2 * np.sum(coords**2, axis=1)
        for i in range(n):
            for j in range(i + 1, n):
                values -= np.log(coords[:, j] - coords[:, i])
        best = int(np.argmin(values))
        return coords[best]

    step = initial_step
    lo = np.full(n, a)
    hi = np.full(n, b)
    incumbent = scan(lo, hi, step)
    while step > final_step:
        step /= 10.0
        lo = incumbent - 25 * step
        hi = incumbent + 25 * step
        incumbent = scan(lo, hi, step)
    return incumbent


def gauss_solve(rows, rhs, digits):
    """Gaussian elimination with partial pivoting on MPFR scalars."""
    with mp_context(digits):
        n = len(rhs)
        a = [[gmpy2.mpfr(v) for v in row] + [gmpy2.mpfr(rhs[i])] for i, row in enumerate(rows)]
        for k in range(n):
            pivot = max(range(k, n), key=lambda r: abs(a[r][k]))
            a[k], a[pivot] = a[pivot], a[k]
            for r in range(k + 1, n):
                f = a[r][k] / a[k][k]
                for c in range(k, n + 1):
                    a[r][c] -= f * a[k][c]
        x = [gmpy2.mpfr(0)] * n
        for k in range(n - 1, -1, -1):
            s = a[k][n]
            for c in range(k + 1, n):
                s -= a[k][c] * x[c]
            x[k] = s / a[k][k]
        return x


def dense_product_power(node_sets, kernels, point, digits):
    """Power function on a tensor grid via the full product-kernel Gram matrix."""
    grid = [[]]
    for ps in node_sets:
        grid = [prefix + [v] for prefix in grid for v in ps.nodes]
    with mp_context(digits):
        def kval(u, v):
            total = gmpy2.mpfr(0)
            for kern, ui, vi in zip(kernels, u, v):
                d = gmpy2.mpfr(ui) - gmpy2.mpfr(vi)
                total -= (gmpy2.mpfr(kern.epsilon) ** 2) * d * d
            return gmpy2.exp(total)

        n = len(grid)
        gram_rows = [[kval(grid[i], grid[j]) for j in range(n)] for i in range(n)]
        column = [kval(g, list(point)) for g in grid]
        solved = gauss_solve(gram_rows, column, digits)
        quad = gmpy2.mpfr(0)
        for c, kv in zip(solved, column):
            quad += c * kv
        arg = 1 - quad
        if arg < 0:
            arg = gmpy2.mpfr(0)
        return gmpy2.sqrt(arg)


def random_ordered_nodes(rng: random.Random, n, lo=-1.0, hi=1.0, min_gap=0.01):
    """Strictly increasing nodes with a guaranteed minimum separation."""
    while True:
        draw = sorted(rng.uniform(lo, hi) for _ in range(n))
        if n == 1 or min(b - a for a, b in zip(draw, draw[1:])) >= min_gap:
            return draw
