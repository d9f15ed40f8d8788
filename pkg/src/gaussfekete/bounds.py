"""Computable error bounds and benchmark target functions.

Every bound is evaluated in log domain first; the plain values underflow
hardware floats around forty nodes, so each bound comes as a pair of
functions, ``log_*`` returning the natural log and the undecorated name
returning ``exp`` of it (possibly a subnormal or zero float).

The super-exponential interpolation rate for the Gaussian kernel on an
interval with ``sup|x| = c`` reads

    RATE_PREFACTOR * norm * n^(3/4) * exp(-n * (log(n)/2 - log(rate_base)))

with ``rate_base = sqrt(2e) * eps * c``, valid once ``n >= 2 eps^2 c^2``.
The generic bound ``2 * norm * (1 + lebesgue) * tail`` needs no such
restriction, and at approximate Fekete nodes ``lebesgue <= n`` may be
substituted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2

from .basis import Interval
from .numerics import PrecisionContext

__all__ = [
    "RATE_PREFACTOR",
    "rate_base",
    "generic_uniform_bound",
    "log_generic_uniform_bound",
    "gaussian_rate_bound",
    "log_gaussian_rate_bound",
    "WeightSequence",
    "bessel_weights",
    "subspace_bound",
    "log_subspace_bound",
    "bessel_subspace_kernel",
    "tensor_bound",
    "log_tensor_bound",
    "fill_distance_bound",
    "log_fill_distance_bound",
    "TargetFunction",
]

RATE_PREFACTOR = (128.0 / math.pi) ** 0.25


def rate_base(eps: float, c_sup: float) -> float:
    """Geometric base ``sqrt(2e) * eps * c`` of the super-exponential rate."""
    return math.sqrt(2.0 * math.e) * float(eps) * float(c_sup)


def log_generic_uniform_bound(n: int, lebesgue: float, tail_sup: float, norm: float) -> float:
    """Log of ``2 * norm * (1 + lebesgue) * tail_sup``; ``-inf`` for zero factors."""
    _require_nonnegative(lebesgue=lebesgue, tail_sup=tail_sup, norm=norm)
    del n  # enters only through the caller's choice of lebesgue and tail
    if norm == 0.0 or tail_sup == 0.0:
        return -math.inf
    return math.log(2.0) + math.log(norm) + math.log1p(lebesgue) + math.log(tail_sup)


def generic_uniform_bound(n: int, lebesgue: float, tail_sup: float, norm: float) -> float:
    """Uniform error bound ``2 * norm * (1 + lebesgue) * tail_sup``.

    With ``lebesgue = n`` this is the bound guaranteed at approximate
    Fekete nodes.
    """
    return math.exp(log_generic_uniform_bound(n, lebesgue, tail_sup, norm))


def _check_rate_precondition(n: int, eps: float, c_sup: float) -> None:
    if not (float(eps) > 0 and float(c_sup) > 0):
        raise ValueError("eps and c_sup must be positive")
    needed = 2.0 * float(eps) ** 2 * float(c_sup) ** 2
    if n < needed:
        raise ValueError(f"rate bound requires n >= 2*eps^2*c^2 = {needed:g}, got n={n}")


def log_gaussian_rate_bound(n: int, eps: float, c_sup: float, norm: float) -> float:
    """Log of :func:`gaussian_rate_bound`; ``-inf`` when ``norm == 0``."""
    _check_rate_precondition(n, eps, c_sup)
    _require_nonnegative(norm=norm)
    if norm == 0.0:
        return -math.inf
    return (
        math.log(RATE_PREFACTOR)
        + math.log(norm)
        + 0.75 * math.log(n)
        - n * (0.5 * math.log(n) - math.log(rate_base(eps, c_sup)))
    )


def gaussian_rate_bound(n: int, eps: float, c_sup: float, norm: float) -> float:
    """Super-exponential uniform error bound at approximate Fekete nodes.

    Requires ``n >= 2 * eps^2 * c_sup^2``; decays like
    ``exp(-(n/2) log n)`` once ``n`` passes ``e * rate_base^2``.
    """
    return math.exp(log_gaussian_rate_bound(n, eps, c_sup, norm))


@dataclass(frozen=True)
class WeightSequence:
    """Non-decreasing divergent coefficient weights, indexed from zero.

    Wraps a callable ``ell -> weight``.  The smoothness subspace consists
    of expansions whose coefficients remain square-summable after
    multiplication by these weights; bounds improve by the reciprocal
    weight at the truncation index.  Divergence cannot be verified from
    finitely many samples, but constant prefixes are rejected as a guard
    against the degenerate all-ones sequence.
    """

    values: Callable[[int], float]

    def value(self, ell: int) -> float:
        v = float(self.values(ell))
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"weight at index {ell} must be a positive real, got {v}")
        return v

    def validate_through(self, last: int) -> None:
        """Check ``w_0 >= 1``, monotonicity, and non-constancy on ``0..last``."""
        sampled = [self.value(ell) for ell in range(last + 1)]
        if sampled[0] < 1.0:
            raise ValueError(f"first weight must be >= 1, got {sampled[0]}")
        for ell in range(last):
            if sampled[ell + 1] < sampled[ell]:
                raise ValueError(f"weights must be non-decreasing, violated at index {ell + 1}")
        if last >= 1 and sampled[-1] == sampled[0]:
            raise ValueError("weights are constant over the sampled range; a divergent sequence is required")


def bessel_weights(eps: float) -> WeightSequence:
    """Weights ``sqrt(ell! * (2 eps^2)^ell)`` whose subspace kernel is Bessel-type."""
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    log_2e2 = math.log(2.0 * eps * eps)

    def weight(ell: int) -> float:
        return math.exp(0.5 * (math.lgamma(ell + 1) + ell * log_2e2))

    return WeightSequence(weight)


def log_subspace_bound(
    n: int,
    weights: WeightSequence,
    eps: float,
    c_sup: float,
    weighted_norm: float,
    index: int | None = None,
) -> float:
    """Log of :func:`subspace_bound`."""
    if index is None:
        index = n
    if index < 0:
        raise ValueError(f"weight index must be >= 0, got {index}")
    weights.validate_through(max(index, 1))
    base = log_gaussian_rate_bound(n, eps, c_sup, weighted_norm)
    return base - math.log(weights.value(index))


def subspace_bound(
    n: int,
    weights: WeightSequence,
    eps: float,
    c_sup: float,
    weighted_norm: float,
    index: int | None = None,
) -> float:
    """Rate bound improved by the reciprocal weight for subspace members.

    ``index`` is the weight position dividing the bound and defaults to
    ``n``, the first expansion degree dropped by an ``n``-term truncation.
    Because the weights are non-decreasing, any larger index would also be
    valid; the parameter is exposed for that reason.
    """
    return math.exp(log_subspace_bound(n, weights, eps, c_sup, weighted_norm, index))


def bessel_subspace_kernel(x, y, eps: float, ctx: PrecisionContext):
    """Reproducing kernel of the Bessel-weight subspace.

    Series form ``exp(-eps^2 (x^2 + y^2)) * sum_ell (x y)^ell / (ell!)^2``,
    which for ``x y >= 0`` equals ``exp(...) * I0(2 sqrt(x y))`` with the
    modified Bessel function ``I0``, and stays real for ``x y < 0``.  The
    series is truncated once the geometric remainder estimate drops below
    ``10**(-digits)``.
    """
    with ctx.active():
        xm, ym = ctx.mpf(x), ctx.mpf(y)
        e2 = ctx.mpf(eps) ** 2
        z = xm * ym
        tol = ctx.pow10(-ctx.digits)
        term = ctx.mpf(1)
        total = ctx.mpf(1)
        ell = 0
        while True:
            ell += 1
            term = term * z / (ell * ell)
            total += term
            ratio = abs(z) / ((ell + 1) * (ell + 1))
            if ratio < 0.5 and abs(term) * ratio / (1 - ratio) < tol:
                break
            if ell > 100_000:
                raise RuntimeError("Bessel kernel series failed to terminate")
        return gmpy2.exp(-e2 * (xm * xm + ym * ym)) * total


def log_tensor_bound(n_list: Sequence[int], eps_list, c_list, norm: float) -> float:
    """Log of :func:`tensor_bound` (log-sum-exp over the per-dimension terms)."""
    ns = [int(v) for v in n_list]
    epss = [float(v) for v in eps_list]
    cs = [float(v) for v in c_list]
    if not ns or len(ns) != len(epss) or len(ns) != len(cs):
        raise ValueError("n_list, eps_list and c_list must share one entry per dimension")
    _require_nonnegative(norm=norm)
    for i, (n_i, eps_i, c_i) in enumerate(zip(ns, epss, cs)):
        if not (eps_i > 0 and c_i > 0):
            raise ValueError(f"dimension {i}: eps and c must be positive")
        needed = 2.0 * eps_i * eps_i * c_i * c_i
        if n_i < needed:
            raise ValueError(
                f"dimension {i}: rate bound requires n >= 2*eps^2*c^2 = {needed:g}, got n={n_i}"
            )
    if norm == 0.0:
        return -math.inf
    logs = [
        0.75 * math.log(n_i) - n_i * (0.5 * math.log(n_i) - math.log(rate_base(eps_i, c_i)))
        for n_i, eps_i, c_i in zip(ns, epss, cs)
    ]
    peak = max(logs)
    return (
        math.log(RATE_PREFACTOR)
        + math.log(norm)
        + peak
        + math.log(sum(math.exp(v - peak) for v in logs))
    )


def tensor_bound(n_list: Sequence[int], eps_list, c_list, norm: float) -> float:
    """Uniform error bound on a tensor grid: sum of per-dimension rate terms.

    Each dimension must satisfy its own precondition
    ``n_i >= 2 * eps_i^2 * c_i^2``; violations name the offending
    dimension.
    """
    return math.exp(log_tensor_bound(n_list, eps_list, c_list, norm))


def log_fill_distance_bound(h: float, interval: Interval, norm: float) -> float:
    """Log of :func:`fill_distance_bound`."""
    h = float(h)
    if not 0.0 < h < 1.0:
        raise ValueError(f"fill-distance bound is used for 0 < h < 1, got h={h}")
    _require_nonnegative(norm=norm)
    if norm == 0.0:
        return -math.inf
    constant = 0.125 * min(interval.length / 6.0, 1.0)
    return math.log(2.0) + math.log(norm) + constant * math.log(h) / h


def fill_distance_bound(h: float, interval: Interval, norm: float) -> float:
    """Classical fill-distance error bound ``2 * norm * exp(C log(h) / h)``.

    Uses the largest admissible constant ``C = min((b-a)/6, 1) / 8``.  The
    bound is only meaningful for small fill distances; this implementation
    accepts ``h < 1`` and rejects anything larger.
    """
    return math.exp(log_fill_distance_bound(h, interval, norm))


@dataclass(frozen=True)
class TargetFunction:
    """Benchmark target ``x^m * exp(x - eps^2 x^2)``.

    A member of the Gaussian kernel's native space for every ``m >= 0`` and
    ``eps > 0``; the squared native-space norm has the explicit series

        (2 eps^2)^(-m) * sum_ell (2 eps^2)^(-ell) * (ell + m)! / (ell!)^2.
    """

    m: int
    eps: float

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "eps", float(self.eps))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def value(self, x, ctx: PrecisionContext | None = None):
        """Evaluate the target at ``x`` (hardware floats or under ``ctx``)."""
        if ctx is None:
            x = float(x)
            return x**self.m * math.exp(x - self.eps * self.eps * x * x)
        with ctx.active():
            xm = ctx.mpf(x)
            e2 = ctx.mpf(self.eps) ** 2
            return xm**self.m * gmpy2.exp(xm - e2 * xm * xm)

    def norm(self, tol: float, ctx: PrecisionContext):
        """Native-space norm, summed until the remainder estimate is below ``tol**2``.

        The term ratio tends to zero, so the series converges for every
        ``eps``; summation stops once the ratio falls below one half and the
        geometric remainder (including the prefactor) is under ``tol**2``.
        """
        if not float(tol) > 0:
            raise ValueError("tol must be positive")
        m = self.m
        with ctx.active():
            inv_2e2 = 1 / (2 * ctx.mpf(self.eps) ** 2)
            prefactor = inv_2e2**m
            tol_sq = ctx.mpf(tol) ** 2
            term = ctx.mpf(gmpy2.fac(m))
            total = term
            ell = 0
            while True:
                ratio = inv_2e2 * (ell + m + 1) / ((ell + 1) * (ell + 1))
                next_term = term * ratio
                if ratio < 0.5 and prefactor * next_term / (1 - ratio) < tol_sq:
                    break
                total += next_term
                term = next_term
                ell += 1
                if ell > 100_000:
                    raise RuntimeError("norm series failed to terminate")
            return gmpy2.sqrt(prefactor * total)


def _require_nonnegative(**named) -> None:
    for name, value in named.items():
        if not float(value) >= 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
