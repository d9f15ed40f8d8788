"""Runtime-precision scalars and the dense linear algebra built on them.

Gram matrices of the Gaussian kernel lose positive definiteness in double
precision already for a couple of dozen nodes, so every ill-conditioned
solve in this package runs on MPFR scalars (via :mod:`gmpy2`) whose
precision is chosen at runtime through a :class:`PrecisionContext`.

Design notes
------------
- A context fixes the number of significant decimal digits.  All arithmetic
  performed while the context is active is correctly rounded at that
  precision and therefore bit-reproducible for identical inputs.
- Symmetric positive-definite systems go through Cholesky
  (:func:`cholesky_factor` / :func:`cholesky_solve`); the factorization
  object can be reused for many right-hand sides.  General square matrices
  only need a log-determinant, provided by :func:`lu_logdet` (LU with
  partial pivoting).
- A non-positive Cholesky pivot raises :class:`NotPositiveDefiniteError`
  instead of silently regularizing; for kernel Gram matrices this is the
  signal to raise ``digits``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import gmpy2

__all__ = [
    "PrecisionError",
    "NotPositiveDefiniteError",
    "PrecisionContext",
    "make_context",
    "Matrix",
    "CholeskyFactor",
    "cholesky_factor",
    "cholesky_solve",
    "lu_logdet",
]

MIN_DIGITS = 16

_LOG2_10 = math.log2(10.0)
_GUARD_BITS = 4


class PrecisionError(ArithmeticError):
    """An extended-precision computation lost too much accuracy.

    The usual remedy is to rebuild the offending objects under a context
    with more digits.
    """


class NotPositiveDefiniteError(PrecisionError):
    """Cholesky hit a non-positive pivot.

    Either the matrix is genuinely not positive-definite or the working
    precision is exhausted; in the latter case raise ``digits`` and retry.
    """


class PrecisionContext:
    """Handle fixing the working precision of MPFR arithmetic.

    Parameters
    ----------
    digits : int
        Significant decimal digits carried by scalars created under this
        context.  Must be at least ``MIN_DIGITS`` (16).

    Notes
    -----
    Instances are immutable and safe to share across threads.  Activation
    (:meth:`active`) installs a thread-local arithmetic context, so
    concurrent computations under different precisions do not interfere.
    """

    __slots__ = ("_digits", "_bits")

    def __init__(self, digits: int):
        if isinstance(digits, bool) or not isinstance(digits, int):
            raise ValueError(f"digits must be an integer, got {digits!r}")
        if digits < MIN_DIGITS:
            raise ValueError(f"digits must be >= {MIN_DIGITS}, got {digits}")
        self._digits = digits
        self._bits = math.ceil(digits * _LOG2_10) + _GUARD_BITS

    @property
    def digits(self) -> int:
        return self._digits

    @property
    def bits(self) -> int:
        """Binary precision backing this context."""
        return self._bits

    def active(self):
        """Context manager making this precision current for the thread."""
        return gmpy2.context(precision=self._bits)

    def mpf(self, value) -> gmpy2.mpfr:
        """Convert ``value`` (number or decimal string) to a scalar.

        Conversion is correctly rounded at this context's precision and does
        not depend on any currently active context.
        """
        return gmpy2.mpfr(value, self._bits)

    def pow10(self, exponent) -> gmpy2.mpfr:
        """``10**exponent`` at working precision (exponent may be fractional)."""
        with self.active():
            return gmpy2.mpfr(10) ** gmpy2.mpfr(exponent)

    def decimal_str(self, value) -> str:
        """Render ``value`` with this context's full decimal precision."""
        return f"{gmpy2.mpfr(value, self._bits):.{self._digits}g}"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrecisionContext) and other._digits == self._digits

    def __hash__(self) -> int:
        return hash(("PrecisionContext", self._digits))

    def __repr__(self) -> str:
        return f"PrecisionContext(digits={self._digits})"


def make_context(digits: int) -> PrecisionContext:
    """Create a :class:`PrecisionContext` with ``digits`` decimal digits.

    Raises
    ------
    ValueError
        If ``digits`` is below the supported minimum of 16.
    """
    return PrecisionContext(digits)


def _is_finite_scalar(value) -> bool:
    if isinstance(value, gmpy2.mpfr):
        return bool(gmpy2.is_finite(value))
    if isinstance(value, int):
        return True
    try:
        return math.isfinite(value)
    except TypeError:
        return bool(gmpy2.is_finite(gmpy2.mpfr(value)))


class Matrix:
    """Immutable dense matrix with finite entries.

    Entries may be Python numbers or MPFR scalars; operations in this module
    coerce them to the precision of the context they are called with.

    Parameters
    ----------
    entries : iterable of rows
        Rectangular, non-empty, row-major data.  NaN or infinite entries are
        rejected.
    """

    __slots__ = ("_entries", "rows", "cols")

    def __init__(self, entries: Iterable[Sequence]):
        data = tuple(tuple(row) for row in entries)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        width = len(data[0])
        for row in data:
            if len(row) != width:
                raise ValueError("matrix rows must all have the same length")
            for value in row:
                if not _is_finite_scalar(value):
                    raise ValueError("matrix entries must be finite")
        self._entries = data
        self.rows = len(data)
        self.cols = width

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def entries(self) -> tuple:
        """Row-major tuple of row tuples."""
        return self._entries

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row(self, i: int) -> tuple:
        return self._entries[i]

    def __getitem__(self, key):
        i, j = key
        return self._entries[i][j]

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"


def _to_mp_rows(matrix: Matrix, ctx: PrecisionContext) -> list:
    return [[ctx.mpf(v) for v in row] for row in matrix.entries]


def _to_mp_vector(vector, ctx: PrecisionContext) -> list:
    return [ctx.mpf(v) for v in vector]


def _check_symmetric(rows: list, ctx: PrecisionContext) -> None:
    n = len(rows)
    tol = ctx.pow10(-ctx.digits / 2)
    one = ctx.mpf(1)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = rows[i][j], rows[j][i]
            scale = max(abs(a), abs(b), one)
            if abs(a - b) > tol * scale:
                raise ValueError(
                    f"matrix is not symmetric at ({i},{j}) within working tolerance"
                )


class CholeskyFactor:
    """Lower-triangular Cholesky factor, reusable across right-hand sides."""

    __slots__ = ("_lower", "_ctx", "n")

    def __init__(self, lower: list, ctx: PrecisionContext):
        self._lower = lower
        self._ctx = ctx
        self.n = len(lower)

    @property
    def context(self) -> PrecisionContext:
        return self._ctx

    def forward(self, rhs: Sequence) -> tuple:
        """Solve ``L y = rhs`` by forward substitution."""
        if len(rhs) != self.n:
            raise ValueError(f"right-hand side has length {len(rhs)}, expected {self.n}")
        ctx = self._ctx
        with ctx.active():
            y = _to_mp_vector(rhs, ctx)
            lower = self._lower
            for i in range(self.n):
                s = y[i]
                row = lower[i]
                for j in range(i):
                    s -= row[j] * y[j]
                y[i] = s / row[i]
            return tuple(y)

    def solve(self, rhs: Sequence) -> tuple:
        """Solve ``A x = rhs`` where ``A = L L^T``."""
        ctx = self._ctx
        with ctx.active():
            y = list(self.forward(rhs))
            lower = self._lower
            for i in range(self.n - 1, -1, -1):
                s = y[i]
                for j in range(i + 1, self.n):
                    s -= lower[j][i] * y[j]
                y[i] = s / lower[i][i]
            return tuple(y)


def cholesky_factor(matrix: Matrix, ctx: PrecisionContext) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix as ``L L^T``.

    Parameters
    ----------
    matrix : Matrix
        Square and symmetric within ``10**(-digits/2)`` relative tolerance.
    ctx : PrecisionContext
        Working precision for the factorization.

    Raises
    ------
    NotPositiveDefiniteError
        On a non-positive pivot (indefinite input or exhausted precision).
    ValueError
        If the matrix is not square or not symmetric within tolerance.
    """
    if not matrix.is_square:
        raise ValueError(f"matrix must be square, got {matrix.rows}x{matrix.cols}")
    with ctx.active():
        rows = _to_mp_rows(matrix, ctx)
        _check_symmetric(rows, ctx)
        n = matrix.rows
        lower = [[ctx.mpf(0)] * n for _ in range(n)]
        for i in range(n):
            li = lower[i]
            for j in range(i + 1):
                s = rows[i][j]
                lj = lower[j]
                for k in range(j):
                    s -= li[k] * lj[k]
                if i == j:
                    if s <= 0:
                        raise NotPositiveDefiniteError(
                            f"non-positive pivot at index {i}; the matrix is not "
                            f"positive-definite at {ctx.digits} digits "
                            "(raise digits if the input should be SPD)"
                        )
                    li[j] = gmpy2.sqrt(s)
                else:
                    li[j] = s / lj[j]
        return CholeskyFactor(lower, ctx)


def cholesky_solve(matrix: Matrix, rhs: Sequence, ctx: PrecisionContext) -> tuple:
    """Solve ``A x = rhs`` for SPD ``A`` via Cholesky at working precision.

    For repeated solves against the same matrix, call
    :func:`cholesky_factor` once and reuse :meth:`CholeskyFactor.solve`.
    """
    return cholesky_factor(matrix, ctx).solve(rhs)


def lu_logdet(matrix: Matrix, ctx: PrecisionContext) -> tuple:
    """Log-magnitude and sign of the determinant via pivoted LU.

    Returns
    -------
    (log_abs_det, sign)
        ``sign`` is -1, 0 or +1 and ``sign * exp(log_abs_det)`` equals the
        determinant to working precision.  ``sign == 0`` (with
        ``log_abs_det == -inf``) signals singularity at working precision.

    Raises
    ------
    ValueError
        If the matrix is not square.
    """
    if not matrix.is_square:
        raise ValueError(f"matrix must be square, got {matrix.rows}x{matrix.cols}")
    with ctx.active():
        rows = _to_mp_rows(matrix, ctx)
        n = matrix.rows
        sign = 1
        log_abs = ctx.mpf(0)
        for k in range(n):
            pivot_row = max(range(k, n), key=lambda i: abs(rows[i][k]))
            if rows[pivot_row][k] == 0:
                return gmpy2.mpfr("-inf"), 0
            if pivot_row != k:
                rows[pivot_row], rows[k] = rows[k], rows[pivot_row]
                sign = -sign
            pivot = rows[k][k]
            log_abs += gmpy2.log(abs(pivot))
            if pivot < 0:
                sign = -sign
            rk = rows[k]
            for i in range(k + 1, n):
                ri = rows[i]
                factor = ri[k] / pivot
                for j in range(k + 1, n):
                    ri[j] -= factor * rk[j]
        return log_abs, sign
