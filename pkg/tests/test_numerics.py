import math
import random

import gmpy2
import pytest

from gaussfekete import (
    GaussianKernel,
    Matrix,
    NotPositiveDefiniteError,
    PointSet,
    cholesky_factor,
    cholesky_solve,
    gram,
    lu_logdet,
    make_context,
)
from gaussfekete.baselines import chebyshev_points
from gaussfekete.basis import Interval

from helpers import mp_context


class TestMakeContext:
    def test_minimal_digits_allowed(self):
        ctx = make_context(16)
        assert ctx.digits == 16
        assert ctx.bits >= math.ceil(16 * math.log2(10))

    def test_below_minimum_rejected(self):
        with pytest.raises(ValueError):
            make_context(8)

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            make_context(50.0)
        with pytest.raises(ValueError):
            make_context(True)

    def test_decimal_round_trip(self):
        ctx = make_context(120)
        rng = random.Random(7)
        for _ in range(10):
            text = "0." + "".join(str(rng.randrange(10)) for _ in range(120))
            rendered = ctx.decimal_str(ctx.mpf(text))
            with mp_context(200):
                a = gmpy2.mpfr(text)
                b = gmpy2.mpfr(rendered)
                assert abs(a - b) <= abs(a) * gmpy2.mpfr(10) ** (-119)

    def test_120_digits_support_n30_gram_solve(self):
        # Oracle: the residual of a 30-node Gram solve, measured at twice the
        # working precision, stays far below 1e-20.
        ctx = make_context(120)
        interval = Interval(-1.0, 1.0)
        points = chebyshev_points(30, interval)
        kernel = GaussianKernel(1.0)
        matrix = gram(points, kernel, ctx)
        rhs = [1.0] * 30
        solution = cholesky_solve(matrix, rhs, ctx)
        with mp_context(240):
            worst = gmpy2.mpfr(0)
            for i in range(30):
                acc = gmpy2.mpfr(-1)
                for j in range(30):
                    acc += gmpy2.mpfr(matrix[i, j]) * gmpy2.mpfr(solution[j])
                worst = max(worst, abs(acc))
            assert worst < 1e-20


class TestMatrix:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Matrix([[1.0, float("nan")], [0.0, 1.0]])
        with pytest.raises(ValueError):
            Matrix([[float("inf")]])

    def test_rejects_ragged_and_empty(self):
        with pytest.raises(ValueError):
            Matrix([[1.0, 2.0], [3.0]])
        with pytest.raises(ValueError):
            Matrix([])

    def test_identity_and_indexing(self):
        eye = Matrix.identity(3)
        assert eye.rows == eye.cols == 3
        assert eye[1, 1] == 1 and eye[0, 2] == 0


class TestCholesky:
    def test_identity_returns_rhs_exactly(self):
        ctx = make_context(30)
        x = cholesky_solve(Matrix.identity(3), (1, 2, 3), ctx)
        assert [float(v) for v in x] == [1.0, 2.0, 3.0]

    def test_two_by_two_hand_solution(self):
        # Hand elimination of 4x+2y=8, 2x+3y=7 gives x=1.25, y=1.5.
        ctx = make_context(50)
        x = cholesky_solve(Matrix([[4, 2], [2, 3]]), (8, 7), ctx)
        assert abs(x[0] - 1.25) < 1e-45
        assert abs(x[1] - 1.5) < 1e-45

    def test_indefinite_rejected(self):
        ctx = make_context(30)
        with pytest.raises(NotPositiveDefiniteError):
            cholesky_solve(Matrix([[1, 2], [2, 1]]), (1, 1), ctx)

    def test_non_square_rejected(self):
        ctx = make_context(30)
        with pytest.raises(ValueError):
            cholesky_solve(Matrix([[1, 0, 0], [0, 1, 0]]), (1, 1), ctx)

    def test_asymmetric_rejected(self):
        ctx = make_context(30)
        with pytest.raises(ValueError):
            cholesky_factor(Matrix([[1, 0.5], [0.25, 1]]), ctx)

    def test_factor_reused_across_rhs(self):
        ctx = make_context(40)
        matrix = Matrix([[4, 2], [2, 3]])
        factor = cholesky_factor(matrix, ctx)
        for rhs in [(8, 7), (1, 0), (0, 1)]:
            direct = cholesky_solve(matrix, rhs, ctx)
            assert factor.solve(rhs) == direct

    @pytest.mark.parametrize("n", [1, 3, 5, 8])
    def test_random_spd_multiply_back(self, n):
        # A = B^T B + I is SPD; solving then multiplying back must reproduce
        # the right-hand side to half the working digits.
        rng = random.Random(100 + n)
        ctx = make_context(40)
        b = [[rng.uniform(-1, 1) for _ in range(n)] for _ in range(n)]
        a = [
            [sum(b[k][i] * b[k][j] for k in range(n)) + (1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        rhs = [rng.uniform(-1, 1) for _ in range(n)]
        matrix = Matrix(a)
        solution = cholesky_solve(matrix, rhs, ctx)
        with ctx.active():
            scale = max(abs(ctx.mpf(v)) for v in rhs)
            for i in range(n):
                acc = -ctx.mpf(rhs[i])
                for j in range(n):
                    acc += ctx.mpf(a[i][j]) * solution[j]
                assert abs(acc) <= scale * ctx.pow10(-20)


class TestLuLogdet:
    def test_diagonal(self):
        ctx = make_context(30)
        log_det, sign = lu_logdet(Matrix([[2, 0], [0, 3]]), ctx)
        assert sign == 1
        with mp_context(60):
            assert abs(log_det - gmpy2.log(6)) < 1e-25

    def test_permutation_sign(self):
        ctx = make_context(30)
        log_det, sign = lu_logdet(Matrix([[0, 1], [1, 0]]), ctx)
        assert sign == -1
        assert abs(log_det) < 1e-25

    def test_singular_sign_zero(self):
        ctx = make_context(30)
        log_det, sign = lu_logdet(Matrix([[1, 1], [1, 1]]), ctx)
        assert sign == 0
        assert gmpy2.is_infinite(log_det) and log_det < 0

    def test_non_square_rejected(self):
        ctx = make_context(30)
        with pytest.raises(ValueError):
            lu_logdet(Matrix([[1, 2, 3], [4, 5, 6]]), ctx)

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_product_rule(self, n):
        rng = random.Random(200 + n)
        ctx = make_context(50)
        a = [[rng.uniform(-1, 1) for _ in range(n)] for _ in range(n)]
        b = [[rng.uniform(-1, 1) for _ in range(n)] for _ in range(n)]
        with ctx.active():
            ab = [
                [sum(ctx.mpf(a[i][k]) * ctx.mpf(b[k][j]) for k in range(n)) for j in range(n)]
                for i in range(n)
            ]
        log_a, sign_a = lu_logdet(Matrix(a), ctx)
        log_b, sign_b = lu_logdet(Matrix(b), ctx)
        log_ab, sign_ab = lu_logdet(Matrix(ab), ctx)
        assert sign_ab == sign_a * sign_b
        with ctx.active():
            lhs = log_a + log_b
            assert abs(log_ab - lhs) <= ctx.pow10(-46) * max(1, abs(lhs))


class TestDeterminism:
    def test_repeated_solves_bit_identical(self):
        ctx = make_context(60)
        matrix = Matrix([[4, 2], [2, 3]])
        first = cholesky_solve(matrix, (8, 7), ctx)
        second = cholesky_solve(matrix, (8, 7), ctx)
        assert all(f"{u:.60g}" == f"{v:.60g}" for u, v in zip(first, second))

    def test_repeated_logdet_bit_identical(self):
        ctx = make_context(60)
        rng = random.Random(5)
        a = [[rng.uniform(-1, 1) for _ in range(6)] for _ in range(6)]
        r1 = lu_logdet(Matrix(a), ctx)
        r2 = lu_logdet(Matrix(a), ctx)
        assert f"{r1[0]:.60g}" == f"{r2[0]:.60g}" and r1[1] == r2[1]
