import math
import random

import gmpy2
import pytest

from gaussfekete import (
    CoincidentNodesError,
    GaussianKernel,
    Interval,
    PointSet,
    Rectangle,
    basis_function,
    basis_matrix,
    det_factorization_discrepancy,
    log_weighted_vandermonde,
    lu_logdet,
    make_context,
    tail_sum,
    tail_sup_bound,
    truncated_kernel,
)
from gaussfekete.baselines import chebyshev_points, equispaced_points

from helpers import mp_context, random_ordered_nodes

CTX = make_context(50)


class TestDomainTypes:
    def test_interval_sup_abs(self):
        assert Interval(-1, 1).sup_abs == 1.0
        assert Interval(-3, 0.5).sup_abs == 3.0
        assert Interval(0.25, 2).sup_abs == 2.0

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            Interval(1, 1)
        with pytest.raises(ValueError):
            Interval(2, -2)
        with pytest.raises(ValueError):
            Interval(0, math.inf)

    def test_rectangle(self):
        rect = Rectangle((Interval(-1, 1), Interval(0, 2)))
        assert rect.dim == 2
        with pytest.raises(ValueError):
            Rectangle(())

    def test_kernel_unit_diagonal(self):
        kernel = GaussianKernel(1.7)
        for x in (-0.9, 0.0, 0.3, 2.5):
            assert kernel(x, x) == 1.0
            assert kernel.value(x, x, CTX) == 1

    def test_kernel_closed_form(self):
        kernel = GaussianKernel(2.0)
        assert kernel(1.0, 0.25) == pytest.approx(math.exp(-4 * 0.5625), rel=1e-15)

    def test_kernel_validation(self):
        with pytest.raises(ValueError):
            GaussianKernel(0.0)
        with pytest.raises(ValueError):
            GaussianKernel(-1.0)

    def test_point_set_ordering_enforced(self):
        PointSet([-0.5, 0.0, 0.5])
        with pytest.raises(ValueError):
            PointSet([0.0, 0.0])
        with pytest.raises(ValueError):
            PointSet([0.5, -0.5])

    def test_point_set_containment(self):
        interval = Interval(-1, 1)
        PointSet([-1.0, 1.0], interval)
        with pytest.raises(ValueError):
            PointSet([-1.5, 0.0], interval)


class TestBasisFunction:
    def test_degree_zero(self):
        # Closed form exp(-x^2) at the exact binary value of x = 0.7,
        # evaluated independently at higher precision.
        value = basis_function(0, 0.7, 1.0, CTX)
        with mp_context(80):
            exact = gmpy2.exp(-gmpy2.mpfr(0.7) ** 2)
            assert abs(value - exact) < 1e-45
        assert float(value) == pytest.approx(0.612626, abs=1e-6)

    def test_degree_one(self):
        value = basis_function(1, 1.0, 1.0, CTX)
        with mp_context(80):
            exact = gmpy2.sqrt(gmpy2.mpfr(2)) * gmpy2.exp(gmpy2.mpfr(-1))
            assert abs(value - exact) < 1e-45
        assert float(value) == pytest.approx(0.520260, abs=1e-6)

    def test_vanishes_at_origin_for_positive_degree(self):
        assert basis_function(5, 0.0, 2.0, CTX) == 0
        assert basis_function(0, 0.0, 2.0, CTX) == 1

    def test_odd_degree_is_odd(self):
        left = basis_function(3, -0.4, 1.5, CTX)
        right = basis_function(3, 0.4, 1.5, CTX)
        assert left < 0 < right
        assert left + right == 0

    def test_negative_degree_rejected(self):
        with pytest.raises(ValueError):
            basis_function(-1, 0.0, 1.0, CTX)

    def test_large_degree_no_overflow(self):
        # The raw coefficient 2^ell eps^(2 ell)/ell! overflows doubles near
        # ell = 150; the log-domain route must stay finite.
        value = basis_function(400, 0.9, 1.0, CTX)
        assert gmpy2.is_finite(value)
        assert value > 0


class TestBasisMatrix:
    def test_single_node(self):
        matrix = basis_matrix(PointSet([0.0]), 1.0, CTX)
        assert matrix.rows == matrix.cols == 1
        assert matrix[0, 0] == 1

    def test_two_nodes_hand_values(self):
        matrix = basis_matrix(PointSet([-0.5, 0.5]), 1.0, CTX)
        with mp_context(80):
            envelope = gmpy2.exp(gmpy2.mpfr("-0.25"))
            odd = gmpy2.sqrt(gmpy2.mpfr(2)) * gmpy2.mpfr("0.5") * envelope
            assert abs(matrix[0, 0] - envelope) < 1e-45
            assert abs(matrix[0, 1] + odd) < 1e-45
            assert abs(matrix[1, 0] - envelope) < 1e-45
            assert abs(matrix[1, 1] - odd) < 1e-45

    def test_rows_are_nodes_columns_are_degrees(self):
        nodes = PointSet([-0.8, 0.1, 0.6])
        matrix = basis_matrix(nodes, 2.0, CTX)
        for k, x in enumerate(nodes):
            for ell in range(3):
                assert matrix[k, ell] == basis_function(ell, x, 2.0, CTX)

    def test_invertible_for_distinct_nodes(self):
        rng = random.Random(3)
        for n in (2, 5, 9):
            nodes = random_ordered_nodes(rng, n)
            _, sign = lu_logdet(basis_matrix(PointSet(nodes), 1.0, CTX), CTX)
            assert sign != 0


class TestTruncatedKernel:
    def test_single_term(self):
        for x, y in [(0.3, -0.7), (1.0, 1.0)]:
            value = truncated_kernel(x, y, 1, 1.0, CTX)
            with mp_context(80):
                exact = gmpy2.exp(-(gmpy2.mpfr(x) ** 2 + gmpy2.mpfr(y) ** 2))
                assert abs(value - exact) < 1e-45

    def test_converges_to_kernel_on_diagonal(self):
        value = truncated_kernel(0.3, 0.3, 200, 1.0, CTX)
        assert abs(value - 1) < 1e-30

    def test_alternating_series(self):
        value = truncated_kernel(1.0, -1.0, 50, 1.0, CTX)
        with mp_context(80):
            assert abs(value - gmpy2.exp(gmpy2.mpfr(-4))) < 1e-10

    def test_matches_basis_function_sum(self):
        with CTX.active():
            total = sum(
                basis_function(ell, 0.4, 1.3, CTX) * basis_function(ell, -0.2, 1.3, CTX)
                for ell in range(12)
            )
            value = truncated_kernel(0.4, -0.2, 12, 1.3, CTX)
            assert abs(value - total) < 1e-45

    def test_expansion_consistency_random_pairs(self):
        rng = random.Random(11)
        for _ in range(200):
            x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
            value = float(truncated_kernel(x, y, 60, 1.0, CTX))
            assert abs(value - math.exp(-((x - y) ** 2))) <= 1e-15


class TestLogWeightedVandermonde:
    def test_two_symmetric_nodes(self):
        # -eps^2 (0.25 + 0.25) + log(1) = -0.5
        assert log_weighted_vandermonde([-0.5, 0.5], 1.0) == pytest.approx(-0.5, abs=1e-15)

    def test_single_node_at_origin(self):
        assert log_weighted_vandermonde([0.0], 3.0) == 0.0

    def test_coincident_nodes_rejected(self):
        with pytest.raises(CoincidentNodesError):
            log_weighted_vandermonde([0.2, 0.2], 1.0)

    def test_extended_precision_matches_float(self):
        nodes = [-0.9, -0.2, 0.4, 0.8]
        lo = log_weighted_vandermonde(nodes, 2.0)
        hi = log_weighted_vandermonde(nodes, 2.0, CTX)
        assert lo == pytest.approx(float(hi), rel=1e-14)


class TestDetFactorization:
    def test_single_node(self):
        gap = det_factorization_discrepancy(PointSet([0.3]), 1.0, CTX)
        assert gap < 1e-10

    def test_five_random_nodes(self):
        rng = random.Random(21)
        nodes = random_ordered_nodes(rng, 5)
        gap = det_factorization_discrepancy(PointSet(nodes), 2.0, CTX)
        assert gap < 1e-44

    def test_chebyshev_twelve_nodes_eighty_digits(self):
        ctx = make_context(80)
        points = chebyshev_points(12, Interval(-1, 1))
        gap = det_factorization_discrepancy(points, 1.0, ctx)
        assert gap < 1e-74

    @pytest.mark.parametrize("n", range(1, 13))
    def test_identity_across_sizes(self, n):
        rng = random.Random(400 + n)
        nodes = random_ordered_nodes(rng, n)
        gap = det_factorization_discrepancy(PointSet(nodes), 1.0, CTX)
        assert gap < 1e-44


class TestTailBounds:
    def test_smallest_admissible_n(self):
        assert tail_sup_bound(2, 1.0, 1.0) == pytest.approx(math.sqrt(2), rel=1e-14)

    def test_ten_terms_exact_factorial(self):
        assert tail_sup_bound(10, 1.0, 1.0) == pytest.approx(32 / math.sqrt(3628800), rel=1e-14)

    def test_precondition_enforced(self):
        with pytest.raises(ValueError):
            tail_sup_bound(1, 1.0, 1.0)
        with pytest.raises(ValueError):
            tail_sup_bound(7, 2.0, 1.0)

    def test_tail_sum_at_origin(self):
        assert tail_sum(0.0, 1, 1.0, 1e-20, CTX) == 0
        assert tail_sum(0.0, 0, 1.0, 1e-20, CTX) == 1

    def test_tail_sum_full_series_is_diagonal(self):
        assert abs(tail_sum(1.0, 0, 1.0, 1e-30, CTX) - 1) < 1e-30

    def test_tail_sum_against_direct_summation(self):
        # Oracle: 200 terms of (2 x^2)^ell / ell! * exp(-2 x^2) at 80 digits.
        value = tail_sum(1.0, 4, 1.0, 1e-20, CTX)
        with mp_context(80):
            z = gmpy2.mpfr(2)
            term = gmpy2.exp(-z)
            total = gmpy2.mpfr(0)
            for ell in range(200):
                if ell >= 4:
                    total += term
                term = term * z / (ell + 1)
            assert abs(value - total) < 1e-19
        assert value <= tail_sup_bound(4, 1.0, 1.0)

    @pytest.mark.parametrize("eps", [1.0, 2.0])
    def test_tail_bound_dominates_tail_sum(self, eps):
        interval = Interval(-1, 1)
        grid = equispaced_points(41, interval).nodes
        n_lo = math.ceil(2 * eps**2)
        for n in range(n_lo, 21, 4):
            bound = tail_sup_bound(n, eps, 1.0)
            for x in grid:
                assert float(tail_sum(x, n, eps, 1e-25, CTX)) <= bound + 1e-20

    def test_squared_basis_monotone_beyond_threshold(self):
        # For ell >= 2 eps^2 c^2 the squared basis function increases with |x|
        # up to the interval edge.
        eps, c = 1.0, 1.0
        for ell in (2, 5, 9):
            previous = -1.0
            for x in [0.1 * k for k in range(1, 11)]:
                value = float(basis_function(ell, x, eps, CTX)) ** 2
                assert value >= previous
                previous = value

    def test_tail_sum_tolerance_validated(self):
        with pytest.raises(ValueError):
            tail_sum(0.5, 2, 1.0, 0.0, CTX)
        with pytest.raises(ValueError):
            tail_sum(0.5, -1, 1.0, 1e-10, CTX)
