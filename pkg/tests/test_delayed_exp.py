import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delayexp import (
    DomainError,
    MatrixSequence,
    WorkBudgetExceeded,
    block_index,
    delayed_exp,
    delayed_exp_permutable,
    nested_sum_count,
    p_direct,
    p_table,
)

ONES = MatrixSequence.constant([[1.0]])


def random_sequence(rng, n, length):
    return MatrixSequence(
        prefix=tuple(rng.uniform(-1, 1, (n, n)) for _ in range(length)),
        tail=rng.uniform(-1, 1, (n, n)),
    )


class TestBlockIndex:
    @pytest.mark.parametrize(
        "k,m,expected",
        [(1, 2, 1), (3, 2, 1), (4, 2, 2), (7, 1, 4), (1, 1, 1), (2, 1, 1), (3, 1, 2)],
    )
    def test_known_values(self, k, m, expected):
        assert block_index(k, m) == expected

    def test_rejects_k_below_one(self):
        with pytest.raises(DomainError):
            block_index(0, 2)

    @given(k=st.integers(min_value=1, max_value=10**6), m=st.integers(min_value=1, max_value=50))
    def test_defining_inequality(self, k, m):
        l = block_index(k, m)
        assert (l - 1) * (m + 1) + 1 <= k <= l * (m + 1)


class TestPDirect:
    def test_depth_zero_is_identity(self):
        rng = np.random.default_rng(0)
        D = random_sequence(rng, 3, 4)
        assert np.array_equal(p_direct(D, 2, 5, 0), np.eye(3))

    def test_single_sum_of_ones(self):
        # m=1, D=1: depth 1 at k=3 is sum_{j=0}^{2} 1 = 3
        assert p_direct(ONES, 1, 3, 1)[0, 0] == 3.0

    def test_single_tuple_scalar(self):
        # m=1, D_k = k+1, k=3, d=2: only (j1, j2) = (2, 2) -> D_2 D_0 = 3
        D = MatrixSequence(prefix=([[1.0]], [[2.0]], [[3.0]], [[4.0]]), tail=[[5.0]])
        assert p_direct(D, 1, 3, 2)[0, 0] == 3.0

    def test_empty_outer_sum_is_zero(self):
        rng = np.random.default_rng(1)
        D = random_sequence(rng, 2, 6)
        assert np.array_equal(p_direct(D, 2, 3, 2), np.zeros((2, 2)))  # k <= (d-1)(m+1)

    @pytest.mark.parametrize("m,d", [(1, 2), (2, 2), (1, 3), (3, 2)])
    def test_first_nonzero_point_is_descending_product(self, m, d):
        # At k = (d-1)(m+1)+1 exactly one index tuple survives and the value
        # is the ordered product D_{(d-1)(m+1)} D_{(d-2)(m+1)} ... D_0.
        rng = np.random.default_rng(42 + m + d)
        D = random_sequence(rng, 3, d * (m + 1) + 2)
        k = (d - 1) * (m + 1) + 1
        want = np.eye(3)
        for i in range(d - 1, -1, -1):
            want = want @ D.lookup(i * (m + 1))
        got = p_direct(D, m, k, d)
        np.testing.assert_allclose(got, want, rtol=1e-13, atol=0)

    def test_budget_guard(self):
        with pytest.raises(WorkBudgetExceeded):
            p_direct(ONES, 1, 40, 10, max_terms=10)


class TestPTable:
    def test_zero_sequence_gives_zero_layers(self):
        table = p_table(MatrixSequence.zero(2), 2, 9)
        assert not np.any(table.cells[:, 1:])

    def test_matches_direct_scalar_ones(self):
        m = 2
        table = p_table(ONES, m, 12)
        for k in range(13):
            for d in range(0, table.l_max + 1):
                assert table.p(k, d)[0, 0] == p_direct(ONES, m, k, d)[0, 0]
        assert table.p(4, 2)[0, 0] == 1.0  # single tuple j1=3, j2=3

    @pytest.mark.parametrize("n,m,k_cap", [(3, 1, 8), (2, 2, 10), (4, 3, 12), (1, 4, 14)])
    def test_matches_direct_random(self, n, m, k_cap):
        rng = np.random.default_rng(n * 100 + m)
        D = random_sequence(rng, n, k_cap + 1)
        table = p_table(D, m, k_cap)
        for k in range(k_cap + 1):
            for d in range(0, block_index(max(k, 1), m) + 1):
                want = p_direct(D, m, k, d)
                scale = max(1.0, np.abs(want).max())
                assert np.abs(table.p(k, d) - want).max() / scale < 1e-12

    def test_layer_recurrence_random(self):
        # P(k+1, d) - P(k, d) = D_k P(k-m, d-1) across the admissible grid.
        rng = np.random.default_rng(5)
        for n, m in ((2, 1), (3, 2), (4, 4)):
            D = random_sequence(rng, n, 22)
            k_cap = 20
            for k in range(1, k_cap + 1):
                for d in range(1, block_index(k, m) + 1):
                    lhs = p_direct(D, m, k + 1, d) - p_direct(D, m, k, d)
                    rhs = D.lookup(k) @ p_direct(D, m, k - m, d - 1)
                    scale = max(1.0, np.abs(rhs).max())
                    assert np.abs(lhs - rhs).max() / scale < 1e-12


class TestDelayedExp:
    def test_piecewise_boundaries(self):
        rng = np.random.default_rng(2)
        D = random_sequence(rng, 3, 5)
        m = 2
        assert np.array_equal(delayed_exp(D, m, -m - 1), np.zeros((3, 3)))
        assert np.array_equal(delayed_exp(D, m, -m - 7), np.zeros((3, 3)))
        for k in range(-m, 1):
            assert np.array_equal(delayed_exp(D, m, k), np.eye(3))

    def test_scalar_values(self):
        assert delayed_exp(ONES, 2, 4)[0, 0] == 6.0
        assert delayed_exp(ONES, 1, 2)[0, 0] == 3.0

    def test_first_increment_is_d0(self):
        rng = np.random.default_rng(3)
        for m in (1, 2, 4):
            D = random_sequence(rng, 2, 4)
            inc = delayed_exp(D, m, 1) - delayed_exp(D, m, 0)
            np.testing.assert_allclose(inc, D.lookup(0), rtol=0, atol=1e-15)

    @pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (3, 2), (2, 3)])
    def test_difference_relation_all_k(self, n, m):
        # e(k+1) - e(k) = D_k e(k-m), within blocks and at block boundaries.
        rng = np.random.default_rng(10 * n + m)
        D = random_sequence(rng, n, 12)
        k_cap = 40
        table = p_table(D, m, k_cap + 1)
        for k in range(0, k_cap + 1):
            lhs = table.exp_value(k + 1) - table.exp_value(k)
            rhs = D.lookup(k) @ table.exp_value(k - m)
            scale = max(1.0, np.abs(rhs).max())
            assert np.abs(lhs - rhs).max() / scale < 1e-12

    def test_matches_stepping_the_difference_relation(self):
        # Independent oracle: iterate z(k+1) = z(k) + D_k z(k-m) matrix-wise.
        rng = np.random.default_rng(11)
        n, m, k_cap = 3, 2, 25
        D = random_sequence(rng, n, 9)
        values = {k: np.eye(n) for k in range(-m, 1)}
        for k in range(k_cap):
            lagged = values[k - m] if k - m >= -m else np.zeros((n, n))
            values[k + 1] = values[k] + D.lookup(k) @ lagged
        table = p_table(D, m, k_cap)
        for k in range(k_cap + 1):
            want = values[k]
            scale = max(1.0, np.abs(want).max())
            assert np.abs(table.exp_value(k) - want).max() / scale < 1e-12


class TestPermutable:
    def test_zero_matrix(self):
        theta = np.zeros((2, 2))
        for k in range(-3, 9):
            want = np.zeros((2, 2)) if k <= -4 else np.eye(2)
            assert np.array_equal(delayed_exp_permutable(theta, 3, k), want)

    def test_scalar_binomials(self):
        assert delayed_exp_permutable(np.array([[1.0]]), 2, 4)[0, 0] == 6.0

    @pytest.mark.parametrize("n,m,k_cap", [(2, 3, 10), (3, 1, 14), (2, 2, 17)])
    def test_matches_sequence_exponential(self, n, m, k_cap):
        rng = np.random.default_rng(n + m)
        d_const = rng.uniform(-1, 1, (n, n))
        D = MatrixSequence.constant(d_const)
        table = p_table(D, m, k_cap)
        for k in range(-m - 1, k_cap + 1):
            want = delayed_exp(D, m, k, table)
            got = delayed_exp_permutable(d_const, m, k)
            scale = max(1.0, np.abs(want).max())
            assert np.abs(got - want).max() / scale < 1e-12


class TestNestedSumCount:
    def test_depth_one_is_k(self):
        for k in (1, 2, 9, 25):
            assert nested_sum_count(3, k, 1) == k

    @pytest.mark.parametrize("m,k,d,expected", [(1, 3, 2, 1), (2, 7, 2, 10)])
    def test_known_counts(self, m, k, d, expected):
        assert nested_sum_count(m, k, d) == expected

    def test_below_domain_is_zero(self):
        assert nested_sum_count(2, 3, 2) == 0

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(min_value=1, max_value=5),
        k=st.integers(min_value=1, max_value=25),
        d=st.integers(min_value=1, max_value=8),
    )
    def test_equals_binomial(self, m, k, d):
        top = k - (d - 1) * m
        want = math.comb(top, d) if top >= d else 0
        assert nested_sum_count(m, k, d) == want
