import numpy as np
import pytest

from delayexp import (
    MatrixSequence,
    Overflow,
    PowerCache,
    SingularA,
    delayed_exp,
    fundamental_phi,
    p_table,
    phi_oracle,
    transform_D,
)
from delayexp.randomsys import random_system

from conftest import make_system


def rel_gap(got, want):
    return np.abs(got - want).max() / max(1.0, np.abs(want).max())


class TestPowerCache:
    def test_inverse_verified(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(-1, 1, (3, 3)) + 2 * np.eye(3)
        pc = PowerCache(a)
        assert np.abs(a @ pc.power(-1) - np.eye(3)).max() < 1e-10

    def test_powers_consistent(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(-1, 1, (2, 2)) + np.eye(2)
        pc = PowerCache(a)
        for j in (-6, -2, 0, 1, 5, 11):
            np.testing.assert_allclose(pc.power(j + 1), a @ pc.power(j), rtol=1e-10)

    def test_singular_rejected(self):
        with pytest.raises(SingularA):
            PowerCache(np.zeros((2, 2)))


class TestTransformD:
    def test_identity_a_gives_b(self):
        rng = np.random.default_rng(2)
        b = MatrixSequence(prefix=(rng.uniform(-1, 1, (2, 2)),), tail=rng.uniform(-1, 1, (2, 2)))
        D = transform_D(np.eye(2), b, 3)
        for k in (0, 1, 5):
            np.testing.assert_array_equal(D.lookup(k), b.lookup(k))

    def test_zero_b_gives_zero(self):
        D = transform_D(np.diag([2.0, 3.0]), MatrixSequence.zero(2), 1)
        for k in (0, 4):
            assert not np.any(D.lookup(k))

    def test_hand_value(self):
        # A=diag(2,1), B=[[0,1],[0,0]], m=1: D_0 = A^-1 B A^-1 = [[0,1/2],[0,0]]
        D = transform_D(np.diag([2.0, 1.0]), MatrixSequence.constant([[0.0, 1.0], [0.0, 0.0]]), 1)
        np.testing.assert_allclose(D.lookup(0), [[0.0, 0.5], [0.0, 0.0]], atol=1e-15)


class TestPhiOracle:
    def test_undelayed_geometric(self):
        system = make_system(2.0 * np.eye(2), 1, MatrixSequence.zero(2), np.ones((2, 2)))
        phi = phi_oracle(system, 10)
        for k in range(-1, 11):
            np.testing.assert_allclose(phi.value(k), 2.0**k * np.eye(2), rtol=1e-14)

    def test_scalar_delayed_fibonacci(self, scalar_delay2):
        phi = phi_oracle(scalar_delay2, 6)
        got = [phi.value(k)[0, 0] for k in range(-2, 7)]
        assert got == [1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 13.0]

    def test_phi_zero_is_identity(self):
        system = random_system(3, n=3, m=2)
        assert np.array_equal(phi_oracle(system, 0).value(0), np.eye(3))


class TestFundamentalPhi:
    def test_zero_b_reduces_to_powers(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(-1, 1, (3, 3)) + np.eye(3)
        system = make_system(a, 2, MatrixSequence.zero(3), rng.uniform(-1, 1, (3, 3)))
        phi = fundamental_phi(system, 12)
        pc = PowerCache(a)
        for k in range(-2, 13):
            assert rel_gap(phi.value(k), pc.power(k)) < 1e-12
        assert not np.any(phi.value(-3))

    def test_identity_a_reduces_to_delayed_exp(self):
        rng = np.random.default_rng(5)
        b = MatrixSequence(
            prefix=tuple(rng.uniform(-1, 1, (2, 2)) for _ in range(4)),
            tail=rng.uniform(-1, 1, (2, 2)),
        )
        system = make_system(np.eye(2), 2, b, np.ones((3, 2)))
        phi = fundamental_phi(system, 15)
        table = p_table(b, 2, 15)
        for k in range(-3, 16):
            assert rel_gap(phi.value(k), delayed_exp(b, 2, k, table)) < 1e-12

    def test_matches_oracle_constant_b(self):
        system = random_system(6, n=2, m=2, constant_b=True)
        closed = fundamental_phi(system, 15)
        stepped = phi_oracle(system, 15)
        for k in range(-3, 16):
            assert rel_gap(closed.value(k), stepped.value(k)) < 1e-9

    @pytest.mark.parametrize("seed,n,m,k_max", [(7, 2, 1, 60), (8, 3, 3, 60), (9, 4, 5, 60)])
    def test_matches_oracle_random(self, seed, n, m, k_max):
        system = random_system(seed, n=n, m=m)
        closed = fundamental_phi(system, k_max)
        stepped = phi_oracle(system, k_max)
        for k in range(-m, k_max + 1):
            assert rel_gap(closed.value(k), stepped.value(k)) < 1e-9

    @pytest.mark.parametrize("seed,n,m", [(10, 2, 1), (11, 3, 2), (12, 4, 4)])
    def test_defining_equation_residual(self, seed, n, m):
        system = random_system(seed, n=n, m=m)
        k_max = 60
        phi = fundamental_phi(system, k_max)
        pc = PowerCache(system.A)
        for k in range(-m, 1):  # initial segment: exactly the cached powers
            np.testing.assert_array_equal(phi.value(k), pc.power(k))
        for k in range(0, k_max):
            want = system.A @ phi.value(k) + system.B.lookup(k) @ phi.value(k - m)
            assert rel_gap(phi.value(k + 1), want) < 1e-9

    def test_transform_consistency_moderate_horizon(self):
        # A^{-k} Phi(k) = delayed exponential of the conjugated sequence.
        # Conjugation makes this comparison exponentially ill-conditioned in k,
        # so the horizon stays small; the x-space identities cover large k.
        for seed, n, m in ((13, 2, 1), (14, 3, 2)):
            system = random_system(seed, n=n, m=m)
            k_max = 12
            phi = fundamental_phi(system, k_max)
            D = transform_D(system.A, system.B, system.m)
            table = p_table(D, m, k_max)
            pc = PowerCache(system.A)
            for k in range(0, k_max + 1):
                assert rel_gap(pc.power(-k) @ phi.value(k), table.exp_value(k)) < 1e-9

    def test_conjugated_coefficient_form_fails(self):
        # Regression for the errata: stepping with the conjugated D_k in place
        # of B_k does NOT reproduce the fundamental matrix when A and B do not
        # commute. Demonstrated on one explicit non-commuting instance.
        system = make_system(
            np.array([[1.0, 1.0], [0.0, 1.0]]),
            1,
            MatrixSequence.constant([[0.0, 0.0], [1.0, 0.0]]),
            np.ones((2, 2)),
        )
        k_max = 6
        D = transform_D(system.A, system.B, system.m)
        values = {k: PowerCache(system.A).power(k) for k in range(-1, 1)}
        for k in range(k_max):
            lagged = values[k - 1] if k - 1 >= -1 else np.zeros((2, 2))
            values[k + 1] = system.A @ values[k] + D.lookup(k) @ lagged
        good = fundamental_phi(system, k_max)
        worst = max(rel_gap(values[k], good.value(k)) for k in range(k_max + 1))
        assert worst > 1e-2  # visibly wrong, not a rounding artifact

    def test_overflow_reported(self):
        system = make_system(
            np.array([[1e6]]), 1, MatrixSequence.constant([[1e6]]), np.ones((2, 1))
        )
        with pytest.raises(Overflow) as err:
            fundamental_phi(system, 200)
        assert err.value.k is not None
