import numpy as np
import pytest

from psir.errors import NumericError
from psir.model import AggParams, NetParams, chain_mobility
from psir.reproduction import (next_gen_r0, r0_aggregated, r0_network,
                               spectral_radius)


def random_row_stochastic(rng, D):
    M = rng.uniform(0.0, 1.0, (D, D))
    return M / M.sum(axis=1, keepdims=True)


class TestSpectralRadius:
    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_identity(self, n):
        assert spectral_radius(np.eye(n)) == 1.0

    def test_row_stochastic_is_one(self):
        rng = np.random.default_rng(23)
        for D in (2, 5, 10):
            M = random_row_stochastic(rng, D)
            assert spectral_radius(M) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal(self):
        assert spectral_radius(np.diag([2.0, 3.0])) == pytest.approx(3.0,
                                                                     rel=1e-11)

    def test_against_dense_eigenvalue_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            M = rng.uniform(0.0, 1.0, (6, 6))
            expected = np.abs(np.linalg.eigvals(M)).max()
            assert spectral_radius(M) == pytest.approx(expected, rel=1e-10)

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((3, 3))) == 0.0

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            spectral_radius(np.ones((2, 3)))

    def test_non_convergence_reported(self):
        # periodic non-negative matrix: the eigenvalue estimate oscillates
        with pytest.raises(NumericError):
            spectral_radius(np.array([[0.0, 2.0], [1.0, 0.0]]))


class TestNextGenR0:
    def test_scalar_sir_case(self):
        assert next_gen_r0([[1.0]], [[0.5]]) == pytest.approx(2.0, rel=1e-12)

    def test_equal_matrices_give_one(self):
        rng = np.random.default_rng(2)
        F = rng.uniform(0.1, 1.0, (4, 4)) + np.eye(4)
        assert next_gen_r0(F, F) == pytest.approx(1.0, rel=1e-10)

    def test_chain_network_matrices(self):
        # new-infection matrix has entries beta*p_ji, transfer is gamma*I
        P = chain_mobility(10, 0.005)
        F = 1.0 * P.T
        V = 0.5 * np.eye(10)
        assert next_gen_r0(F, V) == pytest.approx(2.0, abs=1e-9)

    def test_singular_v_rejected(self):
        with pytest.raises(ValueError):
            next_gen_r0(np.eye(2), np.zeros((2, 2)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            next_gen_r0(np.eye(2), np.eye(3))


class TestR0Aggregated:
    def test_plateau_parameters(self):
        p = AggParams(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
        assert r0_aggregated(p) == 2.0

    def test_argentina_parameters(self):
        p = AggParams(beta=0.2118, gamma=0.1667, rho=0.8026, alpha=242.4,
                      beta_R=0.01911)
        # quotient computed independently at build time
        assert r0_aggregated(p) == pytest.approx(1.2705458908218356, rel=1e-14)

    def test_critical(self):
        p = AggParams(beta=0.7, gamma=0.7, rho=0.0, alpha=0.0, beta_R=0.0)
        assert r0_aggregated(p) == 1.0


class TestR0Network:
    def test_chain_ten_districts(self):
        p = NetParams(beta=1.0, gamma=0.5, populations=np.full(10, 0.1),
                      mobility=chain_mobility(10, 0.005))
        assert r0_network(p) == pytest.approx(2.0, abs=1e-9)

    def test_identity_mobility(self):
        p = NetParams(beta=3.0, gamma=1.0, populations=np.ones(4),
                      mobility=np.eye(4))
        assert r0_network(p) == pytest.approx(3.0, abs=1e-9)

    def test_random_row_stochastic_seeded(self):
        rng = np.random.default_rng(1234)
        M = random_row_stochastic(rng, 5)
        # dense-eigenvalue oracle confirms the dominant eigenvalue is 1
        assert np.abs(np.linalg.eigvals(M)).max() == pytest.approx(1.0,
                                                                   abs=1e-12)
        p = NetParams(beta=1.0, gamma=2.0, populations=np.full(5, 0.2),
                      mobility=M)
        assert r0_network(p) == pytest.approx(0.5, abs=1e-9)

    def test_matches_aggregated_for_any_mobility(self):
        # independence from the mobility matrix, 20 draws per size
        rng = np.random.default_rng(99)
        for D in (2, 5, 10):
            for _ in range(20):
                M = random_row_stochastic(rng, D)
                beta, gamma = rng.uniform(0.2, 3.0, 2)
                net = NetParams(beta=beta, gamma=gamma,
                                populations=np.full(D, 1.0 / D), mobility=M)
                agg = AggParams(beta=beta, gamma=gamma, rho=0.1, alpha=1.0,
                                beta_R=0.1)
                assert abs(r0_network(net) - r0_aggregated(agg)) <= 1e-9
