import math

import numpy as np
import pytest

from psir.model import (AggParams, AggState, NetParams, NetState, Trajectory,
                        agg_rhs, chain_mobility, effective_infected,
                        make_agg_initial, make_net_initial, net_rhs,
                        saturation, solve_r_infty)

# High-precision scalar oracle values, frozen before the implementation.
SAT_AT_1 = 0.639092926771891627          # (2/pi)*atan(pi/2)
R_INF_AT_2 = 0.796812130020020           # root of r = 1 - exp(-2r)


class TestSaturation:
    def test_zero(self):
        assert saturation(0.0) == 0.0

    def test_at_one(self):
        assert saturation(1.0) == pytest.approx(SAT_AT_1, abs=1e-15)

    def test_large_argument_approaches_one(self):
        v = saturation(1e6)
        assert 1.0 - 1e-5 < v < 1.0

    def test_strictly_monotone(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            x, y = sorted(rng.uniform(0.0, 50.0, size=2))
            if x < y:
                assert saturation(x) < saturation(y)

    def test_unit_slope_at_origin(self):
        diffs = [(saturation(h) - saturation(0.0)) / h
                 for h in (1e-3, 1e-4, 1e-5)]
        # finite differences approach 1 monotonically from below
        assert diffs[0] < diffs[1] < diffs[2] < 1.0
        assert diffs[2] == pytest.approx(1.0, abs=1e-9)


class TestSolveRInfty:
    @pytest.mark.parametrize("r0", [0.0, 0.5, 1.0])
    def test_no_outbreak_root(self, r0):
        assert solve_r_infty(r0) == 0.0

    def test_pinned_value_at_two(self):
        assert solve_r_infty(2.0) == pytest.approx(R_INF_AT_2, abs=1e-12)

    @pytest.mark.parametrize("r0", [1.2, 2.0, 3.5, 10.0])
    def test_defining_equation(self, r0):
        r = solve_r_infty(r0)
        assert 0.0 < r < 1.0
        assert abs(r - (1.0 - math.exp(-r0 * r))) <= 1e-12

    def test_deterministic(self):
        assert solve_r_infty(2.0) == solve_r_infty(2.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            solve_r_infty(-0.1)


class TestAggParams:
    def test_r_inf_derived(self):
        p = AggParams(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
        assert p.r_inf == pytest.approx(R_INF_AT_2, abs=1e-12)
        assert p.s_inf + p.r_inf == 1.0

    def test_subcritical_r_inf_zero(self):
        p = AggParams(beta=0.4, gamma=0.5, rho=0.0, alpha=0.0, beta_R=0.0)
        assert p.r_inf == 0.0 and p.s_inf == 1.0

    def test_r_inf_positive_iff_supercritical(self):
        for beta, gamma in ((0.5, 0.5), (0.2, 0.4), (1.01, 1.0), (3.0, 1.0)):
            p = AggParams(beta=beta, gamma=gamma, rho=0.1, alpha=1.0, beta_R=0.1)
            assert (p.r_inf > 0.0) == (beta / gamma > 1.0)

    @pytest.mark.parametrize("kwargs", [
        dict(beta=-1.0, gamma=0.5, rho=0.0, alpha=0.0, beta_R=0.0),
        dict(beta=1.0, gamma=0.0, rho=0.0, alpha=0.0, beta_R=0.0),
        dict(beta=1.0, gamma=0.5, rho=-0.1, alpha=0.0, beta_R=0.0),
        dict(beta=1.0, gamma=0.5, rho=0.0, alpha=0.0, beta_R=0.0, N=0.0),
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            AggParams(**kwargs)


class TestMakeAggInitial:
    def test_plateau_experiment_values(self):
        s = make_agg_initial(1.0, 1e-6, 0.105)
        assert s.p_S == pytest.approx(0.895, abs=1e-15)
        assert s.S == pytest.approx(0.105 - 1e-6, abs=1e-15)
        assert s.I == 1e-6 and s.R == 0.0 and s.p_R == 0.0
        assert s.C == s.I

    def test_argentina_experiment_values(self):
        s = make_agg_initial(1.0, 1.43e-4, 0.1796)
        assert s.p_S == pytest.approx(0.8204, abs=1e-15)
        assert s.S == pytest.approx(0.179457, abs=1e-12)
        assert s.I == 1.43e-4

    def test_i0_exceeding_pi0_rejected(self):
        with pytest.raises(ValueError):
            make_agg_initial(1.0, 0.5, 0.4)

    def test_pi0_exceeding_n_rejected(self):
        with pytest.raises(ValueError):
            make_agg_initial(1.0, 0.1, 1.2)

    def test_zero_i0_rejected(self):
        with pytest.raises(ValueError):
            make_agg_initial(1.0, 0.0, 0.1)


class TestAggRhs:
    def test_disease_free_equilibrium(self):
        p = AggParams(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
        dy = agg_rhs(np.array([0.4, 0.6, 0.0, 0.0, 0.0, 0.0]), p)
        assert np.all(dy == 0.0)

    def test_reduces_to_classical_sir(self):
        p = AggParams(beta=1.3, gamma=0.4, rho=0.0, alpha=5.0, beta_R=0.0)
        S, I, R = 0.6, 0.3, 0.1
        dy = agg_rhs(np.array([0.0, S, I, R, 0.0, 0.0]), p)
        p_I = S + I + R
        inf = p.beta * S * I / p_I
        rec = p.gamma * I
        assert dy[0] == 0.0 and dy[4] == 0.0
        assert dy[1] == -inf
        assert dy[2] == inf - rec
        assert dy[3] == rec
        assert dy[5] == inf

    def test_hand_evaluated_point(self):
        # Independent scalar evaluation of every term at the plateau-run
        # starting point, done with 40-digit arithmetic and frozen here.
        p = AggParams(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
        y = make_agg_initial(1.0, 1e-6, 0.105).to_array()
        dy = agg_rhs(y, p)
        expected = np.array([
            -6.4793373678334035e-07,
            -3.5205673940713584e-07,
            4.9999047619047619e-07,
            5.0e-07,
            0.0,
            9.9999047619047619e-07,
        ])
        np.testing.assert_allclose(dy, expected, rtol=1e-13, atol=1e-22)

    def test_conservation_on_random_states(self):
        # epidemiologically sane draws: R0 <= 2.5 keeps 1/s_inf moderate, so
        # the exact cancellation is visible at the 1e-15 level in doubles
        rng = np.random.default_rng(11)
        for _ in range(500):
            gamma = rng.uniform(0.3, 1.5)
            beta = rng.uniform(0.3, 2.5) * gamma
            p = AggParams(beta=beta, gamma=gamma, rho=rng.uniform(0.0, 2.0),
                          alpha=rng.uniform(0.0, 50.0),
                          beta_R=rng.uniform(0.0, 0.3))
            y = rng.uniform(0.0, 1.0, 6)
            dy = agg_rhs(y, p)
            assert abs(math.fsum(dy[:5])) <= 1e-15 * p.N

    def test_degenerate_active_population_guarded(self):
        p = AggParams(beta=1.0, gamma=0.5, rho=0.657, alpha=32.81, beta_R=0.152)
        dy = agg_rhs(np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), p)
        assert np.all(np.isfinite(dy)) and np.all(dy == 0.0)


class TestChainMobility:
    def test_two_districts(self):
        np.testing.assert_array_equal(chain_mobility(2, 0.1),
                                      [[0.9, 0.1], [0.1, 0.9]])

    def test_three_districts(self):
        expected = [[0.995, 0.005, 0.0],
                    [0.005, 0.99, 0.005],
                    [0.0, 0.005, 0.995]]
        np.testing.assert_allclose(chain_mobility(3, 0.005), expected,
                                   rtol=0, atol=1e-15)

    def test_ten_districts_row_stochastic(self):
        M = chain_mobility(10, 0.005)
        assert M.shape == (10, 10)
        np.testing.assert_allclose(M.sum(axis=1), 1.0, rtol=0, atol=1e-15)
        assert (M >= 0).all()
        assert M[4, 4] == pytest.approx(0.99)

    def test_p_above_half_rejected(self):
        with pytest.raises(ValueError):
            chain_mobility(3, 0.6)

    def test_single_district_rejected(self):
        with pytest.raises(ValueError):
            chain_mobility(1, 0.1)


class TestEffectiveInfected:
    def test_identity_mobility(self):
        I = np.array([0.3, 0.1, 0.6])
        np.testing.assert_array_equal(effective_infected(I, np.eye(3)), I)

    def test_chain_first_row(self):
        M = chain_mobility(3, 0.005)
        out = effective_infected(np.array([1.0, 0.0, 0.0]), M)
        np.testing.assert_allclose(out, [0.995, 0.005, 0.0], atol=1e-15)

    def test_uniform_mobility_averages(self):
        D = 4
        M = np.full((D, D), 1.0 / D)
        I = np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(effective_infected(I, M),
                                   np.full(D, I.sum() / D))

    def test_totals_preserved_for_row_stochastic(self):
        rng = np.random.default_rng(3)
        for D in (2, 5, 10):
            M = rng.uniform(0.0, 1.0, (D, D))
            M /= M.sum(axis=1, keepdims=True)
            I = rng.uniform(0.0, 1.0, D)
            assert effective_infected(I, M).sum() == pytest.approx(I.sum(),
                                                                   rel=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            effective_infected(np.ones(3), np.eye(4))


class TestNetParams:
    def test_non_stochastic_rows_rejected(self):
        M = np.array([[0.8, 0.1], [0.1, 0.9]])
        with pytest.raises(ValueError):
            NetParams(beta=1.0, gamma=0.5, populations=np.ones(2), mobility=M)

    def test_negative_entry_rejected(self):
        M = np.array([[1.1, -0.1], [0.0, 1.0]])
        with pytest.raises(ValueError):
            NetParams(beta=1.0, gamma=0.5, populations=np.ones(2), mobility=M)

    def test_nonpositive_population_rejected(self):
        with pytest.raises(ValueError):
            NetParams(beta=1.0, gamma=0.5, populations=np.array([1.0, 0.0]),
                      mobility=np.eye(2))

    def test_immutable_arrays(self):
        p = NetParams(beta=1.0, gamma=0.5, populations=np.ones(2),
                      mobility=np.eye(2))
        with pytest.raises(ValueError):
            p.mobility[0, 0] = 0.5


class TestNetRhs:
    def test_disease_free_equilibrium(self):
        p = NetParams(beta=1.0, gamma=0.5, populations=np.full(3, 1 / 3),
                      mobility=chain_mobility(3, 0.01))
        y = np.concatenate([p.populations, np.zeros(3), np.zeros(3)])
        assert np.all(net_rhs(y, p) == 0.0)

    def test_identity_mobility_decouples(self):
        p = NetParams(beta=1.2, gamma=0.3, populations=np.array([0.4, 0.6]),
                      mobility=np.eye(2))
        S = np.array([0.3, 0.5])
        I = np.array([0.1, 0.05])
        R = np.array([0.0, 0.05])
        dy = net_rhs(np.concatenate([S, I, R]), p)
        for i in range(2):
            inf = p.beta * S[i] * I[i] / p.populations[i]
            assert dy[i] == pytest.approx(-inf, rel=1e-15)
            assert dy[2 + i] == pytest.approx(inf - p.gamma * I[i], rel=1e-15)
            assert dy[4 + i] == pytest.approx(p.gamma * I[i], rel=1e-15)

    def test_hand_evaluated_two_districts(self):
        # 40-digit scalar evaluation, frozen.
        p = NetParams(beta=1.0, gamma=0.5, populations=np.full(2, 0.5),
                      mobility=chain_mobility(2, 0.1))
        y = np.array([0.5 - 1e-6, 0.5, 1e-6, 0.0, 0.0, 0.0])
        expected = np.array([-8.999982e-7, -1.0e-7,
                             3.999982e-7, 1.0e-7,
                             5.0e-7, 0.0])
        np.testing.assert_allclose(net_rhs(y, p), expected, rtol=1e-12,
                                   atol=1e-24)

    def test_per_district_conservation(self):
        rng = np.random.default_rng(5)
        p = NetParams(beta=1.7, gamma=0.6, populations=np.full(5, 0.2),
                      mobility=chain_mobility(5, 0.2))
        for _ in range(100):
            y = rng.uniform(0.0, 0.2, 15)
            dy = net_rhs(y, p)
            for i in range(5):
                assert abs(math.fsum([dy[i], dy[5 + i], dy[10 + i]])) <= 1e-16


class TestStatesAndTrajectory:
    def test_agg_state_round_trip(self):
        s = AggState(0.5, 0.3, 0.1, 0.05, 0.05, 0.2)
        assert AggState.from_array(s.to_array()) == s
        assert s.p_I == pytest.approx(0.45)

    def test_net_state_round_trip(self):
        s = NetState(S=np.array([0.1, 0.2]), I=np.array([0.0, 0.01]),
                     R=np.array([0.0, 0.0]))
        r = NetState.from_array(s.to_array())
        np.testing.assert_array_equal(r.S, s.S)
        np.testing.assert_array_equal(r.I, s.I)
        np.testing.assert_array_equal(r.R, s.R)

    def test_make_net_initial_validates_seed(self):
        p = NetParams(beta=1.0, gamma=0.5, populations=np.full(3, 1 / 3),
                      mobility=chain_mobility(3, 0.01))
        with pytest.raises(ValueError):
            make_net_initial(p, 0, 1e-6)
        with pytest.raises(ValueError):
            make_net_initial(p, 1, 1.0)

    def test_trajectory_validation(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 3)))
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((3, 2)))
