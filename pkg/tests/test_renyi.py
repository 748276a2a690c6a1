import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PLUS, ZERO, bsc, h2, random_classical_channel, random_density
from listcap.capacity import arimoto_blahut
from listcap.core import Channel, DensityMatrix, ProbDist, divergences_to
from listcap.errors import InfiniteDivergence
from listcap.renyi import (
    ExponentQuery,
    log_phi,
    phi,
    phi_channel,
    phi_slope_check,
    sc_exponent,
    sc_exponent_curve,
)


def brute_exponent(W, sigma, rate, lo=-8.0, points=200_001):
    """Fine-grid oracle evaluated with explicit per-row sums."""
    s = np.linspace(lo, 0.0, points)
    best = np.zeros_like(s)
    for row in W.matrix:
        m = row > 0
        vals = (row[m][None, :] ** (1 - s[:, None]) * sigma.probs[m][None, :] ** s[:, None]).sum(axis=1)
        best = np.maximum(best, vals)
    obj = (-s * rate - np.log(best)) / (1 - s)
    i = int(np.argmax(obj))
    return obj[i], s[i]


class TestPhi:
    def test_s_zero(self, rng):
        a, b = ProbDist(rng.dirichlet(np.ones(4))), ProbDist(rng.dirichlet(np.ones(4)))
        assert phi(0.0, a, b) == 1.0
        qa, qb = DensityMatrix(random_density(rng, 3)), DensityMatrix(random_density(rng, 3))
        assert phi(0.0, qa, qb) == 1.0

    @pytest.mark.parametrize("s", [-3.0, -1.0, -0.2, 0.5])
    def test_equal_arguments(self, s):
        p = ProbDist([0.1, 0.2, 0.7])
        assert phi(s, p, p) == pytest.approx(1.0, abs=1e-14)

    def test_hand_value(self):
        assert phi(-1.0, ProbDist([1, 0]), ProbDist([0.5, 0.5])) == pytest.approx(2.0, abs=1e-15)

    def test_quantum_support(self):
        assert phi(-1.0, DensityMatrix(ZERO), DensityMatrix(PLUS)) == math.inf

    def test_quantum_positive_s_on_support(self):
        # Tr |0><0| |+><+|^s = 1/2 for s > 0
        assert phi(0.5, DensityMatrix(ZERO), DensityMatrix(PLUS)) == pytest.approx(0.5, abs=1e-12)

    def test_quantum_matrix_formula(self, rng):
        for _ in range(10):
            a, b = random_density(rng, 3), random_density(rng, 3)
            s = -0.7
            wa, va = np.linalg.eigh(a)
            wb, vb = np.linalg.eigh(b)
            direct = np.trace((va * wa ** (1 - s)) @ va.conj().T @ (vb * wb**s) @ vb.conj().T).real
            assert phi(s, DensityMatrix(a), DensityMatrix(b)) == pytest.approx(direct, rel=1e-10)

    def test_commuting_matches_classical(self, rng):
        for _ in range(10):
            a, b = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
            for s in (-2.0, -0.5):
                q = phi(s, DensityMatrix(np.diag(a)), DensityMatrix(np.diag(b)))
                assert q == pytest.approx(phi(s, ProbDist(a / a.sum()), ProbDist(b / b.sum())), rel=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(0.01, 1), min_size=3, max_size=3),
        st.lists(st.floats(0.01, 1), min_size=3, max_size=3),
        st.floats(-6, 0), st.floats(-6, 0),
    )
    def test_log_convex_and_positive(self, a, b, s1, s2):
        a, b = ProbDist(np.array(a) / sum(a)), ProbDist(np.array(b) / sum(b))
        mid = log_phi((s1 + s2) / 2, a, b)
        assert mid <= (log_phi(s1, a, b) + log_phi(s2, a, b)) / 2 + 1e-9
        assert phi(s1, a, b) > 0


class TestPhiChannel:
    def test_s_zero(self, bsc01, uniform2):
        assert phi_channel(0.0, bsc01, uniform2) == 1.0

    def test_bsc_hand(self, bsc01, uniform2):
        assert phi_channel(-1.0, bsc01, uniform2) == pytest.approx(0.9**2 / 0.5 + 0.1**2 / 0.5, abs=1e-14)

    def test_infinite(self, bsc01):
        assert phi_channel(-0.5, bsc01, ProbDist([1.0, 0.0])) == math.inf


class TestSlope:
    def test_noiseless(self):
        numeric, exact = phi_slope_check(Channel.classical_from(np.eye(2)), ProbDist([0.5, 0.5]), 1e-4)
        assert exact == pytest.approx(math.log(2), abs=1e-15)
        assert abs(numeric - exact) <= 1e-3

    def test_bsc(self, bsc01, uniform2):
        numeric, exact = phi_slope_check(bsc01, uniform2, 1e-4)
        assert exact == pytest.approx(math.log(2) - h2(0.1), abs=1e-12)
        assert abs(numeric - exact) <= 1e-3

    def test_sigma_equal_to_rows(self):
        # both inputs emit sigma
        W = Channel.classical_from([[0.3, 0.7], [0.3, 0.7]])
        numeric, exact = phi_slope_check(W, ProbDist([0.3, 0.7]), 1e-4)
        assert exact == 0.0 and numeric == pytest.approx(0.0, abs=1e-10)

    def test_infinite_divergence(self, bsc01):
        with pytest.raises(InfiniteDivergence):
            phi_slope_check(bsc01, ProbDist([1.0, 0.0]))

    def test_step_range(self, bsc01, uniform2):
        with pytest.raises(ValueError):
            phi_slope_check(bsc01, uniform2, 0.1)

    def test_first_order_error(self, bsc01, uniform2):
        errs = [abs(np.subtract(*phi_slope_check(bsc01, uniform2, h))) for h in (1e-2, 1e-3)]
        assert errs[1] < errs[0] / 5


class TestExponent:
    def test_below_capacity(self, bsc01, uniform2):
        res = sc_exponent(ExponentQuery(0.2), bsc01, uniform2)
        oracle, _ = brute_exponent(bsc01, uniform2, 0.2)
        assert oracle == 0.0
        assert res.exponent == 0.0 and res.s_star == 0.0

    def test_above_capacity(self, bsc01, uniform2):
        res = sc_exponent(ExponentQuery(0.6), bsc01, uniform2)
        oracle, s_oracle = brute_exponent(bsc01, uniform2, 0.6)
        assert res.exponent > 0
        assert res.exponent == pytest.approx(oracle, abs=1e-8)
        assert res.s_star == pytest.approx(s_oracle, abs=1e-3)

    def test_trace_rows(self, bsc01, uniform2):
        res = sc_exponent(ExponentQuery(0.6, grid_points=9), bsc01, uniform2)
        s_values = [r[0] for r in res.trace]
        assert s_values == sorted(s_values) and s_values[-1] == 0.0
        assert res.trace[-1][1:] == (1.0, 0.0)

    def test_infinite_grid(self, bsc01):
        res = sc_exponent(ExponentQuery(1.0), bsc01, ProbDist([1.0, 0.0]))
        assert res.exponent == 0.0 and res.s_star == 0.0

    def test_query_validation(self):
        with pytest.raises(ValueError):
            ExponentQuery(0.5, s_lo=0.0)
        with pytest.raises(ValueError):
            ExponentQuery(0.5, grid_points=2)

    def test_monotone_in_rate(self, rng):
        for _ in range(5):
            W = random_classical_channel(rng, 4, 4)
            sigma = arimoto_blahut(W).sigma_star
            curve = sc_exponent_curve(np.linspace(0.05, 2.0, 25), W, sigma, grid_points=65)
            assert np.all(curve >= 0)
            assert np.all(np.diff(curve) >= -1e-12)

    def test_positive_above_max_divergence(self, rng):
        for _ in range(10):
            W = random_classical_channel(rng, 4, 4)
            sigma = ProbDist(rng.dirichlet(np.ones(W.out_dim)))
            dmax = divergences_to(W, sigma).max()
            assert sc_exponent(ExponentQuery(dmax + 1e-3), W, sigma).exponent > 0

    def test_relabel_invariance(self, rng):
        W = random_classical_channel(rng, 5, 4)
        sigma = arimoto_blahut(W).sigma_star
        perm = rng.permutation(W.n_inputs)
        a = sc_exponent(ExponentQuery(0.9), W, sigma)
        b = sc_exponent(ExponentQuery(0.9), W.relabel(perm), sigma)
        assert (a.exponent, a.s_star) == (b.exponent, b.s_star)

    def test_cq_two_pure_states(self):
        W = Channel.cq_from([ZERO, PLUS])
        cap = arimoto_blahut(W, tol=1e-9)
        above = sc_exponent(ExponentQuery(cap.value + 0.2), W, cap.sigma_star)
        at = sc_exponent(ExponentQuery(cap.value), W, cap.sigma_star)
        assert above.exponent > 0
        assert at.exponent <= 1e-6
