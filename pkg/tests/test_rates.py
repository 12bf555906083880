"""Rate formulas, bounds, the gap maximizer, and the size-change decomposition."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomasim import (
    DofSplit,
    PowerSplit,
    RateReport,
    cluster_size_rate_delta,
    extend_split,
    jain_index,
    noma_sum_rate,
    noma_user_rate,
    noma_user_rates,
    oma_optimal_dof,
    oma_sum_rate,
    oma_sum_upper_bound,
    oma_user_rates,
    optimal_dof_fractions,
    sic_feasibility_check,
    two_user_gap,
    two_user_gap_maximizer,
)


def random_instance(rng, size):
    g = np.sort(10.0 ** rng.uniform(-1, 3, size))[::-1]
    w = rng.dirichlet(np.ones(size))
    return g, w


# reusable hypothesis strategy: a few gains with wide dynamic range
gains_strategy = st.lists(
    st.floats(min_value=1e-3, max_value=1e6, allow_nan=False), min_size=2, max_size=6
).map(lambda xs: np.sort(np.asarray(xs))[::-1])


class TestSplitTypes:
    def test_power_split_accepts_partial_budget(self):
        w = PowerSplit([0.2, 0.3])
        assert len(w) == 2
        assert w.coefficients.flags.writeable is False

    @pytest.mark.parametrize("bad", [[-0.1, 0.5], [0.8, 0.8], [1.2], []])
    def test_power_split_rejects_bad_shares(self, bad):
        with pytest.raises(ValueError):
            PowerSplit(bad)

    @pytest.mark.parametrize("bad", [[0.4, 0.4], [0.6, 0.6], [-0.2, 1.2]])
    def test_dof_split_must_partition_unit(self, bad):
        with pytest.raises(ValueError):
            DofSplit(bad)

    def test_rate_report_from_rates(self):
        rep = RateReport.from_rates([1.0, 3.0])
        assert rep.sum_bps_hz == pytest.approx(4.0)
        assert rep.jain == pytest.approx(0.8)


class TestSuperpositionRates:
    def test_single_user_full_power(self):
        assert noma_user_rate([321.0, 1.0], [1.0, 0.0], 0) == pytest.approx(math.log2(322.0))

    def test_zero_share_zero_rate(self):
        assert noma_user_rate([10.0, 5.0], [1.0, 0.0], 1) == 0.0

    def test_second_user_sees_first_as_interference(self):
        # w*g/(1 + g*w_prev) = 0.5/1.5 with unit gain
        assert noma_user_rate([4.0, 1.0], [0.5, 0.5], 1) == pytest.approx(math.log2(4.0 / 3.0))

    def test_user_index_bounds(self):
        with pytest.raises(ValueError):
            noma_user_rate([4.0, 1.0], [0.5, 0.5], 2)

    def test_sum_is_total_of_users(self):
        g = np.array([50.0, 8.0, 2.0])
        w = np.array([0.1, 0.3, 0.6])
        assert noma_sum_rate(g, w) == pytest.approx(noma_user_rates(g, w).sum())

    @given(gains_strategy, st.data())
    @settings(max_examples=60, deadline=None)
    def test_sum_rate_never_below_single_stream_bound(self, g, data):
        w = np.asarray(data.draw(st.lists(
            st.floats(min_value=0.0, max_value=1.0), min_size=g.size, max_size=g.size)))
        total = w.sum()
        if total == 0:
            w = np.full(g.size, 1.0 / g.size)
        else:
            w = w / total
        assert noma_sum_rate(g, w) >= np.log2(1.0 + (w * g).sum()) - 1e-9


class TestOrthogonalRates:
    def test_zero_fraction_contributes_nothing(self):
        rates = oma_user_rates([9.0, 9.0], [0.5, 0.5], [1.0, 0.0])
        assert rates[1] == 0.0

    def test_full_fraction_matches_superposed_single_user(self):
        g = [33.0, 1.0]
        assert oma_user_rates(g, [1.0, 0.0], [1.0, 0.0])[0] == pytest.approx(
            noma_user_rate(g, [1.0, 0.0], 0)
        )

    def test_half_fraction_direct_value(self):
        # 0.5*log2(1 + 3/0.5)
        rates = oma_user_rates([6.0, 6.0], [0.5, 0.5], [0.5, 0.5])
        assert rates[0] == pytest.approx(0.5 * math.log2(7.0))

    def test_optimal_fractions_follow_received_power(self):
        lam = oma_optimal_dof([10.0, 5.0], [1.0 / 3.0, 2.0 / 3.0]).fractions
        np.testing.assert_allclose(lam, [0.5, 0.5], atol=1e-12)
        lam = oma_optimal_dof([10.0, 5.0], [1.0, 0.0]).fractions
        np.testing.assert_allclose(lam, [1.0, 0.0], atol=1e-12)

    def test_all_zero_power_gives_uniform_fractions(self):
        lam = oma_optimal_dof([10.0, 5.0], [0.0, 0.0]).fractions
        np.testing.assert_allclose(lam, [0.5, 0.5])

    def test_optimal_fractions_attain_the_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            g, w = random_instance(rng, 4)
            bound = oma_sum_upper_bound(g, w)
            attained = oma_sum_rate(g, w, optimal_dof_fractions(g, w))
            assert attained == pytest.approx(bound, abs=1e-9)
            sampled = oma_sum_rate(g, w, rng.dirichlet(np.ones(4), size=2000))
            assert sampled.max() <= bound + 1e-9

    def test_bound_zero_when_gains_vanish(self):
        assert oma_sum_upper_bound([0.0, 0.0], [0.5, 0.5]) == 0.0


class TestSicFeasibility:
    def test_sorted_gains_always_feasible(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            g, w = random_instance(rng, 5)
            assert sic_feasibility_check(g, w).feasible

    def test_reversed_gains_can_break_decoding(self):
        report = sic_feasibility_check([0.5, 5.0], [0.2, 0.8])
        assert not report.feasible
        assert np.nanmin(report.margins) < 0

    def test_equal_gains_make_margins_vanish(self):
        report = sic_feasibility_check([3.0, 3.0, 3.0], [0.2, 0.3, 0.5])
        finite = report.margins[np.isfinite(report.margins)]
        np.testing.assert_allclose(finite, 0.0, atol=1e-12)
        assert report.feasible

    def test_margin_layout_is_strict_upper_triangle(self):
        report = sic_feasibility_check([9.0, 3.0], [0.4, 0.6])
        assert np.isnan(report.margins[1, 0]) and np.isnan(report.margins[0, 0])
        assert np.isfinite(report.margins[0, 1])


class TestTwoUserGap:
    def test_vanishes_at_split_edges(self):
        g = np.array([50.0, 3.0])
        assert two_user_gap(g, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert two_user_gap(g, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_positive_between_edges(self):
        assert two_user_gap(np.array([50.0, 3.0]), 0.3) > 0

    def test_maximizer_reference_values(self):
        assert two_user_gap_maximizer(321.0) == pytest.approx(0.053, abs=1e-3)
        assert two_user_gap_maximizer(3.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert two_user_gap_maximizer(1e-8) == pytest.approx(0.5, abs=1e-4)

    def test_maximizer_stays_below_half(self):
        x = 10.0 ** np.linspace(-6, 8, 50)
        out = two_user_gap_maximizer(x)
        assert np.all((out > 0) & (out < 0.5))

    @pytest.mark.parametrize("bad", [0.0, -2.0, math.inf])
    def test_maximizer_rejects_bad_input(self, bad):
        with pytest.raises(ValueError):
            two_user_gap_maximizer(bad)

    def test_grid_argmax_matches_closed_form(self):
        rng = np.random.default_rng(17)
        grid = np.linspace(0.0, 1.0, 10001)
        for _ in range(25):
            g = np.sort(10.0 ** rng.uniform(-1, 3, 2))[::-1]
            gaps = two_user_gap(g, grid)
            assert abs(grid[np.argmax(gaps)] - two_user_gap_maximizer(g[0])) <= grid[1]


class TestClusterGrowth:
    def test_extend_split_scales_then_appends(self):
        out = extend_split([0.2, 0.8], 1.0 / 3.0).coefficients
        np.testing.assert_allclose(out, [0.2 * 2 / 3, 0.8 * 2 / 3, 1.0 / 3.0], rtol=1e-12)

    def test_extend_split_fraction_bounds(self):
        with pytest.raises(ValueError):
            extend_split([1.0], 1.5)

    def test_equal_gains_leave_rate_unchanged(self):
        d = cluster_size_rate_delta([2.0, 2.0, 2.0], [0.4, 0.6], extend_split([0.4, 0.6], 0.25))
        assert d.delta == pytest.approx(0.0, abs=1e-12)
        for f in (d.head_factor, d.chain_factor, d.tail_factor):
            assert f == pytest.approx(1.0, rel=1e-12)

    def test_single_user_base_case(self):
        d = cluster_size_rate_delta([5.0, 1.0], [1.0], extend_split([1.0], 0.3))
        assert d.head_factor == 1.0 and d.chain_factor == 1.0
        assert d.delta <= 1e-12

    def test_growth_never_helps_under_domination(self):
        rng = np.random.default_rng(23)
        for _ in range(400):
            size = int(rng.integers(1, 6))
            g = np.sort(10.0 ** rng.uniform(-1, 3, size + 1))[::-1]
            w = rng.dirichlet(np.ones(size))
            d = cluster_size_rate_delta(g, w, extend_split(w, float(rng.uniform(0, 1))))
            assert d.delta <= 1e-12
            assert max(d.head_factor, d.chain_factor, d.tail_factor) <= 1 + 1e-12
            assert d.delta == pytest.approx(d.delta_factored, abs=1e-9)

    def test_raising_an_existing_share_is_rejected(self):
        with pytest.raises(ValueError):
            cluster_size_rate_delta([4.0, 2.0, 1.0], [0.5, 0.5], [0.6, 0.2, 0.2])

    def test_split_lengths_must_differ_by_one(self):
        with pytest.raises(ValueError):
            cluster_size_rate_delta([4.0, 2.0], [0.5, 0.5], [0.3, 0.3, 0.4])


class TestDominance:
    @given(gains_strategy, st.integers(0, 2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_superposition_beats_best_orthogonal_split(self, g, seed):
        w = np.random.default_rng(seed).dirichlet(np.ones(g.size))
        noma = noma_sum_rate(g, w)
        oma = oma_sum_rate(g, w, optimal_dof_fractions(g, w))
        assert noma >= oma - 1e-9


class TestJainIndex:
    def test_equal_rates_hit_one(self):
        assert jain_index([2.5, 2.5, 2.5]) == pytest.approx(1.0, rel=1e-12)

    def test_single_active_user_hits_floor(self):
        assert jain_index([0.0, 0.0, 7.0]) == pytest.approx(1.0 / 3.0)

    def test_direct_value(self):
        assert jain_index([1.0, 3.0]) == pytest.approx(0.8)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            jain_index([0.0, 0.0])

    def test_equalizing_split_reaches_one(self):
        # bisect the two-user split until both rates match, fairness peaks there
        g = np.array([8.0, 2.0])
        lo, hi = 0.0, 1.0
        for _ in range(80):
            w1 = (lo + hi) / 2
            r = noma_user_rates(g, [w1, 1 - w1])
            lo, hi = (w1, hi) if r[0] < r[1] else (lo, w1)
        assert jain_index(noma_user_rates(g, [w1, 1 - w1])) == pytest.approx(1.0, abs=1e-9)
