#!/usr/bin/env python3
"""
Tests for the Monte Carlo tail probes.
"""

import math
import os
import sys

import numpy as np
import pytest
from scipy import stats

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.application.probes import (
    PROBES,
    default_m_grid,
    probe_berry_esseen_lemma,
    probe_chi_square_tail,
    probe_column_event_l2,
    probe_l1_column_tail,
    probe_l1_superposition_tail,
    probe_l2_superposition_tail,
    probe_ngl1_mgf,
    probe_subgaussian_shift,
)
from src.domain.errors import ParameterError
from src.domain.models import ProbeReport


class TestProbeReport:
    """Report invariants shared by every probe."""

    def test_probability_outside_unit_interval(self):
        with pytest.raises(ParameterError):
            ProbeReport("x", {}, 10, 0, 1.5, 0.0)

    def test_zero_trials(self):
        with pytest.raises(ParameterError):
            ProbeReport("x", {}, 0, 0, 0.5, 0.0)

    def test_vacuous_bound_is_not_informative(self):
        report = ProbeReport("x", {}, 10, 0, 0.5, 0.1, bounds={"b": 2.0}, primary_bound="b", passed=True)
        assert report.vacuous
        assert not report.informative_pass

    def test_pass_recomputable(self):
        report = ProbeReport("x", {}, 100, 0, 0.3, 0.05, bounds={"b": 0.2}, primary_bound="b")
        assert report.recompute_pass()
        report.statistic = 0.36
        assert not report.recompute_pass()

    def test_strict_report_has_no_slack(self):
        report = ProbeReport("x", {}, 100, 0, 0.21, 0.05, bounds={"b": 0.2}, primary_bound="b",
                             is_probability=False, slack_se=0.0)
        assert not report.recompute_pass()
        report.statistic = 0.2
        assert report.recompute_pass()


class TestChiSquareTail:
    """Column energy concentration."""

    def test_passes_chernoff(self):
        report = probe_chi_square_tail(64, 0.5, 20000, seed=1)
        assert report.bounds["chernoff"] == pytest.approx(0.0971, abs=1e-4)
        assert report.statistic < 0.02
        assert report.passed
        assert report.passed == report.recompute_pass()
        assert report.standard_error == pytest.approx(
            math.sqrt(report.statistic * (1 - report.statistic) / 20000))

    def test_chernoff_holds_on_grid(self):
        for m in (50, 64, 200):
            for delta in (0.3, 0.5):
                report = probe_chi_square_tail(m, delta, 100000, seed=m, threads=2)
                assert report.statistic <= report.bounds["chernoff"] + 3 * report.standard_error
                assert report.passed
                assert any("m delta^2/4" in note for note in report.notes)

    def test_reports_both_simplifications(self):
        report = probe_chi_square_tail(64, 0.5, 1000, seed=1)
        assert report.bounds["simplified_m_delta2_over_4"] == pytest.approx(2 * math.exp(-4))
        assert report.bounds["corrected_m_delta2_over_8"] == pytest.approx(2 * math.exp(-2))

    def test_far_tail(self):
        report = probe_chi_square_tail(64, 0.99, 20000, seed=2)
        assert report.statistic < 1e-3
        assert report.passed

    def test_deterministic_and_thread_independent(self):
        first = probe_chi_square_tail(64, 0.5, 40000, seed=3, threads=1)
        second = probe_chi_square_tail(64, 0.5, 40000, seed=3, threads=3)
        assert first.to_dict() == second.to_dict()

    def test_rejects_delta(self):
        with pytest.raises(ParameterError):
            probe_chi_square_tail(64, 1.0, 100, seed=0)


class TestSuperpositionTails:
    """Lower tails of ||Hb|| for the binding all-ones b."""

    def test_l2_near_zero_event(self):
        report = probe_l2_superposition_tail(50, 4, 1, 0.5, 20000, seed=4)
        assert report.bounds["chernoff_superposition"] == pytest.approx(1.2e-20, rel=0.05)
        assert report.statistic == 0.0
        assert report.passed
        assert any("near-zero" in note for note in report.notes)

    def test_l2_bound_decreases_in_k(self):
        small = probe_l2_superposition_tail(20, 2, 1, 0.5, 100, seed=0)
        large = probe_l2_superposition_tail(20, 8, 1, 0.5, 100, seed=0)
        assert large.bounds["chernoff_superposition"] < small.bounds["chernoff_superposition"]

    def test_l2_uniform_pattern_reported(self):
        report = probe_l2_superposition_tail(10, 2, 2, 0.9, 5000, seed=5)
        assert 0.0 <= report.extra["uniform_pattern_rate"] <= 1.0
        assert report.passed

    def test_l1_chernoff_route(self):
        report = probe_l1_superposition_tail(40, 4, 1, 0.5, 20000, seed=6)
        assert report.extra["route"] == "chernoff"
        assert math.log(report.bounds["chernoff_superposition"]) == pytest.approx(40 * (1 - math.log(2 * math.pi)))
        assert report.passed

    def test_l1_bound_increases_in_delta(self):
        low = probe_l1_superposition_tail(40, 4, 1, 0.3, 100, seed=0)
        high = probe_l1_superposition_tail(40, 4, 1, 0.6, 100, seed=0)
        assert low.bounds["chernoff_superposition"] < high.bounds["chernoff_superposition"]

    def test_l1_subgaussian_route(self):
        report = probe_l1_superposition_tail(16, 1, 1, 0.5, 20000, seed=7)
        assert report.extra["route"] == "subgaussian route"
        assert report.extra["c2"] > 0
        assert report.passed


class TestL1ColumnTail:
    """Scaled Gaussian l1 concentration with a fitted exponential rate."""

    def test_default_grid(self):
        assert default_m_grid(100) == [25, 50, 100]

    def test_geometric_decay(self):
        report = probe_l1_column_tail(100, 0.3, 20000, seed=8)
        assert report.extra["m_grid"] == [25, 50, 100]
        assert report.extra["decreasing"]
        assert report.extra["c2"] > 0
        assert report.passed

    def test_zero_threshold(self):
        report = probe_l1_column_tail(50, 0.0, 2000, seed=9)
        assert report.statistic > 0.99


class TestMgfAndBerryEsseen:
    """Anti-concentration of weighted half-Gaussian sums."""

    def test_mgf_vacuous_at_small_k(self):
        report = probe_ngl1_mgf(16, 1, 1.0, 2000, seed=10)
        assert report.bounds["mgf_half_gaussian"] == pytest.approx(6.4233, abs=1e-3)
        assert report.vacuous
        assert not report.informative_pass

    def test_mgf_informative_at_large_k(self):
        report = probe_ngl1_mgf(10000, 1, 1.0, 500, seed=11)
        assert report.bounds["mgf_half_gaussian"] == pytest.approx(0.27303, abs=1e-4)
        assert report.statistic <= report.bounds["mgf_half_gaussian"]
        assert report.informative_pass
        assert "balanced_mean" in report.extra and "uniform_mean" in report.extra

    def test_mgf_pass_uses_bare_bound(self):
        report = probe_ngl1_mgf(10000, 1, 1.0, 200, seed=11)
        assert report.slack_se == 0.0
        assert report.passed == (report.statistic <= report.bounds["mgf_half_gaussian"])

    def test_berry_esseen_bound_values(self):
        small = probe_berry_esseen_lemma(4, 1, 1.0, 1000, seed=12)
        assert small.bounds["berry_esseen"] == pytest.approx(9.6849, abs=1e-3)
        assert small.vacuous
        large = probe_berry_esseen_lemma(10 ** 6, 1, 1.0, 4, seed=12, pattern="balanced")
        assert large.bounds["berry_esseen"] == pytest.approx(0.021348, abs=1e-5)

    def test_berry_esseen_at_a_million(self):
        report = probe_berry_esseen_lemma(10 ** 6, 1, 1.0, 10000, seed=21, threads=4)
        bound = report.bounds["berry_esseen"]
        assert report.statistic <= bound + 3 * report.standard_error
        assert report.passed
        assert report.informative_pass
        # sd of the balanced sum is sqrt(k (1 - 2/pi)) ~ 603, so the rate sits near 0.009
        assert report.extra["balanced_rate"] < 0.015
        assert report.extra["uniform_rate"] < 0.015

    def test_uniform_stratum_is_gaussian(self):
        # t = 1 with uniform signs: the sum is N(0, k)
        k, trials = 100, 20000
        report = probe_berry_esseen_lemma(k, 1, 1.0, trials, seed=22, pattern="uniform")
        expected = 2 * stats.norm.cdf(math.log(math.sqrt(k)) / math.sqrt(k)) - 1
        assert abs(report.statistic - expected) <= 4 * math.sqrt(expected * (1 - expected) / trials)

    def test_balanced_stratum_matches_direct_sampling(self):
        k, trials = 6, 40000
        report = probe_berry_esseen_lemma(k, 1, 1.0, trials, seed=23, pattern="balanced")
        rng = np.random.default_rng(23)
        signs = np.array([1, -1, 1, -1, 1, -1])
        sums = np.abs(rng.standard_normal((trials, k))) @ signs
        direct = np.count_nonzero(np.abs(sums) < math.log(math.sqrt(k))) / trials
        assert abs(report.statistic - direct) <= 5 * math.sqrt(2 * direct * (1 - direct) / trials)

    def test_berry_esseen_thread_independent(self):
        first = probe_berry_esseen_lemma(5000, 2, 1.0, 3000, seed=24, threads=1)
        second = probe_berry_esseen_lemma(5000, 2, 1.0, 3000, seed=24, threads=3)
        assert first.to_dict() == second.to_dict()

    def test_berry_esseen_empty_event(self):
        report = probe_berry_esseen_lemma(16, 1, 0.0, 1000, seed=13)
        assert report.statistic == 0.0

    def test_unknown_pattern(self):
        with pytest.raises(ParameterError):
            probe_ngl1_mgf(16, 1, 1.0, 10, seed=0, pattern="sparse")


class TestSubgaussianShift:
    """Centering a half-Gaussian keeps it subgaussian."""

    def test_domination_and_mean(self):
        report = probe_subgaussian_shift(200000, seed=14)
        assert report.bounds["c4"] > 0
        assert report.bounds["c4"] == pytest.approx(report.bounds["c2"] / 2)
        assert report.extra["dominated"]
        assert report.extra["shifted_tail"][-1] == pytest.approx(0.0, abs=1e-4)
        assert abs(report.statistic) <= 4 * report.standard_error

    def test_grid_validation(self):
        with pytest.raises(ParameterError):
            probe_subgaussian_shift(100, seed=0, grid=[1.0])


class TestColumnEvent:
    """Every column of a Gaussian matrix inside the delta band."""

    def test_union_bound_holds(self):
        report = probe_column_event_l2(64, 10, 0.5, 5000, seed=15)
        assert report.bounds["column_union"] == pytest.approx(0.971, abs=1e-3)
        assert report.passed
        assert report.informative_pass

    def test_registry(self):
        assert set(PROBES) == {
            "chi_square_tail", "l2_superposition_tail", "l1_column_tail", "l1_superposition_tail",
            "ngl1_mgf", "berry_esseen_lemma", "subgaussian_shift", "column_event_l2",
        }


if __name__ == '__main__':
    pytest.main([__file__])
