import numpy as np
import pytest

from oamrs.baselines import (
    BaselineKind,
    _NomaProblem,
    _noma_optimize,
    evaluate_noma,
    evaluate_sdma,
    evaluate_tdma,
    noma_rates,
    single_user_capacity,
)
from oamrs.fp import FpConfig, PairProblem, optimize_pair
from oamrs.geometry import ChannelMatrix
from oamrs.harness import build_scenario, preset_case
from oamrs.metrics import ModeCase, report_from_channels
from oamrs.signal import RsPrecoder

TOY_CASE = ModeCase("toy", (1,), 1, 1, (1.0,))
TOY_HA = np.array([[1.0 + 0j]])
TOY_HB = np.array([[0.5 + 0j]])
TOY_NOISE = 0.1


def small_scenario():
    return build_scenario(case=preset_case(1))


def sdma_grid_oracle(step=0.01):
    best = -1.0
    for pa in np.arange(0.0, 1.0 + step / 2, step):
        pb = np.sqrt(max(1.0 - pa * pa, 0.0))
        rep = report_from_channels(TOY_HA, TOY_HB,
                                   RsPrecoder([[pa]], [[pb]], [[0.0]]),
                                   TOY_NOISE, TOY_CASE)
        best = max(best, rep.sum)
    return best


class TestBaselineKind:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            BaselineKind("ofdma")

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            BaselineKind("tdma", tdma_fractions=(0.7, 0.7))

    def test_valid(self):
        assert BaselineKind("noma").noma_strong_decodes_last


class TestSdma:
    def test_toy_matches_restricted_oracle(self):
        prob = PairProblem(TOY_HA, TOY_HB, TOY_CASE, noise_power=TOY_NOISE,
                           power_budget=1.0, enable_common=False)
        _, report = optimize_pair(prob, FpConfig(restart_count=5))
        assert report.sum == pytest.approx(sdma_grid_oracle(), rel=0.02)

    def test_zero_channels(self):
        prob = PairProblem(np.zeros((1, 1)), np.zeros((1, 1)), TOY_CASE,
                           noise_power=TOY_NOISE, power_budget=1.0,
                           enable_common=False)
        _, report = optimize_pair(prob, FpConfig())
        assert report.sum == 0.0

    def test_never_beats_rate_splitting(self):
        rng = np.random.default_rng(6)
        for _ in range(3):
            h_a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            h_b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            case = ModeCase("rand", (1,), 2, 2, (2.0, 2.0))
            kwargs = dict(noise_power=0.2, power_budget=1.0)
            _, rs = optimize_pair(
                PairProblem(h_a, h_b, case, **kwargs),
                FpConfig(restart_count=3, warm_start=True))
            _, sdma = optimize_pair(
                PairProblem(h_a, h_b, case, enable_common=False, **kwargs),
                FpConfig(restart_count=3))
            assert sdma.sum <= rs.sum + 1e-6

    def test_common_precoder_stays_zero(self):
        scenario = small_scenario()
        state, report = evaluate_sdma(scenario.pairs[0], scenario,
                                      FpConfig(max_outer_iterations=30))
        assert np.all(state.precoder.common == 0.0)
        assert report.common_pair == 0.0


class TestNoma:
    def test_toy_matches_power_split_oracle(self):
        # 1-D sweep over the weak-user power fraction, step 0.001
        gw, gs = 0.25, 1.0
        best = -1.0
        for t in np.arange(0.0, 1.0 + 5e-4, 0.001):
            gam_w = gw * t / (TOY_NOISE + gw * (1.0 - t))
            gam_s = gs * (1.0 - t) / TOY_NOISE
            best = max(best, float(np.log2(1 + gam_w) + np.log2(1 + gam_s)))
        prob = _NomaProblem(TOY_HB, TOY_HA, (1.0,), (1.0,), TOY_NOISE, 1.0)
        p_w, p_s, _, converged, _ = _noma_optimize(prob, FpConfig(restart_count=5))
        assert converged
        rate_w, rate_s = noma_rates(prob, p_w, p_s)
        assert rate_w + rate_s == pytest.approx(best, rel=0.02)

    def test_strong_user_denominator_ignores_weak_precoder(self):
        prob = _NomaProblem(TOY_HB, TOY_HA, (1.0,), (1.0,), TOY_NOISE, 1.0)
        p_s = np.array([[0.6 + 0j]])
        _, (_, b_small) = prob.ratio_terms(np.array([[0.1 + 0j]]), p_s)
        _, (_, b_large) = prob.ratio_terms(np.array([[0.9 + 0j]]), p_s)
        assert np.allclose(b_small, b_large)

    def test_symmetric_channels_symmetric_rates(self):
        prob = _NomaProblem(TOY_HA, TOY_HA, (1.0,), (1.0,), TOY_NOISE, 1.0)
        p = np.array([[np.sqrt(0.5) + 0j]])
        # post-SIC asymmetry aside, equal splits give the strong branch the
        # interference-free rate of the same channel
        rate_w, rate_s = noma_rates(prob, p, p)
        gam = 0.5 / TOY_NOISE
        assert rate_s == pytest.approx(np.log2(1 + gam), rel=1e-12)
        assert rate_w == pytest.approx(np.log2(1 + 0.5 / (TOY_NOISE + 0.5)), rel=1e-12)

    def test_zero_channels(self):
        prob = _NomaProblem(np.zeros((1, 1)), np.zeros((1, 1)), (1.0,), (1.0,),
                            TOY_NOISE, 1.0)
        p_w, p_s, _, converged, _ = _noma_optimize(prob, FpConfig())
        assert converged
        assert sum(noma_rates(prob, p_w, p_s)) == 0.0

    def test_evaluate_on_scenario(self):
        scenario = small_scenario()
        (trace, converged, iterations), report = evaluate_noma(
            scenario.pairs[0], scenario, FpConfig(max_outer_iterations=60))
        assert report.sum == pytest.approx(report.private_a + report.private_b)
        assert report.common_pair == 0.0
        assert len(trace) == iterations + 1


class TestTdma:
    def test_single_user_capacity_scalar(self):
        cap = single_user_capacity(ChannelMatrix(TOY_HA), (1.0,), 1, TOY_NOISE, 1.0)
        assert cap == pytest.approx(np.log2(1 + 1.0 / TOY_NOISE), rel=1e-12)

    def test_all_time_to_user_a(self):
        scenario = small_scenario()
        report = evaluate_tdma(scenario.pairs[0], scenario, fractions=(1.0, 0.0))
        assert report.private_b == 0.0
        assert report.private_a > 0.0

    def test_equal_split_identical_receivers(self):
        scenario = small_scenario()
        pair = scenario.pairs[0]
        full_a = evaluate_tdma(pair, scenario, fractions=(1.0, 0.0)).private_a
        half = evaluate_tdma(pair, scenario, fractions=(0.5, 0.5))
        assert half.private_a == pytest.approx(full_a / 2)

    def test_fractions_must_sum_to_one(self):
        scenario = small_scenario()
        with pytest.raises(ValueError):
            evaluate_tdma(scenario.pairs[0], scenario, fractions=(0.6, 0.6))

    def test_uniform_split_is_exact_for_equal_gains(self):
        # harness channels have constant |h|, so the uniform allocation used
        # by single_user_capacity is the true optimum of the symmetric problem
        scenario = small_scenario()
        pair = scenario.pairs[0]
        from oamrs.metrics import pair_channels, resolve_tau

        h_a, _ = pair_channels(pair, scenario.propagation)
        mags = np.abs(h_a.entries)
        assert np.allclose(mags, mags[0, 0])
