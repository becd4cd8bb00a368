import numpy as np
import pytest
from scipy.stats import norm

from rcpolar.channel import ChannelParams, LlrDistribution
from rcpolar.construct import (build_repetition_plan, construct_rcp,
                               evaluate_bler)
from rcpolar.simulate import bler_monte_carlo, wilson_halfwidth


def _pe_ref(mean):
    # Independent error-probability evaluation for the Gaussian LLR model.
    return 0.5 if mean == 0 else float(norm.sf(np.sqrt(mean / 2.0)))


def test_plan_zero_repetitions():
    plan = build_repetition_plan([0, 2], [1.0, 3.0], 0, LlrDistribution(2.0))
    assert plan.r.size == 0
    assert np.array_equal(plan.updated_means, [1.0, 3.0])


def test_plan_single_repetition_hits_argmax():
    plan = build_repetition_plan([0, 2, 5], [3.0, 0.5, 4.0], 1,
                                 LlrDistribution(2.0))
    assert plan.r.tolist() == [2]  # smallest mean = largest pe
    assert plan.updated_means.tolist() == [3.0, 2.5, 4.0]


def test_plan_two_step_hand_simulation():
    # Two channels, pe_a > pe_b; one strong repetition pushes a's pe below
    # b's, so the second slot must go to b.  Every pe is re-derived here
    # with an independent Gaussian-tail evaluation.
    a_mean, b_mean, ch = 0.4, 1.0, 6.0
    assert _pe_ref(a_mean) > _pe_ref(b_mean)
    assert _pe_ref(a_mean + ch) < _pe_ref(b_mean)
    plan = build_repetition_plan([3, 7], [a_mean, b_mean], 2,
                                 LlrDistribution(ch))
    assert plan.r.tolist() == [3, 7]
    assert plan.updated_means == pytest.approx([a_mean + ch, b_mean + ch])
    assert plan.updated_pe == pytest.approx(
        [_pe_ref(a_mean + ch), _pe_ref(b_mean + ch)], rel=1e-9)


def test_plan_argmax_tie_prefers_smaller_index():
    plan = build_repetition_plan([4, 9], [1.0, 1.0], 1, LlrDistribution(2.0))
    assert plan.r.tolist() == [4]


def test_plan_requires_channels():
    with pytest.raises(ValueError):
        build_repetition_plan([], [], 1, LlrDistribution(2.0))


def test_plan_prefix_property():
    rng = np.random.default_rng(0)
    info = np.arange(6)
    means = rng.uniform(0.2, 4.0, size=6)
    short = build_repetition_plan(info, means, 5, LlrDistribution(1.5))
    long = build_repetition_plan(info, means, 9, LlrDistribution(1.5))
    assert np.array_equal(long.r[:5], short.r)
    assert np.array_equal(long.bler_trace[:6], short.bler_trace)


def test_plan_monotone_improvement():
    rng = np.random.default_rng(1)
    means = rng.uniform(0.1, 3.0, size=8)
    plan = build_repetition_plan(np.arange(8), means, 12, LlrDistribution(2.0))
    assert np.all(np.diff(plan.bler_trace) < 0)  # strictly decreasing sum
    # max pe over the set never increases step to step
    work = means.copy()
    prev_max = plan.bler_trace[0]  # placeholder, recomputed below
    cur_pe = np.array([_pe_ref(m) for m in work])
    for idx in plan.r:
        prev_max = cur_pe.max()
        work[idx] += 2.0
        cur_pe[idx] = _pe_ref(work[idx])
        assert cur_pe.max() <= prev_max + 1e-15


def test_evaluate_bler_trivial_cases():
    code, plan, bler = construct_rcp(8, 4, 8, LlrDistribution(200.0))
    assert bler == pytest.approx(plan.updated_pe.sum())
    assert bler < 1e-6
    # identical summands clip at 1
    code, plan, bler = construct_rcp(4, 4, 4, LlrDistribution(1e-9))
    assert bler == 1.0


def test_evaluate_bler_plan_mismatch():
    code, plan, _ = construct_rcp(10, 4, 8, LlrDistribution(2.0))
    other, _, _ = construct_rcp(12, 4, 8, LlrDistribution(2.0))
    with pytest.raises(ValueError):
        evaluate_bler(other, plan)


def test_construct_rate_one_degenerate():
    code, plan, bler = construct_rcp(4, 4, 4, LlrDistribution(2.0))
    assert code.n == 4 and code.m == 4 and code.spec.n0 == 4
    assert code.rep_vector.size == 0
    assert bler == pytest.approx(min(1.0, plan.updated_pe.sum()))
    assert code.spec.info_set.tolist() == [0, 1, 2, 3]


def test_construct_no_repetitions_when_n_equals_m():
    code, _, _ = construct_rcp(12, 5, 12, LlrDistribution(2.0))
    assert code.rep_vector.size == 0
    assert code.spec.n0 == 16
    assert code.spec.puncture_set.size == 4


def test_construct_validates_bounds():
    with pytest.raises(ValueError):
        construct_rcp(8, 6, 4, LlrDistribution(2.0))  # k > m
    with pytest.raises(ValueError):
        construct_rcp(6, 2, 8, LlrDistribution(2.0))  # m > n


def test_bler_estimate_nonincreasing_in_n():
    channel = LlrDistribution(2.0)
    estimates = [construct_rcp(n, 16, 32, channel)[2]
                 for n in (32, 40, 48, 64, 96)]
    assert all(b <= a + 1e-15 for a, b in zip(estimates, estimates[1:]))


def test_union_bound_upper_bounds_simulation():
    # Union-bound estimate vs simulated block error rate at three operating
    # points spanning moderate error rates.
    cases = [
        (72, 32, 64, 0.8),
        (48, 20, 32, 0.75),
        (128, 64, 128, 0.85),
    ]
    for n, k, m, sigma in cases:
        params = ChannelParams.from_sigma(sigma)
        result = bler_monte_carlo(n, k, m, params, trials=20_000, base_seed=7)
        slack = 2 * wilson_halfwidth(result["errors"], result["trials"])
        assert result["bler_analytic"] >= result["bler"] - slack, (n, k, m)


def test_union_bound_within_factor_three():
    # The estimate should be tight, not just valid: within 3x of simulation
    # at sigma = 0.9 and at a point with block error rate near 1e-2.
    for params in (ChannelParams.from_sigma(0.9), ChannelParams(snr_db=0.0)):
        result = bler_monte_carlo(72, 32, 64, params, trials=100_000,
                                  base_seed=8)
        ratio = result["bler_analytic"] / result["bler"]
        assert 1 / 3 < ratio < 3, (params.snr_db, ratio)
