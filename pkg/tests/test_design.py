import numpy as np
import pytest

from rcpolar.channel import LlrDistribution
from rcpolar.design import (BLER_FLOOR, HarqScheme, build_bler_curve,
                            design_scheme, scheme_cost_profile,
                            throughput_estimate)

from oracles import throughput_reference

CHANNEL = LlrDistribution(mean=2.0)  # sigma = 1


def test_throughput_single_transmission_collapse():
    for e1 in (0.0, 0.3, 0.9):
        assert throughput_estimate(16, [40], [e1]) == pytest.approx(
            16 * (1 - e1) / 40)


def test_throughput_error_free_first_round():
    assert throughput_estimate(8, [10, 20, 30], [0.0, 0.0, 0.0]) == pytest.approx(0.8)


def test_throughput_worked_example():
    eta = throughput_estimate(1024, [1100, 1200], [0.5, 0.1])
    assert eta == pytest.approx(921.6 / 1150)


def test_throughput_matches_reference_evaluator():
    rng = np.random.default_rng(0)
    for _ in range(200):
        t = int(rng.integers(1, 6))
        lengths = np.cumsum(rng.integers(5, 50, size=t))
        blers = np.sort(rng.uniform(0, 1, size=t))[::-1]
        ours = throughput_estimate(12, lengths, blers)
        ref = throughput_reference(12, lengths, blers)
        assert ours == pytest.approx(ref, rel=1e-12)


def test_throughput_validates_monotonicity():
    with pytest.raises(ValueError):
        throughput_estimate(8, [10, 10], [0.5, 0.1])
    with pytest.raises(ValueError):
        throughput_estimate(8, [10, 20], [0.1, 0.5])
    with pytest.raises(ValueError):
        throughput_estimate(8, [10, 20], [0.5, 1.5])


def test_curve_floor_and_monotonicity():
    curve = build_bler_curve(8, 16, 200, LlrDistribution(30.0))
    assert np.all(curve.e >= BLER_FLOOR)
    assert np.all(np.diff(curve.e) <= 0)
    assert curve.e.size == 200 - 16 + 1
    assert curve.pr_e(16) == curve.e[0]
    with pytest.raises(ValueError):
        curve.pr_e(201)


def test_design_single_candidate():
    scheme = design_scheme(6, 1, 6, CHANNEL)
    assert scheme.s == (6, 6)


def test_design_t1_matches_exhaustive_search():
    k, q = 8, 16
    scheme = design_scheme(k, 1, q, CHANNEL)

    best = None  # (eta, m, n), scanned in the same tie-break order
    for m in range(k, q + 1):
        curve = build_bler_curve(k, m, q, CHANNEL)
        for n in range(m, q + 1):
            eta = k * (1.0 - curve.pr_e(n)) / n
            if best is None or eta > best[0]:
                best = (eta, m, n)
    assert scheme.s == (best[1], best[2])
    assert scheme.eta_estimate == pytest.approx(best[0])


def test_design_t2_beats_constrained_exhaustive():
    # The greedy two-round result must reach the optimum over all schemes
    # that extend the best single-length pick for the same m.
    k, q = 8, 20
    scheme = design_scheme(k, 2, q, CHANNEL)

    best = 0.0
    for m in range(k, q + 1):
        curve = build_bler_curve(k, m, q, CHANNEL)
        first = max(range(m, q + 1),
                    key=lambda n: (k * (1.0 - curve.pr_e(n)) / n, -n))
        for n2 in range(m, q + 1):
            if n2 == first:
                continue
            lengths = sorted([first, n2])
            blers = [curve.pr_e(lengths[0]), min(curve.pr_e(lengths[0]),
                                                 curve.pr_e(lengths[1]))]
            eta = throughput_estimate(k, lengths, blers)
            best = max(best, eta)
        best = max(best, k * (1.0 - curve.pr_e(first)) / first)
    assert scheme.eta_estimate >= best - 1e-12


def test_candidate_scan_matches_direct_evaluation():
    # The incremental candidate scan must agree with evaluating the full
    # throughput formula on every sorted candidate set.
    from rcpolar.design import _scan_candidates
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = int(rng.integers(2, 10))
        m = int(rng.integers(k, k + 8))
        q = m + int(rng.integers(3, 30))
        e = np.minimum(1.0, np.sort(rng.uniform(1e-6, 1.0, size=q - m + 1))[::-1])
        size = int(rng.integers(0, 4))
        chosen = sorted(rng.choice(np.arange(m, q + 1), size=size,
                                   replace=False).tolist())
        best_n, best_rho = _scan_candidates(k, m, e, chosen, m)
        ref_best = None
        for n in range(m, q + 1):
            if n in chosen:
                continue
            lengths = sorted(chosen + [n])
            blers = [e[v - m] for v in lengths]
            rho = throughput_estimate(k, lengths, blers)
            if ref_best is None or rho > ref_best[1]:
                ref_best = (n, rho)
        assert best_n == ref_best[0]
        assert best_rho == pytest.approx(ref_best[1], rel=1e-12)


def test_design_eta_estimate_consistent_with_curve():
    scheme = design_scheme(8, 3, 24, CHANNEL)
    curve = build_bler_curve(scheme.k, scheme.m, 24, CHANNEL)
    blers = [curve.pr_e(n) for n in scheme.lengths]
    assert scheme.eta_estimate == pytest.approx(
        throughput_estimate(scheme.k, scheme.lengths, blers), rel=1e-12)


def test_design_deterministic():
    a = design_scheme(8, 3, 24, CHANNEL)
    b = design_scheme(8, 3, 24, CHANNEL)
    assert a == b


def test_design_dominates_single_length_schemes():
    scheme = design_scheme(8, 3, 24, CHANNEL)
    curve = build_bler_curve(8, scheme.m, 24, CHANNEL)
    for n in range(scheme.m, 25):
        eta1 = 8 * (1.0 - curve.pr_e(n)) / n
        assert scheme.eta_estimate >= eta1 - 1e-12


def test_design_eta_nondecreasing_in_round_budget():
    etas = [design_scheme(8, t, 24, CHANNEL).eta_estimate for t in (1, 2, 3, 4)]
    assert all(b >= a - 1e-12 for a, b in zip(etas, etas[1:]))


def test_design_respects_scheme_invariants():
    scheme = design_scheme(12, 4, 48, CHANNEL)
    assert 12 <= scheme.m <= scheme.lengths[0] <= 48
    assert all(b > a for a, b in zip(scheme.lengths, scheme.lengths[1:]))
    assert 0 < scheme.eta_estimate <= scheme.k / scheme.lengths[0]


def test_design_force_first_length():
    scheme = design_scheme(8, 3, 24, CHANNEL, force_first_length_equals_m=True)
    assert scheme.lengths[0] == scheme.m


def test_design_validates_bounds():
    with pytest.raises(ValueError):
        design_scheme(8, 0, 16, CHANNEL)
    with pytest.raises(ValueError):
        design_scheme(8, 2, 7, CHANNEL)


def test_scheme_vector_layout():
    scheme = HarqScheme(k=4, m=6, lengths=(8, 12), eta_estimate=0.3)
    assert scheme.s == (6, 8, 12)
    assert scheme.t == 2
    with pytest.raises(ValueError):
        HarqScheme(k=4, m=6, lengths=(8, 8), eta_estimate=0.3)
    with pytest.raises(ValueError):
        HarqScheme(k=8, m=6, lengths=(8,), eta_estimate=0.3)


def test_cost_profile_matches_closed_form():
    # One polarization pass per m plus one repetition update per extra
    # length: sum over m of (m~ log2 m~ + q - m), m~ the next power of two.
    for k, q in ((8, 16), (8, 64), (16, 48)):
        counts = scheme_cost_profile(k, q)
        expect = 0
        for m in range(k, q + 1):
            m_bar = 1 << int(np.ceil(np.log2(m)))
            expect += m_bar * int(np.log2(m_bar)) + (q - m)
        assert counts["total"] == expect


def test_cost_profile_scaling_budget():
    k = 8
    qs = [64, 128, 256]
    totals = [scheme_cost_profile(k, q)["total"] for q in qs]
    for q, bigger, smaller in zip(qs[1:], totals[1:], totals[:-1]):
        ratio = bigger / smaller
        bound = 4.0 * (np.log2(q) / np.log2(q // 2)) * 1.3
        assert ratio <= bound
