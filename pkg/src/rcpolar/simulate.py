"""Monte Carlo simulation of the stop-and-wait incremental-redundancy protocol.

Every trial sends a fresh random block, decodes after each transmission, and
retransmits repetition bits until the block is acknowledged or the round
budget is exhausted.  Acknowledgements are ideal (genie comparison with the
true block) and the feedback channel is error-free and free of cost.

Each trial additionally records whether decoding would succeed with the bits
of every round, not only up to the first acknowledgement, so that
per-round failure probabilities are measured as true marginals.
"""

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (ChannelParams, channel_llr_distribution, noise_stream,
                      observation_to_llr, transmit_with_rng)
from .codec import RcpCode, rcp_encode, sc_decode
from .construct import construct_rcp
from .design import HarqScheme, build_bler_curve, throughput_estimate

_Z95 = 1.959963984540054


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    return float(z * np.sqrt(p * (1.0 - p) / trials
                             + z * z / (4.0 * trials * trials)) / denom)


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one protocol run.

    ``success_round`` is the first acknowledged round (1-based) or None if
    the block was never delivered; ``bits_sent`` counts channel uses under
    the protocol (transmission stops at the acknowledged round).
    ``fail_flags[t-1]`` tells whether decoding with the bits of rounds 1..t
    failed, for every round that was evaluated.
    """

    success_round: int | None
    bits_sent: int
    decoded_ok: bool
    fail_flags: tuple


@dataclass(frozen=True)
class SimReport:
    """Aggregate campaign statistics at one operating point."""

    k: int
    m: int
    lengths: tuple
    snr_db: float
    trials: int
    base_seed: int
    pr_e: tuple                 # marginal P(decoding fails with round-t bits)
    pr_first_success: tuple     # P(round t is the first success)
    e_k: float                  # mean delivered information bits per block
    e_n: float                  # mean transmitted bits per block
    eta: float                  # e_k / e_n
    eta_analytic: float         # model-based throughput of the same scheme
    ci95: dict
    nesting_violations: int


def code_family_for_scheme(scheme: HarqScheme, channel) -> list:
    """Nested codes for each cumulative length of a scheme.

    Constructs the longest code once and slices repetition prefixes, so all
    rounds share the mother code, information set and puncturing.
    """
    full, _, _ = construct_rcp(scheme.lengths[-1], scheme.k, scheme.m, channel)
    return [full.prefix(n) for n in scheme.lengths]


def _validate_family(codes) -> None:
    if not codes:
        raise ValueError("empty code family")
    spec = codes[0].spec
    prev_n = 0
    for code in codes:
        if code.spec is not spec and not (
                code.spec.n0 == spec.n0
                and np.array_equal(code.spec.info_set, spec.info_set)
                and np.array_equal(code.spec.puncture_set, spec.puncture_set)):
            raise ValueError("family members must share the mother code")
        if code.n <= prev_n:
            raise ValueError("family lengths must be strictly increasing")
        prev_n = code.n
    longest = codes[-1].rep_vector
    for code in codes[:-1]:
        if not np.array_equal(code.rep_vector,
                              longest[: code.rep_vector.size]):
            raise ValueError("repetition vectors must be nested prefixes")


def run_trial(codes, info_bits, params: ChannelParams, rng,
              channel_fn=None, trial_index: int = 0,
              measure_all_rounds: bool = False) -> TrialOutcome:
    """Run the protocol once over a nested code family.

    ``rng`` may be a seed or an already-advanced Generator; the channel noise
    for all potential rounds is drawn in a single call, so outcomes do not
    depend on how many rounds end up being used.  ``channel_fn`` replaces the
    AWGN channel for fault injection; it receives
    ``(codeword_bits, params, rng, trial_index)`` and returns the LLR word.
    """
    _validate_family(codes)
    info_bits = np.asarray(info_bits, dtype=np.int8)
    tx = rcp_encode(info_bits, codes[-1])
    rng = noise_stream(rng)
    if channel_fn is None:
        llr = transmit_with_rng(tx, params, rng)
    else:
        llr = np.asarray(channel_fn(tx, params, rng, trial_index), dtype=float)

    fail_flags = []
    success_round = None
    for t, code in enumerate(codes, start=1):
        decoded = sc_decode(llr[: code.n], code)
        ok = bool(np.array_equal(decoded, info_bits))
        fail_flags.append(not ok)
        if ok and success_round is None:
            success_round = t
            if not measure_all_rounds:
                break
    bits_sent = codes[success_round - 1].n if success_round else codes[-1].n
    return TrialOutcome(success_round=success_round, bits_sent=bits_sent,
                        decoded_ok=success_round is not None,
                        fail_flags=tuple(fail_flags))


def _empty_counts(t: int) -> dict:
    return {
        "trials": 0,
        "fails": np.zeros(t, dtype=np.int64),
        "first_success": np.zeros(t, dtype=np.int64),
        "chain_fail": 0,
        "nesting_violations": 0,
        "sum_n": 0.0, "sum_n2": 0.0,
        "sum_k": 0.0, "sum_k2": 0.0, "sum_kn": 0.0,
    }


def _accumulate(counts: dict, fails: np.ndarray, lengths) -> None:
    """Fold a (B, T) boolean fail matrix into the running counts."""
    b, t = fails.shape
    ok = ~fails
    counts["trials"] += b
    counts["fails"] += fails.sum(axis=0)
    first = np.where(ok.any(axis=1), ok.argmax(axis=1), t)  # t == never
    for j in range(t):
        counts["first_success"][j] += int(np.sum(first == j))
    chain = int(np.sum(first == t))
    counts["chain_fail"] += chain
    # success followed by a later failure breaks event nesting
    later_fail = np.zeros(b, dtype=bool)
    seen_ok = np.zeros(b, dtype=bool)
    for j in range(t):
        later_fail |= seen_ok & fails[:, j]
        seen_ok |= ok[:, j]
    counts["nesting_violations"] += int(np.sum(later_fail))
    lengths = np.asarray(lengths)
    n_i = np.where(first < t, lengths[np.minimum(first, t - 1)], lengths[-1])
    k_i = np.where(first < t, 1.0, 0.0)  # delivered blocks; scaled by k later
    counts["sum_n"] += float(n_i.sum())
    counts["sum_n2"] += float(np.dot(n_i, n_i))
    counts["sum_k"] += float(k_i.sum())
    counts["sum_k2"] += float(np.dot(k_i, k_i))
    counts["sum_kn"] += float(np.dot(k_i, n_i))


def _merge(dst: dict, src: dict) -> None:
    for key, val in src.items():
        dst[key] = dst[key] + val


def _chunk_counts(codes, params: ChannelParams, base_seed: int,
                  lo: int, hi: int) -> dict:
    """Simulate trials [lo, hi) with batched decoding."""
    k = codes[0].k
    n_total = codes[-1].n
    b = hi - lo
    bits = np.empty((b, k), dtype=np.int8)
    noise = np.empty((b, n_total))
    for i in range(b):
        rng = noise_stream((base_seed, lo + i))
        bits[i] = rng.integers(0, 2, size=k, dtype=np.int8)
        noise[i] = rng.standard_normal(n_total)
    tx = rcp_encode(bits, codes[-1])
    y = (1.0 - 2.0 * tx) + params.sigma * noise
    llr = observation_to_llr(y, params)

    fails = np.empty((b, len(codes)), dtype=bool)
    for t, code in enumerate(codes):
        decoded = sc_decode(llr[:, : code.n], code)
        fails[:, t] = np.any(decoded != bits, axis=1)
    counts = _empty_counts(len(codes))
    _accumulate(counts, fails, [c.n for c in codes])
    return counts


def _chunk_ranges(trials: int, chunk: int):
    return [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]


def run_campaign(scheme: HarqScheme, params: ChannelParams, trials: int,
                 base_seed: int, threads: int = 1, channel_fn=None,
                 progress: bool = False) -> SimReport:
    """Monte Carlo campaign for one scheme at one operating point.

    Trial i draws its block and noise from the stream keyed by
    ``(base_seed, i)``, so the report is reproducible and independent of
    chunking, thread count, and scheduling.  With ``channel_fn`` set, trials
    run one by one through :func:`run_trial` (fault-injection path).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    channel = channel_llr_distribution(params)
    codes = code_family_for_scheme(scheme, channel)
    _validate_family(codes)
    t_rounds = len(codes)
    lengths = [c.n for c in codes]

    counts = _empty_counts(t_rounds)
    if channel_fn is not None:
        for i in range(trials):
            rng = noise_stream((base_seed, i))
            info = rng.integers(0, 2, size=scheme.k, dtype=np.int8)
            out = run_trial(codes, info, params, rng, channel_fn=channel_fn,
                            trial_index=i, measure_all_rounds=True)
            _accumulate(counts, np.array([out.fail_flags]), lengths)
    else:
        chunk = max(32, min(8192, 1_500_000 // codes[-1].spec.n0))
        ranges = _chunk_ranges(trials, chunk)
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_chunk_counts, codes, params,
                                       base_seed, lo, hi)
                           for lo, hi in ranges]
                for fut in futures:
                    _merge(counts, fut.result())
                    if progress:
                        print(f"  trials {counts['trials']}/{trials}",
                              file=sys.stderr)
        else:
            for lo, hi in ranges:
                _merge(counts, _chunk_counts(codes, params, base_seed, lo, hi))
                if progress:
                    print(f"  trials {counts['trials']}/{trials}",
                          file=sys.stderr)

    return _report_from_counts(scheme, params, trials, base_seed, counts,
                               lengths)


def _report_from_counts(scheme, params, trials, base_seed, counts,
                        lengths) -> SimReport:
    r = counts["trials"]
    assert r == trials
    t_rounds = len(lengths)
    pr_e = counts["fails"] / r
    pr_first = counts["first_success"] / r
    chain = counts["chain_fail"] / r

    k = scheme.k
    e_k = k * (1.0 - chain)
    e_n = (float(np.dot(lengths, counts["first_success"]))
           + lengths[-1] * counts["chain_fail"]) / r
    eta = e_k / e_n

    # Delta-method standard error for the ratio of per-trial means.
    mean_n = counts["sum_n"] / r
    mean_k = k * counts["sum_k"] / r
    var_n = counts["sum_n2"] / r - mean_n ** 2
    var_k = k * k * (counts["sum_k2"] / r - (counts["sum_k"] / r) ** 2)
    cov = k * (counts["sum_kn"] / r - (counts["sum_k"] / r) * mean_n)
    se2 = (var_k + eta * eta * var_n - 2.0 * eta * cov) / (mean_n ** 2 * r)
    ci_eta = _Z95 * float(np.sqrt(max(se2, 0.0)))

    channel = channel_llr_distribution(params)
    curve = build_bler_curve(k, scheme.m, lengths[-1], channel)
    blers = np.minimum.accumulate([curve.pr_e(n) for n in lengths])
    eta_analytic = throughput_estimate(k, lengths, blers)

    ci95 = {
        "pr_e": tuple(wilson_halfwidth(int(c), r) for c in counts["fails"]),
        "pr_first_success": tuple(wilson_halfwidth(int(c), r)
                                  for c in counts["first_success"]),
        "eta": ci_eta,
    }
    return SimReport(
        k=k, m=scheme.m, lengths=tuple(int(n) for n in lengths),
        snr_db=params.snr_db, trials=trials, base_seed=base_seed,
        pr_e=tuple(float(p) for p in pr_e),
        pr_first_success=tuple(float(p) for p in pr_first),
        e_k=float(e_k), e_n=float(e_n), eta=float(eta),
        eta_analytic=float(eta_analytic),
        ci95=ci95, nesting_violations=int(counts["nesting_violations"]),
    )


@dataclass(frozen=True)
class BoundCheckRow:
    t: int
    marginal_decrease: float    # Pr(fail at t-1) - Pr(fail at t)
    first_success: float        # Pr(first success at round t)
    slack: float
    holds: bool


@dataclass(frozen=True)
class BoundCheckResult:
    rows: tuple
    eta_analytic: float
    eta_sim: float
    eta_slack: float
    eta_holds: bool

    @property
    def all_hold(self) -> bool:
        return self.eta_holds and all(row.holds for row in self.rows)


def bound_check(report: SimReport) -> BoundCheckResult:
    """Check the one-sided relations behind the throughput approximation.

    Per round t, the marginal failure decrease Pr(E_{t-1}) - Pr(E_t) should
    upper-bound the first-success probability, and the model throughput
    should lower-bound the simulated one.  Each comparison is granted a
    slack of twice the combined (root-sum-square) 95% half-widths.
    """
    rows = []
    prev_e, prev_ci = 1.0, 0.0
    for t in range(1, len(report.pr_e) + 1):
        cur_e = report.pr_e[t - 1]
        cur_ci = report.ci95["pr_e"][t - 1]
        fs = report.pr_first_success[t - 1]
        fs_ci = report.ci95["pr_first_success"][t - 1]
        slack = 2.0 * float(np.sqrt(prev_ci ** 2 + cur_ci ** 2 + fs_ci ** 2))
        lhs = prev_e - cur_e
        rows.append(BoundCheckRow(t=t, marginal_decrease=lhs,
                                  first_success=fs, slack=slack,
                                  holds=lhs >= fs - slack))
        prev_e, prev_ci = cur_e, cur_ci
    eta_slack = 2.0 * report.ci95["eta"]
    return BoundCheckResult(
        rows=tuple(rows),
        eta_analytic=report.eta_analytic, eta_sim=report.eta,
        eta_slack=eta_slack,
        eta_holds=report.eta_analytic <= report.eta + eta_slack,
    )


def _bler_chunk(code, params: ChannelParams, base_seed: int,
                lo: int, hi: int) -> int:
    k = code.k
    b = hi - lo
    bits = np.empty((b, k), dtype=np.int8)
    noise = np.empty((b, code.n))
    for i in range(b):
        rng = noise_stream((base_seed, lo + i))
        bits[i] = rng.integers(0, 2, size=k, dtype=np.int8)
        noise[i] = rng.standard_normal(code.n)
    tx = rcp_encode(bits, code)
    llr = observation_to_llr((1.0 - 2.0 * tx) + params.sigma * noise, params)
    decoded = sc_decode(llr, code)
    return int(np.sum(np.any(decoded != bits, axis=1)))


def bler_monte_carlo(n: int, k: int, m: int, params: ChannelParams,
                     trials: int, base_seed: int, threads: int = 1) -> dict:
    """Single-shot block error rate of an (n, k, m) code, with the model value.

    The code is constructed for the simulated operating point.  Returns a
    dict with the empirical rate, its Wilson half-width, and the union-bound
    estimate.
    """
    channel = channel_llr_distribution(params)
    code, _, analytic = construct_rcp(n, k, m, channel)
    chunk = max(32, min(8192, 1_500_000 // code.spec.n0))
    ranges = _chunk_ranges(trials, chunk)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_bler_chunk, code, params, base_seed, lo, hi)
                       for lo, hi in ranges]
            errors = sum(fut.result() for fut in futures)
    else:
        errors = sum(_bler_chunk(code, params, base_seed, lo, hi)
                     for lo, hi in ranges)
    return {
        "n": n, "k": k, "m": m, "snr_db": params.snr_db,
        "trials": trials, "errors": int(errors),
        "bler": errors / trials,
        "ci95": wilson_halfwidth(errors, trials),
        "bler_analytic": analytic,
    }
