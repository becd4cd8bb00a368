"""Binary-input AWGN channel: BPSK mapping, LLR demodulation, symmetric capacity."""

from dataclasses import dataclass

import numpy as np

# Channel LLRs are saturated at this magnitude so that downstream tanh-domain
# arithmetic never sees infinities.  |LLR| = 40 corresponds to an error
# probability around 4e-18, far beyond any decision-relevant scale.
LLR_CLAMP = 40.0


@dataclass(frozen=True)
class ChannelParams:
    """Operating point of the BPSK-input AWGN channel.

    ``snr_db`` is the symbol SNR Es/N0 in decibels.  The per-dimension noise
    standard deviation follows as ``sigma = sqrt(1 / (2 * 10^(snr_db/10)))``.
    For a rate-R code the bit SNR is ``Eb/N0 [dB] = snr_db - 10*log10(R)``.
    """

    snr_db: float

    @property
    def sigma(self) -> float:
        return float(np.sqrt(0.5 * 10.0 ** (-self.snr_db / 10.0)))

    @property
    def noise_var(self) -> float:
        return self.sigma ** 2

    @staticmethod
    def from_sigma(sigma: float) -> "ChannelParams":
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        return ChannelParams(snr_db=float(-10.0 * np.log10(2.0 * sigma ** 2)))


@dataclass(frozen=True)
class LlrDistribution:
    """One-parameter Gaussian model of a bit-channel LLR density.

    Under all-zero transmission the LLR of a symmetric channel is modelled as
    Normal(mean, 2*mean); mean == 0 encodes a zero-capacity (erased) channel.
    """

    mean: float

    def __post_init__(self):
        if not self.mean >= 0:
            raise ValueError(f"LLR mean must be nonnegative, got {self.mean}")


def noise_stream(seed) -> np.random.Generator:
    """Deterministic random stream for channel noise.

    ``seed`` may be an existing Generator (used as-is), an int, or an
    ``(int, int)`` pair.  Pairs map to distinct Philox keys, so the streams
    for ``(base_seed, 0), (base_seed, 1), ...`` are statistically independent
    and reproducible regardless of scheduling; this is the seed-derivation
    rule used for parallel Monte Carlo trials.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        base, idx = seed
    else:
        base, idx = int(seed), 0
    key = np.array([base & 0xFFFFFFFFFFFFFFFF, idx & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def observation_to_llr(y, params: ChannelParams):
    """LLR of BPSK observations: 2*y/sigma^2, saturated at +/-LLR_CLAMP."""
    llr = 2.0 * np.asarray(y, dtype=float) / params.noise_var
    return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)


def transmit_with_rng(bits, params: ChannelParams, rng: np.random.Generator):
    """BPSK-modulate ``bits``, add Gaussian noise from ``rng``, demodulate to LLRs.

    Accepts a 1-D word or a 2-D batch of words; the noise draw consumes
    exactly ``bits.size`` standard normals from ``rng``.
    """
    bits = np.asarray(bits)
    signs = 1.0 - 2.0 * bits  # 0 -> +1, 1 -> -1
    y = signs + params.sigma * rng.standard_normal(bits.shape)
    return observation_to_llr(y, params)


def transmit(bits, params: ChannelParams, rng_seed):
    """Send a binary word over the channel and return the received LLR word.

    Parameters
    ----------
    bits : array-like of {0, 1}, shape (n,)
        Word to transmit, n >= 1.
    params : ChannelParams
        Channel operating point.
    rng_seed : int | (int, int) | numpy Generator
        Noise stream selector; a fixed seed makes the call a pure function.

    Returns
    -------
    ndarray of float, shape (n,)
        Per-use LLRs, finite (clamped to +/-LLR_CLAMP).
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("transmit expects a nonempty 1-D bit vector")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("transmit expects binary input")
    return transmit_with_rng(bits, params, noise_stream(rng_seed))


def channel_llr_distribution(params: ChannelParams) -> LlrDistribution:
    """Gaussian LLR model of the raw channel: mean 2/sigma^2 (variance twice that)."""
    return LlrDistribution(mean=2.0 / params.noise_var)


def bawgn_capacity(params: ChannelParams, nodes: int = 128) -> float:
    """Symmetric capacity of the BPSK-input AWGN channel, in bits per use.

    Evaluates C = 1 - E[log2(1 + exp(-L))] with L ~ Normal(m, 2m), m = 2/sigma^2,
    by Gauss-Hermite quadrature with ``nodes`` points (>= 64 for the default
    accuracy target).
    """
    if nodes < 64:
        raise ValueError("use at least 64 quadrature nodes")
    t, w = np.polynomial.hermite.hermgauss(nodes)
    m = 2.0 / params.noise_var
    llr = m + np.sqrt(2.0 * m) * np.sqrt(2.0) * t
    # log2(1 + e^-L), computed stably for large |L|
    integrand = np.logaddexp(0.0, -llr) / np.log(2.0)
    c = 1.0 - float(np.dot(w, integrand)) / np.sqrt(np.pi)
    return min(max(c, 0.0), 1.0)
