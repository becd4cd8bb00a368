"""Gaussian-approximation density evolution for punctured polar codes.

Tracks every synthesized bit channel as a one-parameter Gaussian LLR model
(variance = 2 * mean) through the polarization recursion, yielding per-channel
error probabilities and the information-set selection.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .channel import LlrDistribution

# The two analytic pieces of the GA reliability function
#   phi(m) ~ exp(0.0218 - 0.4527 m^0.86)                      (small m)
#   phi(m) ~ sqrt(pi/m) exp(-m/4) (1 - 10/(7m))               (large m)
# intersect at this abscissa; switching exactly there keeps phi strictly
# decreasing, which the bisection inverse relies on.
_PHI_CROSSOVER = 14.394352942168425

# Below this log-phi magnitude the product term in 1-(1-a)(1-b) is negligible
# relative to double precision and the update degrades to logaddexp.
_LOG_TINY = -30.0


def _log_phi(m):
    """log phi(m) for the two-piece GA reliability function (vectorized)."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    low = m < _PHI_CROSSOVER
    out[low] = 0.0218 - 0.4527 * np.power(m[low], 0.86)
    mh = m[~low]
    out[~low] = 0.5 * (np.log(np.pi) - np.log(mh)) - 0.25 * mh \
        + np.log1p(-10.0 / (7.0 * mh))
    return out


def _log_phi_inv(log_y, iters: int = 90):
    """Inverse of _log_phi by bisection; exact to ~1e-12 over means in [0, 1e6]."""
    log_y = np.asarray(log_y, dtype=float)
    log_y = np.minimum(log_y, _log_phi(np.zeros(1))[0])
    lo = np.zeros_like(log_y)
    hi = np.ones_like(log_y)
    for _ in range(40):
        need = _log_phi(hi) > log_y
        if not need.any():
            break
        hi[need] *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = _log_phi(mid) > log_y
        lo[above] = mid[above]
        hi[~above] = mid[~above]
    return 0.5 * (lo + hi)


def check_mean_update(m_a, m_b):
    """Mean of the degraded (check-type) channel from two Gaussian LLR means.

    Computes phi^-1(1 - (1 - phi(m_a)) (1 - phi(m_b))) without underflow: the
    argument 1-(1-a)(1-b) = a + b - a*b is evaluated in the log domain once
    either operand is tiny.  An exactly-zero mean (erased channel) is absorbing.
    """
    m_a = np.asarray(m_a, dtype=float)
    m_b = np.asarray(m_b, dtype=float)
    la, lb = _log_phi(m_a), _log_phi(m_b)
    small = (la < _LOG_TINY) | (lb < _LOG_TINY)
    log_arg = np.empty_like(la)
    a = np.exp(la[~small])
    b = np.exp(lb[~small])
    log_arg[~small] = np.log(np.maximum(a + b - a * b, 1e-300))
    # a*b is below relative double precision here; drop it
    log_arg[small] = np.logaddexp(la[small], lb[small])
    out = _log_phi_inv(log_arg)
    return np.where((m_a == 0.0) | (m_b == 0.0), 0.0, out)


def pe_from_mean(means):
    """Per-channel error probability Q(sqrt(mean/2)) of the Gaussian LLR model.

    Evaluated through the log of the normal tail so that values far below
    1e-12 remain meaningful instead of rounding to zero prematurely.
    """
    means = np.asarray(means, dtype=float)
    if np.any(means < 0):
        raise ValueError("LLR means must be nonnegative")
    out = np.full(means.shape, 0.5)
    pos = means > 0
    out[pos] = np.exp(log_ndtr(-np.sqrt(0.5 * means[pos])))
    return out


def pe_of(dist: LlrDistribution) -> float:
    """Error probability of a single modelled bit channel."""
    return float(pe_from_mean(np.array([dist.mean]))[0])


@dataclass(frozen=True, eq=False)
class ReliabilityTable:
    """Per-channel LLR means and error probabilities after polarization."""

    means: np.ndarray
    pe: np.ndarray

    @property
    def size(self) -> int:
        return self.means.size

    def to_csv(self, fp, header_lines=()) -> None:
        """Write (index, mean, pe) rows; ``header_lines`` go first as comments."""
        for line in header_lines:
            fp.write(f"# {line}\n")
        fp.write("index,mean,pe\n")
        for i, (m, p) in enumerate(zip(self.means, self.pe)):
            fp.write(f"{i},{float(m)!r},{float(p)!r}\n")


def ga_evolve(channel_means) -> ReliabilityTable:
    """Evolve per-use channel LLR means through the polarization transform.

    Parameters
    ----------
    channel_means : array-like, shape (N0,)
        Gaussian LLR mean of every channel use, in codeword order; punctured
        positions carry 0.  N0 must be a power of two.

    Returns
    -------
    ReliabilityTable
        Means and error probabilities of the N0 synthesized channels, indexed
        in input-bit order: index i is the channel seen by bit u_i.

    The recursion pairs use j with use j + block/2 inside each block; the
    check-type output feeds the first half of the bit indices and the
    variable-type output (means add) the second half, matching the codec's
    natural-order transform.
    """
    means = np.array(channel_means, dtype=float)
    n0 = means.size
    if n0 < 1 or (n0 & (n0 - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n0}")
    if np.any(means < 0):
        raise ValueError("channel means must be nonnegative")
    n = int(np.log2(n0))
    work = means
    for stage in range(n):
        block = n0 >> stage
        half = block >> 1
        w = work.reshape(-1, block)
        nxt = np.empty_like(w)
        nxt[:, :half] = check_mean_update(w[:, :half], w[:, half:])
        nxt[:, half:] = w[:, :half] + w[:, half:]
        work = nxt.reshape(-1)
    return ReliabilityTable(means=work, pe=pe_from_mean(work))


def bit_reverse(i: int, nbits: int) -> int:
    """Reverse the low ``nbits`` bits of ``i``."""
    out = 0
    for _ in range(nbits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def puncture_pattern(n0: int, m: int) -> np.ndarray:
    """Quasi-uniform puncturing: positions to delete from an N0-length codeword.

    Returns the sorted set of the first ``n0 - m`` entries of the bit-reversal
    permutation of 0..n0-1.  Requires n0/2 < m <= n0 with n0 a power of two.
    """
    if n0 < 1 or (n0 & (n0 - 1)) != 0:
        raise ValueError(f"n0 must be a power of two, got {n0}")
    if not n0 // 2 < m <= n0:
        raise ValueError(f"need n0/2 < m <= n0, got m={m}, n0={n0}")
    nbits = int(np.log2(n0))
    pattern = [bit_reverse(i, nbits) for i in range(n0 - m)]
    return np.array(sorted(pattern), dtype=np.int64)


def select_info_set(table: ReliabilityTable, k: int) -> np.ndarray:
    """Indices of the k most reliable channels (smallest pe), sorted ascending.

    Ties are broken toward the smaller channel index.
    """
    if not 0 < k <= table.size:
        raise ValueError(f"k must be in 1..{table.size}, got {k}")
    order = np.argsort(table.pe, kind="stable")
    return np.sort(order[:k]).astype(np.int64)
