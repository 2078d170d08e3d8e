"""Nine SP 800-22-style randomness tests plus the second-level statistics
(P-value uniformity and pass-proportion thresholds) used to judge a batch
of sequences.

Every test takes a 0/1 bit array and returns one or more p-values in
[0, 1].  Sequences shorter than a test's minimum raise ApplicabilityError
rather than failing the test.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import ApplicabilityError, ContractError, DomainError

# Parameterization of the longest-run-of-ones test by sequence length:
# (min_bits, block_size, smallest_class, class_probabilities).
_LONGEST_RUN_REGIMES = (
    (750_000, 10_000, 10, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, 4, (0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847)),
    (128, 8, 1, (0.21484375, 0.3671875, 0.23046875, 0.1875)),
)

_RANK_SIZE = 32  # matrices are 32x32, 1024 bits each


def _as_bits(seq) -> np.ndarray:
    bits = np.asarray(seq, dtype=np.uint8)
    if bits.ndim != 1:
        raise ContractError("bit sequence must be one-dimensional")
    if bits.size and bits.max() > 1:
        raise ContractError("bit sequence must contain only 0s and 1s")
    return bits


def _require(n: int, minimum: int, test: str):
    if n < minimum:
        raise ApplicabilityError(f"{test} needs at least {minimum} bits, got {n}")


def frequency(seq) -> float:
    """Monobit balance: p = erfc(|sum(2x-1)| / sqrt(2n))."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "frequency")
    s = 2.0 * int(bits.sum()) - n
    return float(special.erfc(abs(s) / math.sqrt(n) / math.sqrt(2.0)))


def block_frequency(seq, block_size: int = 128) -> float:
    """Within-block balance over disjoint blocks of `block_size` bits."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "block_frequency")
    if block_size < 2:
        raise DomainError("block_size must be at least 2")
    n_blocks = n // block_size
    if n_blocks < 1:
        raise ApplicabilityError("sequence shorter than one block")
    props = bits[: n_blocks * block_size].reshape(n_blocks, block_size).mean(axis=1)
    stat = 4.0 * block_size * float(((props - 0.5) ** 2).sum())
    return float(special.gammaincc(n_blocks / 2.0, stat / 2.0))


def runs(seq) -> float:
    """Total number of runs versus the expectation for the observed bias.

    Returns 0 when the monobit prerequisite |pi - 1/2| >= 2/sqrt(n) fails.
    """
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "runs")
    pi = float(bits.mean())
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return 0.0
    v = 1 + int((bits[1:] != bits[:-1]).sum())
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return float(special.erfc(num / den))


def _longest_one_run_per_row(blocks: np.ndarray) -> np.ndarray:
    """Longest run of ones within each row of a 0/1 matrix."""
    n_rows, width = blocks.shape
    padded = np.zeros((n_rows, width + 2), dtype=np.uint8)
    padded[:, 1:-1] = blocks
    flat = padded.ravel()
    zero_pos = np.flatnonzero(flat == 0)
    gaps = np.diff(zero_pos) - 1  # lengths of the one-runs between zeros
    rows = zero_pos[:-1] // (width + 2)
    longest = np.zeros(n_rows, dtype=np.int64)
    np.maximum.at(longest, rows, gaps)
    return longest


def longest_run(seq) -> float:
    """Distribution of the longest run of ones within fixed-size blocks,
    compared to the reference class probabilities for the block size.
    """
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 128, "longest_run")
    for min_bits, block_size, lowest, pi in _LONGEST_RUN_REGIMES:
        if n >= min_bits:
            break
    n_blocks = n // block_size
    blocks = bits[: n_blocks * block_size].reshape(n_blocks, block_size)
    longest = _longest_one_run_per_row(blocks)
    classes = np.clip(longest, lowest, lowest + len(pi) - 1) - lowest
    observed = np.bincount(classes, minlength=len(pi))
    expected = n_blocks * np.asarray(pi)
    stat = float(((observed - expected) ** 2 / expected).sum())
    return float(special.gammaincc((len(pi) - 1) / 2.0, stat / 2.0))


def _rank_probabilities(size: int) -> tuple[float, float, float]:
    """P(rank = size), P(rank = size-1), P(rank <= size-2) for a random
    square GF(2) matrix."""

    def prob(r: int) -> float:
        p = 2.0 ** (r * (2 * size - r) - size * size)
        for i in range(r):
            p *= (1.0 - 2.0 ** (i - size)) ** 2 / (1.0 - 2.0 ** (i - r))
        return p

    p_full = prob(size)
    p_one_less = prob(size - 1)
    return p_full, p_one_less, 1.0 - p_full - p_one_less


_RANK_PROBS = _rank_probabilities(_RANK_SIZE)


def _rank32_batch(rows: np.ndarray) -> np.ndarray:
    """GF(2) ranks of a batch of 32x32 matrices given as (B, 32) packed
    uint32 rows, via incremental insertion into a bit-position basis."""
    n_mats = rows.shape[0]
    basis = np.zeros((n_mats, 32), dtype=np.uint32)
    for i in range(32):
        v = rows[:, i].copy()
        for k in range(31, -1, -1):
            has = ((v >> np.uint32(k)) & np.uint32(1)).astype(bool)
            occupied = basis[:, k] != 0
            reduce_mask = has & occupied
            if reduce_mask.any():
                v[reduce_mask] ^= basis[reduce_mask, k]
            insert_mask = has & ~occupied
            if insert_mask.any():
                basis[insert_mask, k] = v[insert_mask]
                v[insert_mask] = 0
    return (basis != 0).sum(axis=1)


def rank(seq) -> float:
    """Linear dependence among disjoint 32x32 bit matrices: the observed
    full / almost-full / deficient rank counts against theory."""
    bits = _as_bits(seq)
    n = bits.size
    bits_per_matrix = _RANK_SIZE * _RANK_SIZE
    n_mats = n // bits_per_matrix
    if n_mats < 38:
        raise ApplicabilityError(
            f"rank needs at least {38 * bits_per_matrix} bits, got {n}"
        )
    mats = bits[: n_mats * bits_per_matrix].reshape(n_mats, _RANK_SIZE, _RANK_SIZE)
    rows = np.packbits(mats, axis=2).reshape(n_mats, _RANK_SIZE, 4).view(np.uint32)
    ranks = _rank32_batch(np.ascontiguousarray(rows.reshape(n_mats, _RANK_SIZE)))
    observed = np.array(
        [
            int((ranks == _RANK_SIZE).sum()),
            int((ranks == _RANK_SIZE - 1).sum()),
            int((ranks <= _RANK_SIZE - 2).sum()),
        ]
    )
    expected = n_mats * np.asarray(_RANK_PROBS)
    stat = float(((observed - expected) ** 2 / expected).sum())
    return float(special.gammaincc(1.0, stat / 2.0))


def spectral_fft(seq) -> float:
    """Excess of large discrete-Fourier peaks over the 95% threshold."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 1000, "spectral_fft")
    x = 2.0 * bits.astype(np.float64) - 1.0
    mags = np.abs(np.fft.rfft(x)[: n // 2])
    threshold = math.sqrt(math.log(1.0 / 0.05) * n)
    n_expected = 0.95 * n / 2.0
    n_below = int((mags < threshold).sum())
    d = (n_below - n_expected) / math.sqrt(n * 0.95 * 0.05 / 4.0)
    return float(special.erfc(abs(d) / math.sqrt(2.0)))


def cumulative_sums(seq, mode: str = "forward") -> float:
    """Maximum excursion of the +-1 random walk, taken forward or backward."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "cumulative_sums")
    if mode not in ("forward", "backward"):
        raise DomainError(f"mode must be 'forward' or 'backward', got {mode!r}")
    x = 2 * bits.astype(np.int64) - 1
    if mode == "backward":
        x = x[::-1]
    z = int(np.abs(np.cumsum(x)).max())
    # Truncated series bounds follow the reference implementation's integer
    # division; at production lengths the omitted terms are below 1e-15.
    sqn = math.sqrt(n)
    hi = int((int(n / z) - 1) / 4)
    lo1 = int((int(-n / z) + 1) / 4)
    lo2 = int((int(-n / z) - 3) / 4)
    k1 = np.arange(lo1, hi + 1)
    sum1 = float((special.ndtr((4 * k1 + 1) * z / sqn) - special.ndtr((4 * k1 - 1) * z / sqn)).sum())
    k2 = np.arange(lo2, hi + 1)
    sum2 = float((special.ndtr((4 * k2 + 3) * z / sqn) - special.ndtr((4 * k2 + 1) * z / sqn)).sum())
    return float(min(max(1.0 - sum1 + sum2, 0.0), 1.0))


def _pattern_counts(bits: np.ndarray, m: int) -> np.ndarray:
    """Counts of the 2**m overlapping m-bit patterns, with wraparound."""
    n = bits.size
    ext = np.concatenate([bits, bits[: m - 1]]) if m > 1 else bits
    codes = np.zeros(n, dtype=np.int64)
    for k in range(m):
        codes = (codes << 1) | ext[k : k + n]
    return np.bincount(codes, minlength=1 << m)


def _psi_squared(bits: np.ndarray, m: int) -> float:
    if m <= 0:
        return 0.0
    counts = _pattern_counts(bits, m).astype(np.float64)
    n = bits.size
    return float((1 << m) / n * (counts**2).sum() - n)


def approximate_entropy(seq, pattern_length: int = 2) -> float:
    """Comparison of overlapping pattern frequencies at lengths m and m+1."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "approximate_entropy")
    m = pattern_length
    if m < 1:
        raise DomainError("pattern_length must be >= 1")
    if (1 << (m + 1)) >= n:
        raise ApplicabilityError(f"pattern_length {m} too large for {n} bits")

    def phi(mm: int) -> float:
        counts = _pattern_counts(bits, mm)
        nz = counts[counts > 0].astype(np.float64)
        return float((nz / n * np.log(nz / n)).sum())

    apen = phi(m) - phi(m + 1)
    stat = 2.0 * n * (math.log(2.0) - apen)
    return float(special.gammaincc(2.0 ** (m - 1), stat / 2.0))


def serial(seq, pattern_length: int = 2) -> tuple[float, float]:
    """First and second difference of the overlapping-pattern statistic;
    returns one p-value per difference."""
    bits = _as_bits(seq)
    n = bits.size
    _require(n, 100, "serial")
    m = pattern_length
    if m < 2:
        raise DomainError("pattern_length must be >= 2")
    if (1 << m) >= n:
        raise ApplicabilityError(f"pattern_length {m} too large for {n} bits")
    psi_m = _psi_squared(bits, m)
    psi_m1 = _psi_squared(bits, m - 1)
    psi_m2 = _psi_squared(bits, m - 2)
    d1 = max(psi_m - psi_m1, 0.0)
    d2 = max(psi_m - 2.0 * psi_m1 + psi_m2, 0.0)
    p1 = float(special.gammaincc(2.0 ** (m - 2), d1 / 2.0))
    p2 = float(special.gammaincc(2.0 ** (m - 3), d2 / 2.0))
    return p1, p2


def uniformity_p(p_values, bins: int = 10) -> float:
    """Second-level uniformity of a batch of p-values: chi-square over
    `bins` equal cells of [0, 1]."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size < 55:
        raise ApplicabilityError(
            f"uniformity needs at least 55 p-values, got {p.size}"
        )
    if p.size and (p.min() < 0 or p.max() > 1):
        raise DomainError("p-values must lie in [0, 1]")
    cells = np.minimum((p * bins).astype(np.int64), bins - 1)
    observed = np.bincount(cells, minlength=bins)
    expected = p.size / bins
    stat = float(((observed - expected) ** 2 / expected).sum())
    return float(special.gammaincc((bins - 1) / 2.0, stat / 2.0))


def pvalue_histogram(p_values, bins: int = 10) -> np.ndarray:
    """Decile occupancy of a batch of p-values (the C1..C10 columns)."""
    p = np.asarray(p_values, dtype=np.float64)
    cells = np.minimum((p * bins).astype(np.int64), bins - 1)
    return np.bincount(cells, minlength=bins)


def proportion_bound(sequence_count: int, alpha: float = 0.01) -> float:
    """Real-valued minimum pass rate: k * ((1-a) - 3*sqrt(a(1-a)/k))."""
    if sequence_count < 100:
        raise ApplicabilityError(
            f"proportion bound needs at least 100 sequences, got {sequence_count}"
        )
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha must be in [0, 1), got {alpha}")
    p_hat = 1.0 - alpha
    return sequence_count * (p_hat - 3.0 * math.sqrt(p_hat * alpha / sequence_count))


def proportion_threshold(sequence_count: int, alpha: float = 0.01) -> int:
    """Integer pass threshold: the ceiling of proportion_bound."""
    return math.ceil(proportion_bound(sequence_count, alpha))
