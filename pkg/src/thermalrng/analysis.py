"""Raw-record characterization: histograms, min-entropy, shot-noise
calibration, Gaussianity testing, and autocorrelation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .acquisition import AdcConfig, SampleRecord
from .errors import ApplicabilityError, CalibrationError, DomainError

# Chi-square GOF on huge samples rejects on irrelevant systematics, so the
# test defaults to a 1000-sample subset.
GOF_DEFAULT_SUBSET = 1000


@dataclass(frozen=True)
class Histogram:
    """Counts per ADC code (one bin per code when resolution_bits is set)."""

    counts: np.ndarray
    total: int
    resolution_bits: int | None = None
    bin_edges: np.ndarray | None = None

    def __post_init__(self):
        if int(self.counts.sum()) != self.total:
            raise DomainError("histogram counts do not sum to total")
        if self.bin_edges is not None and np.any(np.diff(self.bin_edges) <= 0):
            raise DomainError("bin edges must be strictly increasing")


@dataclass(frozen=True)
class EntropyReport:
    """Worst-case (min-)entropy of one digitized sample."""

    p_max: float
    h_min: float
    bits_per_raw_bit: float
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "p_max": self.p_max,
            "h_min": self.h_min,
            "bits_per_raw_bit": self.bits_per_raw_bit,
            "sample_count": self.sample_count,
        }


@dataclass(frozen=True)
class CalibrationReport:
    """Shot-noise-unit normalization from three reference variances."""

    v_total: float
    v_vacuum: float
    v_detector: float
    variance_snu: float
    n_inferred: float

    def to_dict(self) -> dict:
        return {
            "v_total": self.v_total,
            "v_vacuum": self.v_vacuum,
            "v_detector": self.v_detector,
            "variance_snu": self.variance_snu,
            "n_inferred": self.n_inferred,
        }


def histogram_codes(record: SampleRecord) -> Histogram:
    """One bin per ADC code; counts sum to the sample count."""
    if len(record) == 0:
        raise DomainError("record is empty")
    counts = np.bincount(record.codes, minlength=record.adc.levels).astype(np.int64)
    return Histogram(
        counts=counts,
        total=len(record),
        resolution_bits=record.adc.resolution_bits,
    )


def min_entropy(hist: Histogram) -> EntropyReport:
    """Empirical min-entropy: -log2 of the most frequent code's frequency."""
    if hist.total <= 0:
        raise DomainError("histogram is empty")
    p_max = float(hist.counts.max()) / hist.total
    h_min = float(-np.log2(p_max))
    if hist.resolution_bits:
        bits_per_raw_bit = h_min / hist.resolution_bits
    else:
        bits_per_raw_bit = h_min / np.log2(len(hist.counts))
    return EntropyReport(
        p_max=p_max,
        h_min=h_min,
        bits_per_raw_bit=bits_per_raw_bit,
        sample_count=hist.total,
    )


def min_entropy_analytic(adc: AdcConfig, mean: float, std: float) -> float:
    """Model-based cross-check of the empirical estimate: min-entropy of an
    ideal Gaussian integrated over the quantizer bins (end bins absorb the
    clipped tails).
    """
    if std <= 0:
        raise DomainError("std must be positive")
    edges = adc.full_scale_min + np.arange(1, adc.levels) * adc.step
    cdf = special.ndtr((edges - mean) / std)
    probs = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
    return float(-np.log2(probs.max()))


def calibrate_snu(v_total: float, v_vacuum: float, v_detector: float) -> CalibrationReport:
    """Express a raw variance in shot-noise units.

    v_vacuum is measured with the LO on and the source off, v_detector with
    both off; the vacuum contribution alone defines one shot-noise unit:
    variance_snu = (v_total - v_detector) / (v_vacuum - v_detector).
    """
    if v_detector < 0:
        raise DomainError("v_detector must be >= 0")
    if v_vacuum <= v_detector:
        raise CalibrationError(
            f"no shot-noise clearance: v_vacuum={v_vacuum} <= v_detector={v_detector}"
        )
    if v_total < v_vacuum:
        raise DomainError("v_total must be at least v_vacuum")
    variance_snu = (v_total - v_detector) / (v_vacuum - v_detector)
    return CalibrationReport(
        v_total=v_total,
        v_vacuum=v_vacuum,
        v_detector=v_detector,
        variance_snu=variance_snu,
        n_inferred=(variance_snu - 1.0) / 2.0,
    )


def chi_square_gaussian(samples, bin_count: int = 10) -> tuple[float, float]:
    """Chi-square goodness-of-fit against a Gaussian fitted to the data.

    Bins are equiprobable under the fitted normal, so every bin has the
    same expected count; degrees of freedom are bin_count - 3 (two fitted
    parameters).  Returns (statistic, upper-tail p-value).
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if bin_count < 4:
        raise DomainError("bin_count must be at least 4")
    if n < 5 * bin_count:
        raise ApplicabilityError(
            f"need at least {5 * bin_count} samples for {bin_count} bins, got {n}"
        )
    mu = x.mean()
    sigma = x.std(ddof=1)
    if sigma == 0:
        raise DomainError("samples are constant; no Gaussian fit exists")
    # Interior edges at the fitted quantiles make the bins equiprobable.
    inner = mu + sigma * special.ndtri(np.arange(1, bin_count) / bin_count)
    observed = np.bincount(np.searchsorted(inner, x), minlength=bin_count)
    expected = n / bin_count
    stat = float(((observed - expected) ** 2 / expected).sum())
    p = float(special.gammaincc((bin_count - 3) / 2.0, stat / 2.0))
    return stat, p


def autocorrelation(samples, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation r(0..max_lag); r(0) = 1.

    r(k) = sum((x_i - mean)(x_{i+k} - mean)) / sum((x_i - mean)**2).
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if max_lag < 0:
        raise DomainError("max_lag must be >= 0")
    if max_lag >= n / 2:
        raise DomainError(f"max_lag={max_lag} too large for {n} samples")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DomainError("autocorrelation is undefined for a constant series")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for k in range(1, max_lag + 1):
        r[k] = float(xc[:-k] @ xc[k:]) / denom
    return r
