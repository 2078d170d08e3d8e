"""Synthetic homodyne entropy source.

Models a single-mode thermal state probed by a balanced homodyne detector:
closed-form mode counting and photon-number formulas, a seeded Gaussian
quadrature sampler with selectable noise contributions (detector noise,
vacuum noise, thermal excess noise), and Bose-Einstein photon statistics
for the photon-counting variant of the source.

All quadrature values are expressed in shot-noise units: the vacuum
quadrature variance is 1 by definition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, defined value
PLANCK_CONSTANT = 6.626_070_15e-34  # J*s, defined value


@dataclass(frozen=True)
class SourceParams:
    """Physical configuration of the simulated entropy source.

    wavelength and filter_bandwidth are in meters, optical_power in watts,
    efficiency is the overall detection efficiency (0..1), and
    detector_noise_var is the electronic noise variance in shot-noise
    units.  lo_enabled / ase_enabled switch the local oscillator and the
    broadband source on or off, selecting which noise terms reach the
    detector output.
    """

    wavelength: float
    filter_bandwidth: float
    optical_power: float
    efficiency: float
    detector_noise_var: float = 0.0
    lo_enabled: bool = True
    ase_enabled: bool = True

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")
        if not 0 < self.filter_bandwidth < self.wavelength:
            raise DomainError(
                "filter_bandwidth must satisfy 0 < bandwidth < wavelength, "
                f"got {self.filter_bandwidth}"
            )
        if not 0 <= self.efficiency <= 1:
            raise DomainError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if self.optical_power < 0:
            raise DomainError(f"optical_power must be >= 0, got {self.optical_power}")
        if self.detector_noise_var < 0:
            raise DomainError(
                f"detector_noise_var must be >= 0, got {self.detector_noise_var}"
            )


@dataclass(frozen=True)
class QuadratureSeries:
    """Homodyne samples plus the variance the generator targeted (SNU)."""

    values: np.ndarray
    model_variance: float

    def __post_init__(self):
        if self.model_variance < 0:
            raise DomainError("model_variance must be >= 0")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PhotonCountSeries:
    """Photon counts per sampling window and the mean they were drawn at."""

    counts: np.ndarray
    mean_target: float

    def __post_init__(self):
        if self.mean_target < 0:
            raise DomainError("mean_target must be >= 0")
        if len(self.counts) and self.counts.min() < 0:
            raise DomainError("photon counts must be non-negative")

    def __len__(self) -> int:
        return len(self.counts)


def mode_count(filter_bandwidth: float, wavelength: float, window: float) -> float:
    """Number of temporal modes (both polarizations) passed by an optical
    filter of width `filter_bandwidth` around `wavelength` during `window`
    seconds: 2*c*bandwidth*window / wavelength**2.
    """
    if filter_bandwidth <= 0 or wavelength <= 0:
        raise DomainError("filter_bandwidth and wavelength must be positive")
    if window < 0:
        raise DomainError("window must be >= 0")
    return 2.0 * SPEED_OF_LIGHT * filter_bandwidth * window / wavelength**2


def mean_photon_number(params: SourceParams) -> float:
    """Effective mean photon number per mode inferred from optical power:
    efficiency * power * wavelength**3 / (2 * h * c**2 * bandwidth).
    """
    if params.filter_bandwidth <= 0:
        raise DomainError("filter_bandwidth must be positive")
    return (
        params.efficiency
        * params.optical_power
        * params.wavelength**3
        / (2.0 * PLANCK_CONSTANT * SPEED_OF_LIGHT**2 * params.filter_bandwidth)
    )


def quadrature_variance(n: float) -> float:
    """Quadrature variance of a thermal state with mean photon number n,
    in shot-noise units: 2n + 1.
    """
    if n < 0:
        raise DomainError(f"mean photon number must be >= 0, got {n}")
    return 2.0 * n + 1.0


def model_variance_for(params: SourceParams, n_mode: float) -> float:
    """Total output variance (SNU) for a given switch configuration.

    Detector noise, vacuum noise and thermal excess noise are independent
    zero-mean Gaussian contributions, so their variances add.
    """
    if n_mode < 0:
        raise DomainError(f"n_mode must be >= 0, got {n_mode}")
    if params.ase_enabled and not params.lo_enabled:
        raise ConfigurationError(
            "ASE on with LO off is not a homodyne configuration; "
            "direct detection is not modeled"
        )
    var = params.detector_noise_var
    if params.lo_enabled:
        var += 1.0  # vacuum noise enters once the LO is on
    if params.lo_enabled and params.ase_enabled:
        var += 2.0 * n_mode  # thermal excess over vacuum
    return var


def sample_quadratures(
    params: SourceParams, n_mode: float, count: int, seed: int
) -> QuadratureSeries:
    """Draw `count` i.i.d. zero-mean Gaussian quadrature samples.

    The variance follows the switch configuration (see model_variance_for).
    Identical (params, n_mode, count, seed) give bit-identical output.
    """
    if count <= 0:
        raise DomainError(f"count must be positive, got {count}")
    var = model_variance_for(params, n_mode)
    rng = np.random.default_rng(seed)
    values = rng.normal(0.0, np.sqrt(var), size=count)
    return QuadratureSeries(values=values, model_variance=var)


def bose_einstein_pmf(k, mean: float):
    """Probability of k photons in a thermal state with the given mean:
    mean**k / (1 + mean)**(k + 1), evaluated in log space.

    Accepts a scalar or an array of non-negative integers k.
    """
    if mean < 0:
        raise DomainError(f"mean must be >= 0, got {mean}")
    k_arr = np.asarray(k)
    if not np.issubdtype(k_arr.dtype, np.integer):
        if not np.all(k_arr == np.floor(k_arr)):
            raise DomainError("k must be integer-valued")
        k_arr = k_arr.astype(np.int64)
    if k_arr.size and k_arr.min() < 0:
        raise DomainError("k must be >= 0")
    if mean == 0.0:
        out = np.where(k_arr == 0, 1.0, 0.0)
    else:
        log_p = k_arr * np.log(mean) - (k_arr + 1.0) * np.log1p(mean)
        out = np.exp(log_p)
    if np.isscalar(k) or k_arr.ndim == 0:
        return float(out)
    return out


def sample_photon_counts(mean: float, count: int, seed: int) -> PhotonCountSeries:
    """Draw i.i.d. photon counts from the thermal (geometric) distribution
    with the given mean; deterministic under a fixed seed.
    """
    if mean < 0:
        raise DomainError(f"mean must be >= 0, got {mean}")
    if count <= 0:
        raise DomainError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    # Geometric on {1, 2, ...} with success probability 1/(1+mean),
    # shifted to {0, 1, ...}: P(k) = mean**k / (1+mean)**(k+1).
    counts = rng.geometric(1.0 / (1.0 + mean), size=count) - 1
    return PhotonCountSeries(counts=counts, mean_target=mean)


def photon_min_entropy(mean: float) -> float:
    """Min-entropy in bits of one photon-number sample: log2(1 + mean).

    The most probable outcome of the thermal distribution is zero photons,
    with probability 1/(1+mean).
    """
    if mean < 0:
        raise DomainError(f"mean must be >= 0, got {mean}")
    return float(np.log2(1.0 + mean))
