"""Source-model tests: closed-form formulas against direct arithmetic, and
the seeded samplers against their distributional targets."""

import numpy as np
import pytest
from scipy import stats

from thermalrng import (
    PhotonCountSeries,
    SourceParams,
    bose_einstein_pmf,
    mean_photon_number,
    mode_count,
    model_variance_for,
    photon_min_entropy,
    quadrature_variance,
    sample_photon_counts,
    sample_quadratures,
)
from thermalrng.errors import ConfigurationError, DomainError

C = 299_792_458.0
H = 6.626_070_15e-34

PAPER = SourceParams(
    wavelength=1542e-9,
    filter_bandwidth=0.8e-9,
    optical_power=29.0e-6,
    efficiency=0.5,
    detector_noise_var=0.62,
)


class TestModeCount:
    def test_reference_inputs(self):
        # direct arithmetic on the definition, kept independent of the module
        expected = 2.0 * C * 0.8e-9 * 1.0 / (1542e-9) ** 2
        got = mode_count(0.8e-9, 1542e-9, 1.0)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(2.017e11, rel=1e-3)

    def test_linear_in_bandwidth(self):
        one = mode_count(0.8e-9, 1542e-9, 1.0)
        two = mode_count(1.6e-9, 1542e-9, 1.0)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_zero_window(self):
        assert mode_count(0.8e-9, 1542e-9, 0.0) == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            mode_count(-1e-9, 1542e-9, 1.0)
        with pytest.raises(DomainError):
            mode_count(0.8e-9, 0.0, 1.0)
        with pytest.raises(DomainError):
            mode_count(0.8e-9, 1542e-9, -1.0)


class TestMeanPhotonNumber:
    def test_reference_setup_gives_about_555(self):
        n = mean_photon_number(PAPER)
        assert n == pytest.approx(555, rel=0.01)
        # independent arithmetic on the definition
        expected = 0.5 * 29.0e-6 * (1542e-9) ** 3 / (2 * H * C**2 * 0.8e-9)
        assert n == pytest.approx(expected, rel=1e-12)

    def test_no_light(self):
        dark = SourceParams(1542e-9, 0.8e-9, 0.0, 0.5)
        assert mean_photon_number(dark) == 0.0

    def test_linear_in_efficiency(self):
        half = SourceParams(1542e-9, 0.8e-9, 29.0e-6, 0.25)
        assert mean_photon_number(half) == pytest.approx(
            mean_photon_number(PAPER) / 2, rel=1e-12
        )

    def test_zero_bandwidth_rejected_at_construction(self):
        with pytest.raises(DomainError):
            SourceParams(1542e-9, 0.0, 29.0e-6, 0.5)


class TestQuadratureVariance:
    def test_vacuum(self):
        assert quadrature_variance(0) == 1.0

    def test_reference_photon_number(self):
        assert quadrature_variance(481) == 963.0

    def test_substitution(self):
        assert quadrature_variance(555) == 1111.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            quadrature_variance(-1e-9)


class TestSampleQuadratures:
    def test_detector_noise_only(self):
        params = SourceParams(
            1542e-9, 0.8e-9, 29e-6, 0.5, 0.62, lo_enabled=False, ase_enabled=False
        )
        series = sample_quadratures(params, 0.0, 10**6, seed=101)
        assert series.model_variance == 0.62
        assert np.var(series.values) == pytest.approx(0.62, rel=0.03)

    def test_vacuum_only(self):
        params = SourceParams(
            1542e-9, 0.8e-9, 29e-6, 0.5, 0.0, lo_enabled=True, ase_enabled=False
        )
        series = sample_quadratures(params, 0.0, 10**6, seed=102)
        assert series.model_variance == 1.0
        assert np.var(series.values) == pytest.approx(1.0, rel=0.03)

    def test_full_configuration(self):
        series = sample_quadratures(PAPER, 481.0, 10**6, seed=103)
        assert series.model_variance == pytest.approx(963.62)
        assert np.var(series.values) == pytest.approx(963.62, rel=0.03)

    def test_variance_additivity_oracle(self):
        # independent components drawn separately must reproduce the summed
        # variance the one-shot sampler targets
        rng = np.random.default_rng(104)
        n = 10**6
        parts = (
            rng.normal(0, np.sqrt(0.62), n)
            + rng.normal(0, 1.0, n)
            + rng.normal(0, np.sqrt(2 * 481.0), n)
        )
        series = sample_quadratures(PAPER, 481.0, n, seed=105)
        assert np.var(series.values) == pytest.approx(np.var(parts), rel=0.01)

    def test_deterministic_per_seed(self):
        a = sample_quadratures(PAPER, 481.0, 10**4, seed=7)
        b = sample_quadratures(PAPER, 481.0, 10**4, seed=7)
        assert np.array_equal(a.values, b.values)

    def test_distinct_seeds_uncorrelated(self):
        n = 10**6
        a = sample_quadratures(PAPER, 481.0, n, seed=1).values
        b = sample_quadratures(PAPER, 481.0, n, seed=2).values
        r = np.corrcoef(a, b)[0, 1]
        assert abs(r) < 1e-3

    def test_normality(self):
        series = sample_quadratures(PAPER, 481.0, 10**6, seed=106)
        assert abs(stats.skew(series.values)) < 0.01
        assert abs(stats.kurtosis(series.values)) < 0.02

    def test_ase_without_lo_unsupported(self):
        params = SourceParams(
            1542e-9, 0.8e-9, 29e-6, 0.5, 0.62, lo_enabled=False, ase_enabled=True
        )
        with pytest.raises(ConfigurationError):
            sample_quadratures(params, 481.0, 100, seed=1)

    def test_bad_count(self):
        with pytest.raises(DomainError):
            sample_quadratures(PAPER, 481.0, 0, seed=1)

    def test_monotone_in_power(self):
        variances = []
        for power in (1e-6, 5e-6, 29e-6, 100e-6):
            p = SourceParams(1542e-9, 0.8e-9, power, 0.5, 0.62)
            variances.append(quadrature_variance(mean_photon_number(p)))
        assert all(a < b for a, b in zip(variances, variances[1:]))


class TestBoseEinstein:
    def test_zero_photons_any_mean(self):
        for mean in (0.3, 1.0, 481.0, 7.8e5):
            assert bose_einstein_pmf(0, mean) == pytest.approx(1 / (1 + mean), rel=1e-12)

    def test_vacuum(self):
        assert bose_einstein_pmf(0, 0.0) == 1.0
        assert bose_einstein_pmf(3, 0.0) == 0.0

    def test_hand_checkable_point(self):
        # 1**3 / 2**4
        assert bose_einstein_pmf(3, 1.0) == pytest.approx(1 / 16, rel=1e-12)

    def test_partial_sum_matches_closed_form(self):
        ks = np.arange(10**4 + 1)
        for mean in (0.5, 5.0, 1000.0):
            partial = bose_einstein_pmf(ks, mean).sum()
            closed = 1.0 - (mean / (1.0 + mean)) ** (len(ks))
            assert partial == pytest.approx(closed, abs=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            bose_einstein_pmf(-1, 1.0)
        with pytest.raises(DomainError):
            bose_einstein_pmf(0, -0.5)
        with pytest.raises(DomainError):
            bose_einstein_pmf(1.5, 1.0)


class TestPhotonCounts:
    def test_zero_mean_all_zero(self):
        series = sample_photon_counts(0.0, 1000, seed=1)
        assert not series.counts.any()

    def test_moments(self):
        series = sample_photon_counts(5.0, 10**6, seed=2)
        # thermal (geometric) variance is mean**2 + mean = 30
        assert series.counts.mean() == pytest.approx(5.0, abs=3 * np.sqrt(30 / 10**6))

    def test_zero_fraction_matches_pmf(self):
        series = sample_photon_counts(5.0, 10**6, seed=3)
        p0 = bose_einstein_pmf(0, 5.0)
        sigma = np.sqrt(p0 * (1 - p0) / 10**6)
        assert (series.counts == 0).mean() == pytest.approx(p0, abs=3 * sigma)

    def test_deterministic(self):
        a = sample_photon_counts(5.0, 1000, seed=4)
        b = sample_photon_counts(5.0, 1000, seed=4)
        assert np.array_equal(a.counts, b.counts)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            sample_photon_counts(-1.0, 10, seed=0)
        with pytest.raises(DomainError):
            sample_photon_counts(1.0, 0, seed=0)


class TestPhotonMinEntropy:
    def test_vacuum(self):
        assert photon_min_entropy(0.0) == 0.0

    def test_one_photon_mean(self):
        assert photon_min_entropy(1.0) == 1.0

    def test_high_rate_example(self):
        assert photon_min_entropy(7.8e5) == pytest.approx(19.6, abs=0.05)

    def test_identity_with_pmf(self):
        for mean in (0.5, 5.0, 481.0):
            assert photon_min_entropy(mean) == pytest.approx(
                -np.log2(bose_einstein_pmf(0, mean)), rel=1e-12
            )


def test_model_variance_switches():
    base = dict(
        wavelength=1542e-9, filter_bandwidth=0.8e-9, optical_power=29e-6,
        efficiency=0.5, detector_noise_var=0.62,
    )
    off = SourceParams(**base, lo_enabled=False, ase_enabled=False)
    lo = SourceParams(**base, lo_enabled=True, ase_enabled=False)
    both = SourceParams(**base, lo_enabled=True, ase_enabled=True)
    assert model_variance_for(off, 481.0) == 0.62
    assert model_variance_for(lo, 481.0) == 1.62
    assert model_variance_for(both, 481.0) == pytest.approx(963.62)


def test_photon_series_validation():
    with pytest.raises(DomainError):
        PhotonCountSeries(counts=np.array([-1]), mean_target=1.0)
