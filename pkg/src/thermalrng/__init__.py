"""Thermal-light RNG chain: simulation, digitization, entropy analysis,
Toeplitz extraction, and statistical validation."""

from .acquisition import (
    AdcConfig,
    SampleRecord,
    adc_spanning,
    dequantize,
    load_record,
    quantize,
    read_record,
    save_record,
    write_record,
)
from .analysis import (
    CalibrationReport,
    EntropyReport,
    Histogram,
    autocorrelation,
    calibrate_snu,
    chi_square_gaussian,
    histogram_codes,
    min_entropy,
    min_entropy_analytic,
)
from .battery import (
    BatteryConfig,
    BatteryReport,
    IMPLEMENTED_TESTS,
    load_pvalues,
    merge_external,
    partition_bits,
    run_battery,
)
from .errors import (
    ApplicabilityError,
    CalibrationError,
    ConfigurationError,
    ContractError,
    DomainError,
    FormatError,
    SecurityError,
    ThermalRngError,
)
from .extractor import (
    BitBlock,
    ExtractResult,
    SecurityBudget,
    ToeplitzSpec,
    epsilon_for,
    extract_block,
    extract_codes,
    extract_stream,
    measure_throughput,
    output_length_for,
    seed_from_generator,
    toeplitz_entry,
)
from .source import (
    PLANCK_CONSTANT,
    SPEED_OF_LIGHT,
    PhotonCountSeries,
    QuadratureSeries,
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

__version__ = "0.1.0"
