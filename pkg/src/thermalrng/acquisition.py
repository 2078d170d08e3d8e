"""ADC model and the on-disk format for raw sample runs.

Quantization is an ideal uniform mid-rise quantizer with clipping at the
full-scale edges.  Records persist in a little-endian binary format:

    magic "TRNG" (4 bytes), format version u16 = 1, resolution_bits u8,
    reserved u8, full_scale_min f64, full_scale_max f64, sampling_rate f64,
    count u64, then `count` samples stored as u16 each.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, DomainError, FormatError
from .source import QuadratureSeries

MAGIC = b"TRNG"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBBdddQ")


@dataclass(frozen=True)
class AdcConfig:
    """Converter geometry: output bit width and analog full-scale range."""

    resolution_bits: int
    full_scale_min: float
    full_scale_max: float

    def __post_init__(self):
        if not 1 <= self.resolution_bits <= 16:
            raise ConfigurationError(
                f"resolution_bits must be in [1, 16], got {self.resolution_bits}"
            )
        if not self.full_scale_min < self.full_scale_max:
            raise ConfigurationError(
                f"degenerate full-scale range [{self.full_scale_min}, "
                f"{self.full_scale_max})"
            )

    @property
    def levels(self) -> int:
        return 1 << self.resolution_bits

    @property
    def step(self) -> float:
        return (self.full_scale_max - self.full_scale_min) / self.levels


def adc_spanning(model_variance: float, resolution_bits: int, sigmas: float = 4.0) -> AdcConfig:
    """Full scale set to +-`sigmas` standard deviations of the model variance.

    The default +-4 sigma keeps the clipped fraction of a Gaussian input
    below 1e-4 while using most of the code range.
    """
    if model_variance < 0:
        raise DomainError("model_variance must be >= 0")
    if sigmas <= 0:
        raise DomainError("sigmas must be positive")
    half = sigmas * float(np.sqrt(model_variance))
    if half == 0.0:
        half = 1.0  # constant input: any non-degenerate range works
    return AdcConfig(resolution_bits, -half, half)


@dataclass
class SampleRecord:
    """A digitized run: integer codes plus the ADC and clock metadata."""

    codes: np.ndarray
    adc: AdcConfig
    sampling_rate: float
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        if self.sampling_rate <= 0:
            raise DomainError(f"sampling_rate must be positive, got {self.sampling_rate}")
        codes = np.asarray(self.codes)
        if codes.size and (codes.min() < 0 or codes.max() >= self.adc.levels):
            raise ContractError(
                f"codes exceed the {self.adc.resolution_bits}-bit range"
            )
        self.codes = codes.astype(np.uint16, copy=False)

    def __len__(self) -> int:
        return len(self.codes)


def quantize(
    series: QuadratureSeries,
    adc: AdcConfig,
    sampling_rate: float,
    provenance: str = "",
) -> SampleRecord:
    """Uniform mid-rise quantization with clipping.

    code = clamp(floor((v - min) * 2**bits / (max - min)), 0, 2**bits - 1).
    Output order and length match the input.
    """
    values = np.asarray(series.values)
    if values.size == 0:
        raise ContractError("cannot quantize an empty series")
    span = adc.full_scale_max - adc.full_scale_min
    scaled = (values - adc.full_scale_min) * (adc.levels / span)
    codes = np.floor(scaled)
    np.clip(codes, 0, adc.levels - 1, out=codes)
    return SampleRecord(
        codes=codes.astype(np.uint16),
        adc=adc,
        sampling_rate=sampling_rate,
        provenance=provenance,
    )


def dequantize(record: SampleRecord) -> np.ndarray:
    """Map codes back to the analog mid-points of their quantization bins."""
    adc = record.adc
    return adc.full_scale_min + (record.codes.astype(np.float64) + 0.5) * adc.step


def clipped_fraction(series: QuadratureSeries, adc: AdcConfig) -> float:
    """Fraction of samples outside the ADC full-scale range."""
    v = np.asarray(series.values)
    return float(((v < adc.full_scale_min) | (v >= adc.full_scale_max)).mean())


def write_record(record: SampleRecord, sink) -> int:
    """Serialize a record to a binary stream; returns the byte count."""
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        record.adc.resolution_bits,
        0,
        record.adc.full_scale_min,
        record.adc.full_scale_max,
        record.sampling_rate,
        len(record.codes),
    )
    payload = record.codes.astype("<u2").tobytes()
    sink.write(header)
    sink.write(payload)
    return len(header) + len(payload)


def read_record(source, provenance: str | None = None) -> SampleRecord:
    """Parse a record from a binary stream, validating as it goes.

    Raises FormatError with the offending byte offset on bad magic,
    truncation, or out-of-range codes.
    """
    raw = source.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FormatError(
            f"truncated header: expected {_HEADER.size} bytes, got {len(raw)}",
            offset=len(raw),
        )
    magic, version, bits, _reserved, fs_min, fs_max, rate, count = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    if not 1 <= bits <= 16:
        raise FormatError(f"invalid resolution_bits {bits}", offset=6)
    if not fs_min < fs_max:
        raise FormatError("degenerate full-scale range", offset=8)
    if not rate > 0:
        raise FormatError(f"invalid sampling_rate {rate}", offset=24)
    payload = source.read(2 * count)
    if len(payload) < 2 * count:
        raise FormatError(
            f"truncated payload: expected {2 * count} bytes, got {len(payload)}",
            offset=_HEADER.size + len(payload),
        )
    codes = np.frombuffer(payload, dtype="<u2").astype(np.uint16)
    if count and codes.max() >= (1 << bits):
        bad = int(np.argmax(codes >= (1 << bits)))
        raise FormatError(
            f"code {int(codes[bad])} out of range for {bits}-bit resolution",
            offset=_HEADER.size + 2 * bad,
        )
    if provenance is None:
        provenance = getattr(source, "name", "stream")
    return SampleRecord(
        codes=codes,
        adc=AdcConfig(bits, fs_min, fs_max),
        sampling_rate=rate,
        provenance=str(provenance),
    )


def save_record(record: SampleRecord, path) -> int:
    with open(path, "wb") as fh:
        return write_record(record, fh)


def load_record(path) -> SampleRecord:
    with open(path, "rb") as fh:
        return read_record(fh, provenance=str(path))


def record_from_bytes(data: bytes) -> SampleRecord:
    return read_record(io.BytesIO(data), provenance="bytes")
