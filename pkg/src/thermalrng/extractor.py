"""Toeplitz-hashing randomness extraction.

An m-by-n binary Toeplitz matrix built from an (n + m - 1)-bit seed maps
n-bit raw blocks to m-bit output blocks over GF(2).  The module also
carries the leftover-hash accounting that ties the output length to the
measured min-entropy and the extractor failure bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .acquisition import SampleRecord
from .errors import ConfigurationError, ContractError, DomainError, SecurityError


@dataclass(frozen=True)
class BitBlock:
    """A fixed-length bit string, packed MSB-first."""

    bits: np.ndarray
    length: int

    def __post_init__(self):
        expected = (self.length + 7) // 8
        if len(self.bits) != expected:
            raise ContractError(
                f"packed length {len(self.bits)} does not match {self.length} bits"
            )

    @classmethod
    def from_bits(cls, bits) -> "BitBlock":
        arr = np.asarray(bits, dtype=np.uint8)
        return cls(bits=np.packbits(arr), length=arr.size)

    def to_bits(self) -> np.ndarray:
        return np.unpackbits(self.bits, count=self.length)

    def __len__(self) -> int:
        return self.length


@dataclass
class ToeplitzSpec:
    """Extractor geometry plus the seed defining the matrix.

    Treat instances as immutable after construction; the lookup tables are
    built lazily and shared between calls.
    """

    n_in: int
    m_out: int
    seed: np.ndarray
    _lut: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        # m_out > n_in is geometrically fine (the entry formula covers it)
        # but can never clear the entropy-surplus check, so extraction of
        # such a spec is refused by the security accounting instead.
        if self.n_in < 1 or self.m_out < 1:
            raise DomainError(
                f"need n_in >= 1 and m_out >= 1, got n_in={self.n_in}, "
                f"m_out={self.m_out}"
            )
        seed = np.asarray(self.seed, dtype=np.uint8)
        if seed.size != self.n_in + self.m_out - 1:
            raise ContractError(
                f"seed must hold n_in + m_out - 1 = {self.n_in + self.m_out - 1} "
                f"bits, got {seed.size}"
            )
        if seed.size and seed.max() > 1:
            raise DomainError("seed must contain only bits")
        self.seed = seed

    @classmethod
    def from_seed_source(cls, n_in: int, m_out: int, seed_source: int) -> "ToeplitzSpec":
        return cls(n_in, m_out, seed_from_generator(n_in + m_out - 1, seed_source))

    @classmethod
    def from_seed_bytes(cls, n_in: int, m_out: int, raw: bytes) -> "ToeplitzSpec":
        """Seed from raw bytes, MSB-first; extra trailing bits are ignored."""
        need = n_in + m_out - 1
        if len(raw) * 8 < need:
            raise ContractError(
                f"seed material too short: need {need} bits, got {len(raw) * 8}"
            )
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=need)
        return cls(n_in, m_out, bits)

    @property
    def lut(self) -> np.ndarray:
        if self._lut is None:
            self._lut = gf2.toeplitz_lut(self.seed, self.n_in, self.m_out)
        return self._lut


@dataclass(frozen=True)
class SecurityBudget:
    """Entropy accounting inputs for the leftover-hash bound."""

    h_min_per_sample: float
    raw_bits_per_sample: int = 8
    epsilon: float = 2.0**-32

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.h_min_per_sample > self.raw_bits_per_sample:
            raise DomainError("h_min_per_sample cannot exceed raw_bits_per_sample")


@dataclass(frozen=True)
class ExtractResult:
    """Packed extractor output plus stream bookkeeping."""

    bits: np.ndarray  # packed uint8, MSB-first
    bit_count: int
    block_count: int
    residual_bits: int

    def to_bits(self) -> np.ndarray:
        return np.unpackbits(self.bits, count=self.bit_count)


def toeplitz_entry(spec: ToeplitzSpec, i: int, j: int) -> int:
    """Matrix entry (i, j) = seed[m_out - 1 + j - i]; constant on diagonals."""
    if not 0 <= i < spec.m_out:
        raise DomainError(f"row {i} out of range for m_out={spec.m_out}")
    if not 0 <= j < spec.n_in:
        raise DomainError(f"column {j} out of range for n_in={spec.n_in}")
    return int(spec.seed[spec.m_out - 1 + j - i])


def extract_block(block: BitBlock, spec: ToeplitzSpec) -> BitBlock:
    """Multiply one n_in-bit block by the Toeplitz matrix over GF(2).

    Output bit i is the XOR over j of entry(i, j) AND input bit j, so the
    map is linear: extract(a ^ b) = extract(a) ^ extract(b).
    """
    if block.length != spec.n_in:
        raise ContractError(
            f"block has {block.length} bits, extractor expects {spec.n_in}"
        )
    out64 = gf2.xor_lut(block.bits.reshape(1, -1), spec.lut)
    out_bytes = out64.view(np.uint8).reshape(-1)[: (spec.m_out + 7) // 8]
    return BitBlock(bits=out_bytes.copy(), length=spec.m_out)


def _codes_to_block_bytes(
    codes: np.ndarray, resolution_bits: int, n_in: int
) -> tuple[np.ndarray, int]:
    """Serialize samples MSB-first and cut the bitstream into n_in-bit
    blocks, byte-packed per block.  Returns (blocks, residual_bits).
    """
    samples_per_block = n_in // resolution_bits
    n_blocks = len(codes) // samples_per_block
    used = n_blocks * samples_per_block
    residual = (len(codes) - used) * resolution_bits
    if resolution_bits == 8:
        blocks = codes[:used].astype(np.uint8).reshape(n_blocks, samples_per_block)
        if n_in % 8:
            padded = np.zeros((n_blocks, (n_in + 7) // 8), dtype=np.uint8)
            padded[:, : samples_per_block] = blocks
            blocks = padded
    else:
        wide = np.unpackbits(
            codes[:used].astype(">u2").view(np.uint8).reshape(used, 2), axis=1
        )[:, 16 - resolution_bits :]
        blocks = np.packbits(wide.reshape(n_blocks, n_in), axis=1)
    return blocks, residual


def extract_codes(
    codes: np.ndarray, resolution_bits: int, spec: ToeplitzSpec
) -> ExtractResult:
    """Extract from raw sample codes without record metadata."""
    if spec.n_in % resolution_bits != 0:
        raise ConfigurationError(
            f"n_in={spec.n_in} is not a multiple of the {resolution_bits}-bit "
            "sample resolution"
        )
    blocks, residual = _codes_to_block_bytes(
        np.asarray(codes), resolution_bits, spec.n_in
    )
    n_blocks = blocks.shape[0]
    if n_blocks == 0:
        return ExtractResult(
            bits=np.zeros(0, dtype=np.uint8),
            bit_count=0,
            block_count=0,
            residual_bits=residual,
        )
    out64 = gf2.xor_lut(blocks, spec.lut)
    m_bytes = (spec.m_out + 7) // 8
    out_bytes = out64.view(np.uint8).reshape(n_blocks, -1)[:, :m_bytes]
    if spec.m_out % 8 == 0:
        packed = np.ascontiguousarray(out_bytes).reshape(-1)
    else:
        bits = np.unpackbits(out_bytes, axis=1)[:, : spec.m_out]
        packed = np.packbits(bits.reshape(-1))
    return ExtractResult(
        bits=packed,
        bit_count=n_blocks * spec.m_out,
        block_count=n_blocks,
        residual_bits=residual,
    )


def extract_stream(record: SampleRecord, spec: ToeplitzSpec) -> ExtractResult:
    """Extract a whole record: samples are serialized MSB-first into a
    bitstream, consecutive non-overlapping n_in-bit blocks are hashed, and
    the trailing partial block is reported as residual, never padded.
    """
    return extract_codes(record.codes, record.adc.resolution_bits, spec)


def epsilon_for(
    n_in: int, m_out: int, h_min_per_sample: float, raw_bits_per_sample: int
) -> float:
    """Extractor failure bound from the leftover hash lemma:
    epsilon = 2 ** (-(n_in * h_min / raw_bits - m_out) / 2).
    """
    surplus = n_in * h_min_per_sample / raw_bits_per_sample - m_out
    if surplus <= 0:
        raise SecurityError(
            f"no entropy surplus: {n_in} input bits at {h_min_per_sample} bits "
            f"per {raw_bits_per_sample}-bit sample cannot fill {m_out} output bits"
        )
    return 2.0 ** (-surplus / 2.0)


def output_length_for(
    n_in: int, h_min_per_sample: float, raw_bits_per_sample: int, epsilon: float
) -> int:
    """Largest sound output length at a given failure bound:
    m = floor(n_in * h_min / raw_bits - 2 * log2(1 / epsilon)), at least 0.
    """
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    m = math.floor(
        n_in * h_min_per_sample / raw_bits_per_sample - 2.0 * math.log2(1.0 / epsilon)
    )
    return max(m, 0)


def seed_from_generator(length: int, seed_source: int) -> np.ndarray:
    """Deterministic seed-bit expansion for reproducible runs.

    Production setups should supply seed material from an external file
    instead; see ToeplitzSpec.from_seed_bytes.
    """
    if length <= 0:
        raise DomainError(f"length must be positive, got {length}")
    rng = np.random.default_rng(seed_source)
    return rng.integers(0, 2, size=length, dtype=np.uint8)


def measure_throughput(
    codes: np.ndarray,
    resolution_bits: int,
    spec: ToeplitzSpec,
    min_seconds: float = 1.0,
) -> float:
    """Sustained extraction rate in output bits per second.

    Runs one untimed warm-up pass (JIT compilation, table build), then
    repeats full extractions until `min_seconds` of work has been timed.
    """
    result = extract_codes(codes, resolution_bits, spec)
    if result.bit_count == 0:
        raise ContractError("input too short to measure throughput")
    elapsed = 0.0
    produced = 0
    while elapsed < min_seconds:
        t0 = time.perf_counter()
        extract_codes(codes, resolution_bits, spec)
        elapsed += time.perf_counter() - t0
        produced += result.bit_count
    return produced / elapsed
