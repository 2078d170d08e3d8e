"""Packed GF(2) machinery behind the Toeplitz hash.

A block multiply y = T x over GF(2) is evaluated with one 256-entry lookup
table per input byte position: LUT[p][v] is the XOR of the packed matrix
columns selected by the bits of byte value v at position p.  Extracting a
block then costs one table lookup and one wide XOR per input byte.

The batch kernel is JIT-compiled with numba when available (set
THERMALRNG_NO_NUMBA=1 to force the pure-numpy path).
"""

from __future__ import annotations

import os
import warnings

import numpy as np

# Blocks per cache-friendly slice: keeps the 8 KiB LUT row resident while
# streaming the output accumulator through L2.
_CHUNK = 4096

# The threading-layer probe warns on hosts without a recent TBB; any layer
# (including workqueue) is fine for this kernel, so keep the notice quiet.
warnings.filterwarnings(
    "ignore", message="The TBB threading layer requires TBB version"
)

if os.environ.get("THERMALRNG_NO_NUMBA"):
    _numba = None
else:
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - exercised via env flag instead
        _numba = None

HAVE_NUMBA = _numba is not None


def pack_bits(bits) -> np.ndarray:
    """Pack a 0/1 array into bytes, MSB first."""
    return np.packbits(np.asarray(bits, dtype=np.uint8))


def unpack_bits(packed, count: int) -> np.ndarray:
    """Unpack MSB-first bytes into a 0/1 array of length `count`."""
    return np.unpackbits(np.asarray(packed, dtype=np.uint8), count=count)


def toeplitz_lut(seed_bits: np.ndarray, n_in: int, m_out: int) -> np.ndarray:
    """Byte-position lookup tables for the Toeplitz matrix of a seed.

    Column j of the matrix (entries seed[m_out-1+j-i], i = 0..m_out-1) is
    the reversed seed window seed[j : j+m_out].  Returns an array of shape
    (ceil(n_in/8), 256, ceil(m_out/64)) uint64; input bits are consumed
    MSB-first within each byte, and bits beyond n_in in the final byte map
    to zero columns so zero-padded input is harmless.
    """
    seed_bits = np.asarray(seed_bits, dtype=np.uint8)
    n_bytes = (n_in + 7) // 8
    words = (m_out + 63) // 64
    windows = np.lib.stride_tricks.sliding_window_view(seed_bits, m_out)[:n_in]
    cols_packed = np.packbits(windows[:, ::-1], axis=1)  # (n_in, ceil(m/8))
    cols = np.zeros((n_bytes * 8, words * 8), dtype=np.uint8)
    cols[:n_in, : cols_packed.shape[1]] = cols_packed
    cols64 = cols.reshape(n_bytes, 8, words * 8).view(np.uint64)  # (n_bytes, 8, words)

    lut = np.zeros((n_bytes, 256, words), dtype=np.uint64)
    for v in range(1, 256):
        q = (v & -v).bit_length() - 1  # lowest set bit; byte bit q is column 8p+(7-q)
        lut[:, v] = lut[:, v & (v - 1)] ^ cols64[:, 7 - q]
    return lut


if HAVE_NUMBA:

    @_numba.njit(cache=True, parallel=True)
    def _xor_lut_numba(blocks, lut, out):  # pragma: no cover - compiled
        n_blocks, n_bytes = blocks.shape
        words = out.shape[1]
        n_chunks = (n_blocks + _CHUNK - 1) // _CHUNK
        for c in _numba.prange(n_chunks):
            lo = c * _CHUNK
            hi = min(lo + _CHUNK, n_blocks)
            for p in range(n_bytes):
                table = lut[p]
                for r in range(lo, hi):
                    v = blocks[r, p]
                    for w in range(words):
                        out[r, w] ^= table[v, w]


def _xor_lut_numpy(blocks, lut, out):
    n_blocks, n_bytes = blocks.shape
    for lo in range(0, n_blocks, 8 * _CHUNK):
        hi = min(lo + 8 * _CHUNK, n_blocks)
        acc = out[lo:hi]
        chunk = blocks[lo:hi]
        for p in range(n_bytes):
            acc ^= lut[p, chunk[:, p]]


def xor_lut(blocks: np.ndarray, lut: np.ndarray) -> np.ndarray:
    """Apply the lookup tables to a batch of byte-packed input blocks.

    blocks: (n_blocks, n_bytes) uint8.  Returns (n_blocks, words) uint64
    whose byte view is the MSB-first packed output of each block.
    """
    blocks = np.ascontiguousarray(blocks, dtype=np.uint8)
    out = np.zeros((blocks.shape[0], lut.shape[2]), dtype=np.uint64)
    if blocks.shape[0] == 0:
        return out
    if HAVE_NUMBA:
        _xor_lut_numba(blocks, lut, out)
    else:
        _xor_lut_numpy(blocks, lut, out)
    return out
