"""Parameter -> code mapping and the packed n-bit code stream.

Bit order is LSB-first: code 0 occupies the lowest ``n`` bits of byte 0, the
next code continues at bit ``n``, crossing byte boundaries as needed.  The
final byte is zero-padded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .errors import CorruptionError, EncodingError
from .partition import IntervalSet

__all__ = ["CodeStream", "packed_size", "encode_params", "pack_codes", "unpack_codes", "decode_codes"]


def packed_size(count: int, n: int) -> int:
    """Bytes needed for ``count`` codes of ``n`` bits."""
    return (count * n + 7) // 8


@dataclass(frozen=True)
class CodeStream:
    data: bytes
    n: int
    count: int

    @property
    def nbits(self) -> int:
        return self.count * self.n

    def __len__(self):
        return len(self.data)


def encode_params(params, intervals: IntervalSet) -> np.ndarray:
    """Code (interval index) of each parameter; out-of-range values clamp to the end codes."""
    return intervals.locate(np.asarray(params, dtype=np.float64).ravel()).astype(np.int64)


def pack_codes(codes, n: int) -> CodeStream:
    codes = np.asarray(codes, dtype=np.int64).ravel()
    if not 1 <= n <= 16:
        raise ValueError(f"code width {n} outside 1..16")
    if codes.size and (codes.min() < 0 or codes.max() >= 1 << n):
        raise EncodingError(f"code outside 0..{(1 << n) - 1}")
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8).ravel()
    data = np.packbits(bits, bitorder="little").tobytes()
    return CodeStream(data, n, int(codes.size))


def unpack_codes(stream: CodeStream) -> np.ndarray:
    n, count = stream.n, stream.count
    need = packed_size(count, n)
    if len(stream.data) < need:
        raise CorruptionError(f"code buffer has {len(stream.data)} bytes, {need} needed for {count} codes")
    buf = np.frombuffer(stream.data, dtype=np.uint8, count=need)
    bits = np.unpackbits(buf, bitorder="little")[: count * n].reshape(count, n)
    return (bits.astype(np.int64) << np.arange(n)).sum(axis=1)


def decode_codes(codes, lut: Codebook) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    if codes.size and (codes.min() < 0 or codes.max() >= len(lut)):
        raise CorruptionError("code does not index a LUT entry")
    return lut.levels[codes]
