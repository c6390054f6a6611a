"""Fixed-point formats, rounding and an integer CORDIC for magnitude/phase.

Values are stored as plain integers (``raw``) together with a :class:`QFormat`;
the real value is ``raw * 2**-frac_bits``.  Conversion from reals rounds half
away from zero and saturates at the format bounds, never wraps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "QFormat",
    "FixedValue",
    "Q1_7",
    "round_half_away",
    "quantize_raw",
    "to_fixed",
    "from_fixed",
    "cordic_gain",
    "cordic_magnitude_phase",
]


@dataclass(frozen=True)
class QFormat:
    """A two's-complement (or unsigned) fixed-point format.

    ``QFormat(8, 7)`` is the signed Q1.7 format used for 8-bit weights and
    biases: resolution 2**-7, range [-1, 1 - 2**-7].
    """

    total_bits: int
    frac_bits: int
    signed: bool = True

    def __post_init__(self):
        if not (1 <= self.frac_bits <= self.total_bits <= 32):
            raise ConfigError(
                f"invalid QFormat: need 1 <= frac_bits ({self.frac_bits}) "
                f"<= total_bits ({self.total_bits}) <= 32"
            )

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def raw_max(self) -> int:
        if self.signed:
            return (1 << (self.total_bits - 1)) - 1
        return (1 << self.total_bits) - 1

    @property
    def min_value(self) -> float:
        return self.raw_min * self.resolution

    @property
    def max_value(self) -> float:
        return self.raw_max * self.resolution

    @classmethod
    def q1(cls, m: int) -> "QFormat":
        """Signed Q1.(m-1): one sign/integer bit, ``m - 1`` fractional bits."""
        return cls(m, m - 1, True)

    def __str__(self):
        kind = "Q" if self.signed else "UQ"
        return f"{kind}{self.total_bits - self.frac_bits}.{self.frac_bits}"


Q1_7 = QFormat(8, 7)


@dataclass(frozen=True)
class FixedValue:
    raw: int
    format: QFormat

    def __post_init__(self):
        if not (self.format.raw_min <= self.raw <= self.format.raw_max):
            raise DataError(f"raw {self.raw} does not fit {self.format}")

    def __float__(self):
        return from_fixed(self)


def round_half_away(a):
    """Round to nearest integer, ties away from zero.

    Works on scalars and arrays; returns float(s) holding integral values.
    ``floor(|a|) + (frac >= 0.5)`` is used instead of ``floor(|a| + 0.5)``
    because the latter misrounds 0.49999999999999994.
    """
    a = np.asarray(a, dtype=np.float64)
    mag = np.abs(a)
    fl = np.floor(mag)
    out = np.sign(a) * (fl + (mag - fl >= 0.5))
    return out if out.ndim else float(out)


def quantize_raw(x, fmt: QFormat) -> np.ndarray:
    """Vectorized real -> raw integer conversion (round half away, saturate)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataError("cannot convert non-finite value to fixed point")
    raw = round_half_away(x * (1 << fmt.frac_bits))
    raw = np.clip(raw, fmt.raw_min, fmt.raw_max)
    return np.asarray(raw, dtype=np.int64)


def to_fixed(x: float, fmt: QFormat) -> FixedValue:
    return FixedValue(int(quantize_raw(x, fmt)), fmt)


def from_fixed(v: FixedValue) -> float:
    # math.ldexp is exact for every raw that fits in 32 bits
    return math.ldexp(v.raw, -v.format.frac_bits)


# --------------------------------------------------------------------------
# CORDIC (vectoring mode)
# --------------------------------------------------------------------------

_ANGLE_FRAC = 40  # fractional bits of the internal angle accumulator
_GAIN_FRAC = 40


@lru_cache(maxsize=None)
def _atan_table(iterations: int) -> tuple:
    return tuple(round(math.atan(2.0 ** -i) * (1 << _ANGLE_FRAC)) for i in range(iterations))


@lru_cache(maxsize=None)
def cordic_gain(iterations: int) -> float:
    """Accumulated CORDIC gain prod(sqrt(1 + 2**-2i)) for ``iterations`` steps."""
    g = 1.0
    for i in range(iterations):
        g *= math.sqrt(1.0 + 2.0 ** (-2 * i))
    return g


@lru_cache(maxsize=None)
def _inv_gain_raw(iterations: int) -> int:
    return round((1 << _GAIN_FRAC) / cordic_gain(iterations))


_PI_RAW = math.floor(math.pi * (1 << _ANGLE_FRAC))  # floor keeps the result <= math.pi


def cordic_magnitude_phase(re: FixedValue, im: FixedValue, iterations: int = 16,
                           guard_bits: int = 16) -> tuple[float, float]:
    """Magnitude and phase of ``re + j*im`` with shift-add CORDIC iterations.

    Both operands must share a format.  The loop runs on integers only; the
    result is returned as real numbers for convenience.  ``guard_bits`` extra
    LSBs are appended to the operands so the shifts do not starve small
    vectors.  Phase lies in (-pi, pi]; the zero vector gives (0.0, 0.0).
    """
    if iterations < 1:
        raise ConfigError("CORDIC needs at least one iteration")
    if re.format != im.format:
        raise ConfigError("re and im must share a QFormat")
    frac = re.format.frac_bits + guard_bits
    x = re.raw << guard_bits
    y = im.raw << guard_bits
    if x == 0 and y == 0:
        return 0.0, 0.0

    # rotate into the right half-plane by +-pi
    z = 0
    if x < 0:
        z = _PI_RAW if y >= 0 else -_PI_RAW
        x, y = -x, -y

    atans = _atan_table(iterations)
    for i in range(iterations):
        if y > 0:
            x, y = x + (y >> i), y - (x >> i)
            z += atans[i]
        else:
            x, y = x - (y >> i), y + (x >> i)
            z -= atans[i]

    mag_raw = (x * _inv_gain_raw(iterations) + (1 << (_GAIN_FRAC - 1))) >> _GAIN_FRAC
    # the input's half-plane fixes which side of the branch cut the answer is on
    if im.raw >= 0:
        z = min(z, _PI_RAW)
    else:
        z = max(z, -_PI_RAW + 1)
    return math.ldexp(mag_raw, -frac), math.ldexp(z, -_ANGLE_FRAC)
