"""Interval counts and interval construction over a layer's parameter range.

The range-split layout puts ``n_ext / 2`` probability-uniform intervals in
each tail (below ``p_start`` and above ``p_stop``) and ``n_int`` equal-width
intervals in between.  The uniform baseline splits ``[a_l, a_h]`` into
``2**n`` equal-width intervals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distribution import EmpiricalDistribution
from .errors import ConfigError, DegenerateDistribution, DegenerateSpan

__all__ = [
    "Scheme",
    "Partition",
    "QuantizationConfig",
    "IntervalSet",
    "interval_counts",
    "build_intervals",
    "uniform_intervals",
]


class Scheme(str, enum.Enum):
    U = "U"
    UVBS = "UVBS"
    RS = "RS"
    RSVBS = "RSVBS"

    @property
    def range_split(self) -> bool:
        return self in (Scheme.RS, Scheme.RSVBS)

    @property
    def vbs(self) -> bool:
        return self in (Scheme.UVBS, Scheme.RSVBS)

    @property
    def code(self) -> int:
        return list(Scheme).index(self)

    @classmethod
    def from_code(cls, code: int) -> "Scheme":
        return list(cls)[code]

    @classmethod
    def parse(cls, name) -> "Scheme":
        if isinstance(name, Scheme):
            return name
        key = str(name).strip().upper()
        if key == "RSVB":  # figure legends use this spelling
            key = "RSVBS"
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown scheme {name!r}; expected one of U, UVBS, RS, RSVBS") from None


class Partition(enum.IntEnum):
    INTERNAL = 0
    EXTERNAL = 1


_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class QuantizationConfig:
    """Per-layer quantization settings.

    Defaults are n=4 code bits, m=8 magnitude bits, ratio 1 and a symmetric
    0.04/0.96 probability split.
    """

    n: int = 4
    m: int = 8
    ratio: float = 1.0
    p_start: float = 0.04
    p_stop: float = 0.96
    scheme: Scheme = Scheme.RSVBS
    k_max: int = 8

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not (2 <= self.n <= self.m <= 16):
            raise ConfigError(f"need 2 <= n ({self.n}) <= m ({self.m}) <= 16")
        if not (self.ratio > 0 and math.isfinite(self.ratio)):
            raise ConfigError(f"ratio must be positive, got {self.ratio}")
        if not (0 < self.p_start < self.p_stop < 1):
            raise ConfigError(f"need 0 < p_start ({self.p_start}) < p_stop ({self.p_stop}) < 1")
        if abs(self.p_start + self.p_stop - 1.0) > _SYMMETRY_TOL:
            raise ConfigError(
                f"asymmetric split: p_stop ({self.p_stop}) must equal 1 - p_start ({1 - self.p_start})"
            )
        if self.k_max < 0:
            raise ConfigError("k_max must be non-negative")

    def replace(self, **changes) -> "QuantizationConfig":
        fields = dict(n=self.n, m=self.m, ratio=self.ratio, p_start=self.p_start,
                      p_stop=self.p_stop, scheme=self.scheme, k_max=self.k_max)
        fields.update(changes)
        if "p_start" in changes and "p_stop" not in changes:
            fields["p_stop"] = 1.0 - fields["p_start"]
        return QuantizationConfig(**fields)

    @property
    def label(self) -> str:
        return f"{self.n}-{self.scheme.value}"


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """``2**n`` contiguous intervals given by ``2**n + 1`` ascending edges.

    Interval ``i`` is ``[edges[i], edges[i+1])``; the last one is closed.
    """

    edges: np.ndarray
    labels: tuple
    n_ext: int
    n_int: int

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.float64)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        if len(self.labels) != e.size - 1 or self.n_ext + self.n_int != e.size - 1:
            raise ValueError("edge/label count mismatch")
        if np.any(np.diff(e) < 0):
            raise ValueError("interval edges must be non-decreasing")

    def __len__(self):
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def internal_mask(self) -> np.ndarray:
        return np.array([lab == Partition.INTERNAL for lab in self.labels])

    def locate(self, values) -> np.ndarray:
        """Index of the interval containing each value.

        Values below the first edge map to 0, values at or above the last
        edge map to the last interval.
        """
        values = np.asarray(values, dtype=np.float64)
        idx = np.searchsorted(self.edges, values, side="right") - 1
        return np.clip(idx, 0, len(self) - 1)


def interval_counts(n: int, ratio: float) -> tuple[int, int]:
    """Return ``(n_ext, n_int)`` for ``2**n`` intervals and internal/external ratio.

    ``n_ext = floor(2**n / (1 + ratio))``, bumped by one when odd so that
    both tails get the same number of intervals.
    """
    if n < 2:
        raise ConfigError("n must be at least 2")
    if not ratio > 0:
        raise ConfigError("ratio must be positive")
    total = 1 << n
    base = math.floor(total / (1.0 + ratio))
    n_ext = base + (base % 2)
    n_int = total - n_ext
    if n_ext < 2 or n_int < 2:
        raise ConfigError(f"ratio {ratio} gives n_ext={n_ext}, n_int={n_int} for n={n}")
    return n_ext, n_int


def uniform_intervals(a_l: float, a_h: float, n: int) -> IntervalSet:
    total = 1 << n
    edges = a_l + (a_h - a_l) * (np.arange(total + 1) / total)
    edges[0], edges[-1] = a_l, a_h
    return IntervalSet(edges, (Partition.INTERNAL,) * total, 0, total)


def build_intervals(dist: EmpiricalDistribution, cfg: QuantizationConfig) -> IntervalSet:
    """Intervals for ``cfg.scheme`` over the range of ``dist``.

    Raises :class:`DegenerateDistribution` for a single-valued set and
    :class:`DegenerateSpan` when the internal region has zero width.
    """
    if dist.is_degenerate:
        raise DegenerateDistribution("all parameters share one value")
    if not cfg.scheme.range_split:
        return uniform_intervals(dist.a_l, dist.a_h, cfg.n)

    n_ext, n_int = interval_counts(cfg.n, cfg.ratio)
    half = n_ext // 2
    d_phi = 2.0 * cfg.p_start / n_ext

    lower = dist.inv_cdf(np.arange(half + 1) * d_phi)
    lower[-1] = dist.inv_cdf(cfg.p_start)
    upper = dist.inv_cdf(np.minimum(cfg.p_stop + np.arange(half + 1) * d_phi, 1.0))
    upper[0] = dist.inv_cdf(cfg.p_stop)
    upper[-1] = dist.a_h
    lo, hi = lower[-1], upper[0]
    if hi <= lo:
        raise DegenerateSpan(f"internal span is empty at p_start={cfg.p_start}")
    step = (hi - lo) / n_int
    inner = lo + np.arange(n_int + 1) * step
    inner[0], inner[-1] = lo, hi

    # shared edges come from one computation each, so contiguity is exact
    edges = np.concatenate([lower, inner[1:-1], upper])
    labels = (Partition.EXTERNAL,) * half + (Partition.INTERNAL,) * n_int + (Partition.EXTERNAL,) * half
    return IntervalSet(edges, labels, n_ext, n_int)
