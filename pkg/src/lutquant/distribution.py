"""Empirical cumulative distribution of a layer's parameters.

The CDF is the piecewise-linear interpolant through the order statistics,
``(sorted_values[j], j / (N - 1))``.  It is continuous and invertible on
probabilities, which the interval construction needs.  Duplicate values make
the curve jump; the inverse is then flat and returns the shared value.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, DegenerateDistribution

__all__ = ["EmpiricalDistribution"]

_KNOT_SNAP = 1e-9


class EmpiricalDistribution:
    """Sorted copy of a parameter set with ``cdf`` / ``inv_cdf``.

    >>> d = EmpiricalDistribution([0.5, -0.5, 0.0])
    >>> d.cdf(0.25), d.inv_cdf(0.75)
    (0.75, 0.25)
    """

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=np.float64).ravel())
        if v.size == 0:
            raise DataError("empty parameter set")
        if not np.all(np.isfinite(v)):
            raise DataError("parameter set contains non-finite values")
        v.setflags(write=False)
        self._v = v

    @property
    def sorted_values(self) -> np.ndarray:
        return self._v

    @property
    def count(self) -> int:
        return self._v.size

    @property
    def a_l(self) -> float:
        return float(self._v[0])

    @property
    def a_h(self) -> float:
        return float(self._v[-1])

    @property
    def is_degenerate(self) -> bool:
        """True when the set has one element or a single distinct value."""
        return self.count < 2 or self.a_l == self.a_h

    def _require_spread(self):
        if self.count < 2:
            raise DegenerateDistribution("need at least two parameters for a CDF")

    def cdf(self, x):
        """Probability that a parameter is <= x under the interpolated CDF."""
        self._require_spread()
        v = self._v
        n1 = v.size - 1
        x = np.asarray(x, dtype=np.float64)
        j = np.searchsorted(v, x, side="right") - 1
        jc = np.clip(j, 0, n1 - 1)
        lo, hi = v[jc], v[jc + 1]
        width = hi - lo
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(width > 0, (x - lo) / np.where(width > 0, width, 1.0), 0.0)
        p = (jc + frac) / n1
        p = np.where(j < 0, 0.0, np.where(j >= n1, 1.0, p))
        return p if p.ndim else float(p)

    def inv_cdf(self, p):
        """Parameter value at probability ``p`` in [0, 1]."""
        self._require_spread()
        p = np.asarray(p, dtype=np.float64)
        if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
            raise DataError("probability outside [0, 1]")
        v = self._v
        n1 = v.size - 1
        t = p * n1
        # land exactly on order statistics when p is a knot probability
        rt = np.round(t)
        t = np.where(np.abs(t - rt) < _KNOT_SNAP, rt, t)
        j = np.clip(np.floor(t).astype(np.int64), 0, n1 - 1)
        frac = t - j
        x = np.where(frac == 0, v[j],
                     np.where(frac == 1, v[j + 1], v[j] + frac * (v[j + 1] - v[j])))
        return x if x.ndim else float(x)

    def __repr__(self):
        return f"EmpiricalDistribution(N={self.count}, range=[{self.a_l:g}, {self.a_h:g}])"
