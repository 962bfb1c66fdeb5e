"""Periodic piecewise-constant weights and their rescalings.

A base weight lives on one period ``[0, period)`` as a step function.  Its
rescaling ``x -> w(x / eps)`` repeats the pattern every ``eps * period``
length units.  Cells are half-open ``[x_{i-1}, x_i)``, so the value at an
interior breakpoint is the right-limit value.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["PiecewiseConstantWeight", "ScaledWeight", "average", "scale", "value_at", "constant"]


@dataclass(frozen=True)
class PiecewiseConstantWeight:
    """Positive step function on one period.

    ``breakpoints`` must start at 0 and end at the period; ``values[i]`` is
    the value on ``[breakpoints[i], breakpoints[i+1])``.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) < 2:
            raise ValueError("breakpoints: need at least two entries")
        if bp[0] != 0.0:
            raise ValueError("breakpoints: first entry must be 0")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints: must be strictly increasing")
        if len(vals) != len(bp) - 1:
            raise ValueError("values: expected one value per cell")
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("values: weights must be finite and positive")

    @property
    def period(self) -> float:
        return self.breakpoints[-1]

    @property
    def lower(self) -> float:
        return min(self.values)

    @property
    def upper(self) -> float:
        return max(self.values)

    @classmethod
    def from_cells(cls, period: float, breakpoints: Sequence[float], values: Sequence[float]):
        bp = list(breakpoints)
        if not bp or bp[-1] != period:
            raise ValueError("breakpoints: last entry must equal period")
        return cls(tuple(bp), tuple(values))

    def check_bounds(self, a: float, b: float) -> None:
        if not 0 < a <= b:
            raise ValueError("bounds: need 0 < a <= b")
        if self.lower < a or self.upper > b:
            raise ValueError(f"values: outside declared bounds [{a}, {b}]")

    def __call__(self, y: float) -> float:
        y = y % self.period
        i = bisect.bisect_right(self.breakpoints, y) - 1
        return self.values[min(i, len(self.values) - 1)]


def constant(c: float, period: float = 1.0) -> PiecewiseConstantWeight:
    return PiecewiseConstantWeight((0.0, period), (c,))


def average(w: PiecewiseConstantWeight) -> float:
    """Mean value of ``w`` over one period."""
    bp = w.breakpoints
    total = math.fsum(c * (x1 - x0) for c, x0, x1 in zip(w.values, bp, bp[1:]))
    return total / w.period


@dataclass(frozen=True)
class ScaledWeight:
    """The weight ``x -> base(x / epsilon)`` realized on ``[0, domain_length]``.

    ``breakpoints`` and ``values`` hold the realized step function; a final
    partial period is truncated at the domain end.  :meth:`realize` gives the
    same function on a longer window (used when shooting past the domain).
    """

    base: PiecewiseConstantWeight
    epsilon: float
    domain_length: float
    breakpoints: np.ndarray = field(repr=False, compare=False)
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def cell(self) -> float:
        """Length of one realized period, ``epsilon * base.period``."""
        return self.epsilon * self.base.period

    @property
    def lower(self) -> float:
        return self.base.lower

    @property
    def upper(self) -> float:
        return self.base.upper

    def realize(self, upto: float) -> tuple[np.ndarray, np.ndarray]:
        return _realize(self.base, self.epsilon, upto)

    def __call__(self, x: float) -> float:
        return value_at(self, x)


def _realize(base: PiecewiseConstantWeight, eps: float, upto: float):
    bp = np.asarray(base.breakpoints[:-1])
    vals = np.asarray(base.values)
    P = base.period
    nper = int(math.ceil(upto / (eps * P) * (1 + 1e-14))) + 1
    offsets = np.arange(nper)[:, None] * P
    pts = ((offsets + bp[None, :]) * eps).ravel()
    v = np.tile(vals, nper)
    # drop cells starting at or past the window end, up to rounding
    keep = pts < upto * (1 - 1e-14) if upto > 0 else pts < upto
    keep[0] = True
    pts, v = pts[keep], v[keep]
    return np.append(pts, upto), v


def scale(w: PiecewiseConstantWeight, epsilon: float, ell: float) -> ScaledWeight:
    """Realize ``x -> w(x / epsilon)`` on ``[0, ell]``."""
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError("epsilon: must be positive")
    if not (ell > 0 and math.isfinite(ell)):
        raise ValueError("ell: must be positive")
    bp, vals = _realize(w, epsilon, ell)
    bp.flags.writeable = False
    vals.flags.writeable = False
    return ScaledWeight(w, float(epsilon), float(ell), bp, vals)


def value_at(w: ScaledWeight, x: float) -> float:
    """Step value at ``x``; right-limit at interior breakpoints."""
    if not 0 <= x <= w.domain_length:
        raise ValueError(f"x: {x} outside [0, {w.domain_length}]")
    i = int(np.searchsorted(w.breakpoints, x, side="right")) - 1
    return float(w.values[min(i, len(w.values) - 1)])
