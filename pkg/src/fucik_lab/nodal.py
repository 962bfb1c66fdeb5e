"""Nodal decompositions of half-eigenfunctions and the inequalities they obey.

All checks return report objects instead of raising, so negative controls
can be run through the same code.  Strict inequalities get an additive
slack of ``SLACK * ell`` for floating point.

``epsilon`` arguments are the length of one period of the scaled weights
(``ScaledWeight.cell``); for a base period of 1 this is the scaling factor.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .spectrum import HalfEigenvalue

__all__ = [
    "SLACK",
    "NodalDecomposition",
    "extract",
    "check_equal_lengths",
    "check_pair_lengths",
    "check_lower_bounds",
    "check_sturm_lengths",
    "averaging_lemma",
    "write_nodal_csv",
]

SLACK = 1e-9


@dataclass(frozen=True)
class NodalDecomposition:
    intervals: tuple[tuple[float, float, int], ...]
    ell: float

    @property
    def k(self) -> int:
        return len(self.intervals)

    @property
    def sign(self) -> int:
        return self.intervals[0][2]

    @property
    def lengths(self) -> list[float]:
        return [r - l for l, r, _ in self.intervals]

    def lengths_of(self, sign: int) -> list[float]:
        return [r - l for l, r, s in self.intervals if s == sign]

    @property
    def pairs(self) -> list[float]:
        """Lengths of consecutive (I_1 u I_2), (I_3 u I_4), ... from the left."""
        L = self.lengths
        return [L[i] + L[i + 1] for i in range(0, len(L) - 1, 2)]

    @property
    def c(self) -> float:
        """Right endpoint of the first pair of nodal domains."""
        return self.intervals[1][1] if self.k >= 2 else self.intervals[0][1]


def extract(e: HalfEigenvalue) -> NodalDecomposition:
    nodes = e.nodes()
    if len(nodes) != e.k + 1:
        raise ValueError(f"expected {e.k + 1} zeros in [0, ell], got {len(nodes)}")
    if any(b <= a for a, b in zip(nodes, nodes[1:])):
        raise ValueError("zeros are not strictly increasing")
    signs = [e.sign * (-1) ** j for j in range(e.k)]
    return NodalDecomposition(tuple(zip(nodes, nodes[1:], signs)), e.ell)


@dataclass(frozen=True)
class EqualLengthReport:
    worst_gap_pos: float
    worst_gap_neg: float
    bound: float
    ok_pos: bool
    ok_neg: bool

    @property
    def ok(self) -> bool:
        return self.ok_pos and self.ok_neg


def _spread(values):
    return max(values) - min(values) if values else 0.0


def check_equal_lengths(d: NodalDecomposition, epsilon: float) -> EqualLengthReport:
    """Same-sign nodal domains differ in length by less than 2 epsilon."""
    gp, gn = _spread(d.lengths_of(1)), _spread(d.lengths_of(-1))
    bound = 2 * epsilon
    slack = SLACK * d.ell
    return EqualLengthReport(gp, gn, bound, gp < bound + slack, gn < bound + slack)


@dataclass(frozen=True)
class PairReport:
    pair_lengths: tuple[float, ...]
    target: float
    deviations: tuple[float, ...]
    bound: float
    doubled: bool

    @property
    def worst(self) -> float:
        return max(self.deviations) if self.deviations else 0.0

    @property
    def ok(self) -> bool:
        return self.worst <= self.bound


def _doubled_pairs(d: NodalDecomposition):
    # odd reflection onto [-ell, ell]: mirrored lengths precede the originals
    L = d.lengths
    full = L[::-1] + L
    return [full[i] + full[i + 1] for i in range(0, len(full), 2)]


def check_pair_lengths(d: NodalDecomposition, epsilon: float, k: int, ell: float) -> PairReport:
    """Each (+, -) pair has length within 4 epsilon of 2 ell / k.

    Odd k is handled on the doubled domain obtained by odd reflection.
    """
    if k != d.k:
        raise ValueError(f"k={k} does not match decomposition with {d.k} domains")
    doubled = k % 2 == 1
    pairs = _doubled_pairs(d) if doubled else d.pairs
    target = 2 * ell / k
    devs = tuple(abs(p - target) for p in pairs)
    return PairReport(tuple(pairs), target, devs, 4 * epsilon + SLACK * ell, doubled)


@dataclass(frozen=True)
class LowerBoundReport:
    min_domain: float
    min_pair: float
    domain_bound: float
    pair_bound: float

    @property
    def ok(self) -> bool:
        return self.min_domain >= self.domain_bound and self.min_pair >= self.pair_bound


def check_lower_bounds(d: NodalDecomposition, t: float, a: float, b: float, k: int,
                       ell: float) -> LowerBoundReport:
    """Nodal domains and adjacent pairs are not shorter than the Sturm bounds.

    For t > 1 the bounds are those of the reflected problem with slope 1/t.
    """
    s = min(t, 1.0 / t)
    slack = SLACK * ell
    dom = ell / k * math.sqrt(s * a / b) - slack
    pair = ell / k * math.sqrt(a / b) * (1 + math.sqrt(s)) - slack
    L = d.lengths
    adj = [x + y for x, y in zip(L, L[1:])]
    return LowerBoundReport(min(L), min(adj) if adj else math.inf, dom, pair)


def check_sturm_lengths(d: NodalDecomposition, lam: float, t: float, a: float, b: float) -> bool:
    """pi/sqrt(mu b) <= |I| <= pi/sqrt(mu a), mu = lam or t*lam by sign."""
    slack = SLACK * d.ell
    for l, r, s in d.intervals:
        mu = lam if s > 0 else t * lam
        if not math.pi / math.sqrt(mu * b) - slack <= r - l <= math.pi / math.sqrt(mu * a) + slack:
            return False
    return True


def averaging_lemma(values: Sequence[float], M: float, epsilon: float) -> bool:
    """Whether every value lies strictly within epsilon of M / K.

    The values must sum to M.  When their pairwise gaps are all below
    epsilon this always returns True.
    """
    vals = list(values)
    if not vals:
        raise ValueError("values: must be non-empty")
    total = math.fsum(vals)
    if abs(total - M) > 1e-12 * max(abs(M), 1.0):
        raise ValueError(f"values sum to {total!r}, expected {M!r}")
    mean = M / len(vals)
    return all(abs(v - mean) < epsilon for v in vals)


def pairwise_gap(values: Sequence[float]) -> float:
    return max((abs(x - y) for x, y in itertools.combinations(values, 2)), default=0.0)


NODAL_COLUMNS = ["k", "sign", "t", "epsilon", "domain_index", "left", "right", "sign_of_u", "length"]


def write_nodal_csv(path, rows) -> None:
    """``rows``: iterable of (HalfEigenvalue, NodalDecomposition)."""
    f = lambda v: format(v, ".17g")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODAL_COLUMNS)
        for e, d in rows:
            eps = e.epsilon if isinstance(e.epsilon, str) else f(float(e.epsilon))
            for j, (l, r, s) in enumerate(d.intervals, 1):
                w.writerow([e.k, e.sign_str, f(e.t), eps, j, f(l), f(r), "+" if s > 0 else "-", f(r - l)])
