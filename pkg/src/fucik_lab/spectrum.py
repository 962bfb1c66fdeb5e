"""Half-eigenvalues, Sturm brackets and Fucik curves.

``solve_half_eigenvalue`` finds the unique lam with z_k(lam) = ell by
bisection, where z_k is the k-th zero of the shooting solution.  z_k is
strictly decreasing in lam, so the root is unique.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import shooting
from .shooting import Medium, Piece, ShootingError, _sign
from .weights import ScaledWeight, constant, scale

__all__ = [
    "SolverError",
    "Bracket",
    "HalfEigenvalue",
    "CurvePoint",
    "bracket",
    "solve_half_eigenvalue",
    "limit_half_eigenvalue",
    "trivial_curves",
    "trace_curve",
    "symmetry_check",
    "default_t_grid",
    "T_MIN",
    "T_MAX",
    "constant_pair",
    "hump_counts",
]

T_MIN, T_MAX = 1e-4, 1e4
MAX_ITER = 200
# bracket padding, absorbs rounding when lo == hi
PAD = 1e-9


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Bracket:
    lambda_lo: float
    lambda_hi: float


@dataclass
class HalfEigenvalue:
    k: int
    sign: int
    t: float
    lam: float
    ell: float
    epsilon: Union[float, str] = "limit"
    zeros: list[float] = field(default_factory=list)
    pieces: list[Piece] = field(default_factory=list, repr=False)
    scale: float = 1.0
    end_value: float = 0.0
    iterations: int = 0

    @property
    def alpha(self) -> float:
        return self.lam

    @property
    def beta(self) -> float:
        return self.t * self.lam

    @property
    def sign_str(self) -> str:
        return "+" if self.sign > 0 else "-"

    def nodes(self) -> list[float]:
        """All k+1 zeros in [0, ell], endpoints included."""
        return [0.0, *self.zeros, self.ell]

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, float))
        out = np.zeros_like(x)
        for p in self.pieces:
            sel = (x >= p.left) & (x <= p.right)
            out[sel] = p(x[sel])
        return out


def _check_k_t(k, t):
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError("k: must be a positive integer")
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("t: must be positive")


def bracket(k: int, t: float, sign, a: float, b: float, ell: float) -> Bracket:
    """Sturm bracket valid for every weight pair with values in [a, b]."""
    _check_k_t(k, t)
    _sign(sign)
    if not 0 < a <= b:
        raise ValueError("a, b: need 0 < a <= b")
    if not ell > 0:
        raise ValueError("ell: must be positive")
    base = k * k * math.pi ** 2 / (ell * ell)
    return Bracket(base / (b * max(1.0, t)), base / (a * min(1.0, t)))


def solve_half_eigenvalue(k: int, t: float, sign, m: ScaledWeight, n: ScaledWeight,
                          ell: float, tol: float = 1e-12, *,
                          bounds: Optional[tuple[float, float]] = None) -> HalfEigenvalue:
    """Bisection on z_k(lam) - ell inside the Sturm bracket.

    ``bounds`` defaults to the smallest and largest values taken by m and n.
    """
    _check_k_t(k, t)
    sgn = _sign(sign)
    if not tol > 0:
        raise ValueError("tol: must be positive")
    med = Medium(m, n, ell)
    a, b = bounds if bounds is not None else (med.lower, med.upper)
    br = bracket(k, t, sgn, a, b, ell)
    lo, hi = br.lambda_lo * (1 - PAD), br.lambda_hi * (1 + PAD)
    cap = shooting.zero_cap(lo, k, t, a, ell)

    def g(lam):
        return shooting.kth_zero(lam, k, t, sgn, m, n, ell, medium=med, cap=cap) - ell

    if g(lo) < 0 or g(hi) > 0:
        raise SolverError(
            f"bracket [{lo:.6g}, {hi:.6g}] does not straddle the root; check weight bounds a={a}, b={b}")
    it = 0
    while (hi - lo) > tol * hi:
        it += 1
        if it > MAX_ITER:
            raise SolverError(f"bisection exceeded {MAX_ITER} iterations")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)

    res = shooting.shoot(lam, t, sgn, m, n, ell, record=True, medium=med)
    zeros = list(res.zeros)
    # the k-th zero sits at ell up to the bisection tolerance
    if len(zeros) == k and abs(zeros[-1] - ell) <= 1e-6 * ell:
        zeros.pop()
    if len(zeros) != k - 1:
        raise SolverError(f"eigenfunction has {len(zeros) + 1} nodal domains, expected {k}")
    if abs(res.end_value) > 1e-8 * res.scale:
        raise SolverError(f"|u(ell)| = {abs(res.end_value):.3g} exceeds 1e-8 of trajectory scale")
    eps = m.epsilon if m.epsilon == n.epsilon else (m.epsilon, n.epsilon)
    return HalfEigenvalue(k, sgn, float(t), lam, float(ell), eps, zeros, res.pieces,
                          res.scale, res.end_value, it)


def hump_counts(k: int, sign) -> tuple[int, int]:
    """Numbers of (positive, negative) nodal domains for the k-th branch."""
    p, q = (k + 1) // 2, k // 2
    return (p, q) if _sign(sign) > 0 else (q, p)


def limit_half_eigenvalue(k: int, t: float, sign, m_bar: float, n_bar: float,
                          ell: float) -> HalfEigenvalue:
    """Closed form for constant weights m_bar, n_bar."""
    _check_k_t(k, t)
    sgn = _sign(sign)
    if not (m_bar > 0 and n_bar > 0 and ell > 0):
        raise ValueError("m_bar, n_bar, ell: must be positive")
    p, q = hump_counts(k, sgn)
    root = (math.pi / ell) * (p / math.sqrt(m_bar) + q / math.sqrt(t * n_bar))
    lam = root * root
    len_pos = math.pi / math.sqrt(lam * m_bar)
    len_neg = math.pi / math.sqrt(lam * t * n_bar)
    zeros, pieces = [], []
    x, s = 0.0, sgn
    for j in range(k):
        L = len_pos if s > 0 else len_neg
        omega = math.pi / L
        right = ell if j == k - 1 else x + L
        pieces.append(Piece(x, right, omega, 0.0 if s > 0 else math.pi, 1.0 / omega))
        if j < k - 1:
            zeros.append(right)
        x, s = right, -s
    return HalfEigenvalue(k, sgn, float(t), lam, float(ell), "limit", zeros, pieces)


def trivial_curves(m: ScaledWeight, n: ScaledWeight, ell: float, tol: float = 1e-12):
    """First weighted Dirichlet eigenvalues (lambda_1^m, lambda_1^n)."""
    lm = solve_half_eigenvalue(1, 1.0, +1, m, m, ell, tol).lam
    ln = solve_half_eigenvalue(1, 1.0, +1, n, n, ell, tol).lam
    return lm, ln


@dataclass(frozen=True)
class CurvePoint:
    k: int
    sign: int
    t: float
    lam: float
    error: Optional[str] = None

    @property
    def alpha(self) -> float:
        return self.lam

    @property
    def beta(self) -> float:
        return self.t * self.lam

    @property
    def ok(self) -> bool:
        return self.error is None


def default_t_grid() -> list[float]:
    return list(np.logspace(math.log10(1 / 16), math.log10(16), 33))


def _curve_point(args):
    k, sign, m, n, ell, t, tol = args
    try:
        return CurvePoint(k, _sign(sign), float(t), solve_half_eigenvalue(k, t, sign, m, n, ell, tol).lam)
    except (SolverError, ShootingError) as exc:
        return CurvePoint(k, _sign(sign), float(t), math.nan, str(exc))


def trace_curve(k: int, sign, m: ScaledWeight, n: ScaledWeight, ell: float,
                t_grid: Optional[Sequence[float]] = None, tol: float = 1e-12,
                workers: int = 1) -> list[CurvePoint]:
    """Points (lam_t, t lam_t) of the k-th curve; failed points carry ``error``."""
    ts = default_t_grid() if t_grid is None else [float(t) for t in t_grid]
    if not ts:
        raise ValueError("t_grid: must be non-empty")
    if any(t <= 0 for t in ts):
        raise ValueError("t_grid: entries must be positive")
    ts = sorted(ts)
    jobs = [(k, sign, m, n, ell, t, tol) for t in ts]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_curve_point, jobs))
    return [_curve_point(j) for j in jobs]


def symmetry_check(k: int, t: float, sign, m: ScaledWeight, n: ScaledWeight, ell: float,
                   tol: float = 1e-12) -> float:
    """Relative gap between t lam_{k,t}^s(m, n) and lam_{k,1/t}^{-s}(n, m)."""
    sgn = _sign(sign)
    lhs = t * solve_half_eigenvalue(k, t, sgn, m, n, ell, tol).lam
    rhs = solve_half_eigenvalue(k, 1.0 / t, -sgn, n, m, ell, tol).lam
    return abs(lhs - rhs) / lhs


def constant_pair(m_bar: float, n_bar: float, ell: float):
    """Constant weights realized on [0, ell]."""
    return scale(constant(m_bar), 1.0, ell), scale(constant(n_bar), 1.0, ell)
