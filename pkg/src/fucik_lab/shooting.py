"""Exact shooting for -u'' = lam * (m u^+ - t n u^-) with step weights.

On a cell where the weight is constant and u keeps one sign the equation is
``u'' = -omega**2 u``, so the solution is advanced in closed form.  Zeros are
located from the phase of the sinusoid and polished by Newton steps.  The
only approximations are floating point and the transcendental root solve.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .weights import ScaledWeight

__all__ = [
    "ShootingError",
    "ShootState",
    "ShootResult",
    "Piece",
    "Medium",
    "propagate_cell",
    "shoot",
    "kth_zero",
    "zero_cap",
    "write_trajectory_csv",
]

# zeros closer than this (times ell) to a breakpoint are snapped onto it
SNAP = 1e-13
DEGENERATE = 1e-14

_END, _ZERO, _ZERO_AT_END = 0, 1, 2


class ShootingError(RuntimeError):
    pass


@dataclass
class ShootState:
    x: float
    u: float
    du: float
    zeros_found: list[float] = field(default_factory=list)
    current_sign: int = 1

    def energy(self, omega: float) -> float:
        return omega * omega * self.u * self.u + self.du * self.du


@dataclass(frozen=True)
class Piece:
    """Sinusoid ``u(x) = amp * sin(omega * (x - left) + phase)`` on ``[left, right]``."""

    left: float
    right: float
    omega: float
    phase: float
    amp: float

    def __call__(self, x):
        return self.amp * np.sin(self.omega * (np.asarray(x) - self.left) + self.phase)

    def derivative(self, x):
        return self.amp * self.omega * np.cos(self.omega * (np.asarray(x) - self.left) + self.phase)


@dataclass
class ShootResult:
    zeros: list[float]
    end_value: float
    end_slope: float
    nodal_count: int
    scale: float = 1.0
    pieces: Optional[list[Piece]] = None
    trajectory: Optional[list[tuple[float, float, float]]] = None


def _first_zero(u, du, sgn, omega):
    """Smallest s > 0 with u cos(omega s) + du/omega sin(omega s) = 0."""
    phi = math.atan2(sgn * u, sgn * du / omega)
    if phi < 0.0:
        phi = 0.0
    s = (math.pi - phi) / omega
    hi = math.pi / omega
    for _ in range(2):
        c, sn = math.cos(omega * s), math.sin(omega * s)
        f = u * c + du / omega * sn
        fp = -u * omega * sn + du * c
        if fp == 0.0:
            break
        s_new = s - f / fp
        if 0.0 < s_new <= hi:
            s = s_new
    return s


def _cell_step(u, du, sgn, omega, length, snap):
    s = _first_zero(u, du, sgn, omega)
    if s < length - snap:
        E = math.sqrt(omega * omega * u * u + du * du)
        return _ZERO, s, 0.0, -sgn * E
    if s <= length + snap:
        E = math.sqrt(omega * omega * u * u + du * du)
        return _ZERO_AT_END, length, 0.0, -sgn * E
    c, sn = math.cos(omega * length), math.sin(omega * length)
    return _END, length, u * c + du / omega * sn, -u * omega * sn + du * c


def propagate_cell(state: ShootState, cell_end: float, omega: float, snap: float = 0.0) -> ShootState:
    """Advance ``state`` through a constant cell, stopping at the first zero.

    Returns a new state either at ``cell_end`` or at the first zero inside
    the cell (with the zero appended and the sign flipped).
    """
    if not omega > 0:
        raise ValueError("omega: must be positive")
    if not cell_end > state.x:
        raise ValueError("cell_end: must exceed state.x")
    sgn = state.current_sign
    kind, s, u1, du1 = _cell_step(state.u, state.du, sgn, omega, cell_end - state.x, snap)
    zeros = list(state.zeros_found)
    if kind == _END:
        return ShootState(cell_end, u1, du1, zeros, sgn)
    x = cell_end if kind == _ZERO_AT_END else state.x + s
    zeros.append(x)
    return ShootState(x, 0.0, du1, zeros, -sgn)


class Medium:
    """Merged breakpoints of the pair (m, n), with ``ell`` as a boundary.

    Segments beyond ``ell`` follow the periodic extension of the weights and
    are generated on demand.
    """

    def __init__(self, m: ScaledWeight, n: ScaledWeight, ell: float):
        self.m, self.n, self.ell = m, n, float(ell)
        self.extent = 0.0
        self._build(self.ell)

    def _build(self, upto):
        ell = self.ell
        bm, vm = self.m.realize(upto)
        bn, vn = self.n.realize(upto)
        pts = np.union1d(np.union1d(bm, bn), [ell, upto])
        pts = pts[pts <= upto]
        # merge near-coincident breakpoints; keep ell exact
        tol = SNAP * ell
        keep = np.ones(len(pts), bool)
        keep[1:] = np.diff(pts) > tol
        pts = pts[keep]
        near = np.abs(pts - ell) <= tol
        pts = np.union1d(pts[~near], [ell]) if ell <= upto else pts
        mid = 0.5 * (pts[:-1] + pts[1:])
        im = np.clip(np.searchsorted(bm, mid, side="right") - 1, 0, len(vm) - 1)
        jn = np.clip(np.searchsorted(bn, mid, side="right") - 1, 0, len(vn) - 1)
        self.xs = pts.tolist()
        self.mv = vm[im].tolist()
        self.nv = vn[jn].tolist()
        self.i_ell = self.xs.index(ell)
        self.extent = float(pts[-1])

    def ensure(self, upto):
        if upto > self.extent:
            self._build(max(upto, 2 * self.extent))

    @property
    def lower(self):
        return min(self.m.lower, self.n.lower)

    @property
    def upper(self):
        return max(self.m.upper, self.n.upper)


def _check_params(lam, t):
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError("lambda: must be positive")
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("t: must be positive")


def _sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign: expected '+' or '-', got {sign!r}")


def _march(lam, t, sign, med: Medium, n_zeros=None, cap=None, record=False):
    """Integrate from 0; stop at ell (``n_zeros`` None) or at the n-th zero."""
    sgn = _sign(sign)
    ell = med.ell
    snap = SNAP * ell
    sq_m = math.sqrt(lam)
    sq_n = math.sqrt(lam * t)
    x, u, du = 0.0, 0.0, float(sgn)
    scale = 1.0
    zeros = []
    pieces = [] if record else None
    traj = [(0.0, 0.0, du)] if record else None
    end = None
    i = 0
    xs, mv, nv = med.xs, med.mv, med.nv
    while True:
        if i + 1 >= len(xs):
            if cap is not None and x > cap:
                raise ShootingError(f"zero {n_zeros} not found before safety cap {cap:.6g}")
            med.ensure(2 * xs[-1])
            xs, mv, nv = med.xs, med.mv, med.nv
        seg_end = xs[i + 1]
        omega = sq_m * math.sqrt(mv[i]) if sgn > 0 else sq_n * math.sqrt(nv[i])
        u0, du0, x0 = u, du, x
        kind, s, u, du = _cell_step(u0, du0, sgn, omega, seg_end - x0, snap)
        if record and (n_zeros is None or x0 < ell):
            amp = math.hypot(u0, du0 / omega)
            pieces.append(Piece(x0, x0 + s, omega, math.atan2(u0, du0 / omega), amp))
        if kind == _END:
            x = seg_end
            i += 1
        else:
            x = seg_end if kind == _ZERO_AT_END else x0 + s
            if kind == _ZERO_AT_END:
                i += 1
            zeros.append(x)
            sgn = -sgn
        a = abs(du)
        if a > scale:
            scale = a
        if abs(u) < DEGENERATE * scale and a < DEGENERATE * scale:
            raise ShootingError(f"degenerate trajectory near x={x:.6g}")
        if record:
            traj.append((x, u, du))
        if end is None and i == med.i_ell and x == seg_end:
            end = (u, du)
            if n_zeros is None:
                break
        if n_zeros is not None and len(zeros) >= n_zeros:
            break
        if cap is not None and x > cap:
            raise ShootingError(f"zero {n_zeros} not found before safety cap {cap:.6g}")
    return zeros, end, scale, pieces, traj


def shoot(lam: float, t: float, sign, m: ScaledWeight, n: ScaledWeight, ell: float,
          *, record: bool = False, medium: Optional[Medium] = None) -> ShootResult:
    """Shoot from ``u(0) = 0, u'(0) = +-1`` to ``x = ell``."""
    _check_params(lam, t)
    med = medium if medium is not None else Medium(m, n, ell)
    zeros, end, scale, pieces, traj = _march(lam, t, sign, med, record=record)
    end_zero = bool(zeros) and zeros[-1] == med.ell
    interior = zeros[:-1] if end_zero else zeros
    u_end, du_end = end
    count = len(interior) + (1 if end_zero or abs(u_end) <= 1e-12 * scale else 0)
    return ShootResult(interior, u_end, du_end, count, scale, pieces, traj)


def zero_cap(lam, k, t, a, ell):
    """Safety cap ``4 ell sqrt(lam_hi / lam)`` with the Sturm upper bracket."""
    lam_hi = k * k * math.pi ** 2 / (ell * ell * a * min(1.0, t))
    return 4.0 * ell * math.sqrt(lam_hi / lam)


def kth_zero(lam: float, k: int, t: float, sign, m: ScaledWeight, n: ScaledWeight,
             ell: float, *, medium: Optional[Medium] = None, cap: Optional[float] = None) -> float:
    """Position of the k-th zero after the origin (may lie beyond ell)."""
    _check_params(lam, t)
    if k < 1:
        raise ValueError("k: must be >= 1")
    med = medium if medium is not None else Medium(m, n, ell)
    if cap is None:
        cap = zero_cap(lam, k, t, med.lower, ell)
    zeros, *_ = _march(lam, t, sign, med, n_zeros=k, cap=cap)
    return zeros[k - 1]


def write_trajectory_csv(path, trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u", "du"])
        for row in trajectory:
            w.writerow([format(v, ".17g") for v in row])
