"""epsilon-sweep homogenization experiments and convergence-rate fits."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .shooting import ShootingError
from .spectrum import SolverError, limit_half_eigenvalue, solve_half_eigenvalue
from .weights import PiecewiseConstantWeight, average, scale

__all__ = [
    "DEFAULT_J",
    "ExperimentConfig",
    "Row",
    "Series",
    "RateReport",
    "gamma",
    "fit_rate",
    "run_rate_experiment",
    "check_rate_bound",
    "check_k2_rate",
    "k2_constants",
    "constants_by",
    "variation",
    "tail_violations",
    "write_rate_csv",
    "write_summary",
]

DEFAULT_J = (4, 8, 16, 32, 64, 128, 256)
RATE_COLUMNS = ["k", "sign", "t", "epsilon", "lambda_eps", "lambda_0", "abs_err", "slope", "C_emp"]


def gamma(t: float) -> float:
    if not t > 0:
        raise ValueError("t: must be positive")
    return max(t ** -1.5, t ** 0.5)


@dataclass
class ExperimentConfig:
    m: PiecewiseConstantWeight
    n: PiecewiseConstantWeight
    ell: float = 1.0
    k_list: Sequence[int] = (1, 2)
    t_list: Sequence[float] = (1.0,)
    signs: Sequence[str] = ("+", "-")
    epsilons: Optional[Sequence[float]] = None
    tol: float = 1e-12
    out_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.epsilons is None:
            self.epsilons = [self.ell / j for j in DEFAULT_J]
        if not self.ell > 0:
            raise ValueError("ell: must be positive")
        if any(not (e > 0) for e in self.epsilons):
            raise ValueError("epsilon_list: entries must be positive")
        if any(int(k) != k or k < 1 for k in self.k_list):
            raise ValueError("k_list: entries must be positive integers")
        if any(not (1e-4 <= t <= 1e4) for t in self.t_list):
            raise ValueError("t_list: entries must lie in [1e-4, 1e4]")
        if any(s not in ("+", "-") for s in self.signs):
            raise ValueError("signs: entries must be '+' or '-'")
        if not self.tol > 0:
            raise ValueError("tol: must be positive")


@dataclass
class Row:
    epsilon: float
    lambda_eps: float
    lambda_0: float
    error: Optional[str] = None

    @property
    def abs_err(self) -> float:
        return abs(self.lambda_eps - self.lambda_0)


@dataclass
class Series:
    k: int
    sign: str
    t: float
    ell: float
    rows: list[Row] = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan
    c_emp: float = math.nan
    fit_error: Optional[str] = None

    @property
    def complete(self) -> bool:
        return all(r.error is None for r in self.rows)

    @property
    def ok_rows(self) -> list[Row]:
        return [r for r in self.rows if r.error is None]

    def normalizer(self, eps: float) -> float:
        return eps * (self.k / self.ell) ** 3 * gamma(self.t)


@dataclass
class RateReport:
    series: list[Series]
    tol: float

    def get(self, k, sign, t) -> Series:
        for s in self.series:
            if s.k == k and s.sign == sign and s.t == t:
                return s
        raise KeyError((k, sign, t))

    @property
    def complete(self) -> bool:
        return all(s.complete for s in self.series)


def fit_rate(rows, floor: float = 0.0) -> tuple[float, float]:
    """Least-squares line through (log eps, log err); rows with err < floor dropped.

    Returns (slope, intercept).
    """
    pts = [(e, err) for e, err in rows if err > floor and err > 0]
    if len(pts) < 3:
        raise ValueError(f"fit_rate: need >= 3 usable rows, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def _solve_point(job):
    k, sign, t, m, n, eps, ell, tol = job
    try:
        lam = solve_half_eigenvalue(k, t, sign, scale(m, eps, ell), scale(n, eps, ell), ell, tol).lam
        return lam, None
    except (SolverError, ShootingError) as exc:
        return math.nan, str(exc)


def run_rate_experiment(cfg: ExperimentConfig) -> RateReport:
    m_bar, n_bar = average(cfg.m), average(cfg.n)
    eps_sorted = sorted((float(e) for e in cfg.epsilons), reverse=True)
    keys = [(int(k), s, float(t)) for k in cfg.k_list for t in cfg.t_list for s in cfg.signs]
    jobs = [(k, s, t, cfg.m, cfg.n, e, cfg.ell, cfg.tol) for k, s, t in keys for e in eps_sorted]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_solve_point, jobs, chunksize=4))
    else:
        results = [_solve_point(j) for j in jobs]

    series = []
    it = iter(results)
    for k, s, t in keys:
        lam0 = limit_half_eigenvalue(k, t, s, m_bar, n_bar, cfg.ell).lam
        ser = Series(k, s, t, cfg.ell)
        for e in eps_sorted:
            lam, err = next(it)
            ser.rows.append(Row(e, lam, lam0, err))
        ok = ser.ok_rows
        floor = 10 * cfg.tol * lam0
        # errors under the noise floor count as zero
        ser.c_emp = max((r.abs_err / ser.normalizer(r.epsilon) if r.abs_err > floor else 0.0
                         for r in ok), default=math.nan)
        try:
            ser.slope, ser.intercept = fit_rate([(r.epsilon, r.abs_err) for r in ok], floor=floor)
        except ValueError as exc:
            ser.fit_error = str(exc)
        series.append(ser)
    return RateReport(series, cfg.tol)


def constants_by(report: RateReport, key: str) -> dict:
    """Largest positive C_emp per value of ``key`` ('k' or 't') over all other parameters."""
    out: dict = {}
    for s in report.series:
        if s.c_emp > 0 and math.isfinite(s.c_emp):
            v = getattr(s, key)
            out[v] = max(out.get(v, 0.0), s.c_emp)
    return out


def variation(consts: dict) -> float:
    """max / min of the positive values; 1 when fewer than two."""
    vals = [c for c in consts.values() if c > 0]
    return max(vals) / min(vals) if len(vals) > 1 else 1.0


def tail_violations(series: Series, start: float) -> int:
    """Rows with eps <= start whose error exceeds the error at the largest eps."""
    rows = series.ok_rows
    if not rows:
        return 0
    ref = rows[0].abs_err
    return sum(1 for r in rows if r.epsilon <= start and r.abs_err > ref)


def check_rate_bound(report: RateReport, C_budget: float) -> bool:
    """err <= C_budget (k/ell)^3 gamma(t) eps on every row."""
    return all(r.abs_err <= C_budget * s.normalizer(r.epsilon)
               for s in report.series for r in s.ok_rows)


def k2_constants(series: Sequence[Series], tol: float = 1e-12) -> dict[float, float]:
    """Per-t constant max err / (eps gamma(t)) over k = 2 rows, both signs pooled.

    Errors below ``10 tol lambda_0`` count as zero.
    """
    out: dict[float, float] = {}
    for s in series:
        if s.k != 2:
            continue
        for r in s.ok_rows:
            err = r.abs_err if r.abs_err > 10 * tol * r.lambda_0 else 0.0
            out[s.t] = max(out.get(s.t, 0.0), err / (r.epsilon * gamma(s.t)))
    return out


def check_k2_rate(series: Sequence[Series], max_ratio: float = 10.0, tol: float = 1e-12) -> bool:
    consts = [c for c in k2_constants(series, tol).values() if c > 0]
    if not consts:
        return True
    return all(math.isfinite(c) for c in consts) and max(consts) / min(consts) <= max_ratio


def _f(v) -> str:
    return format(float(v), ".17g")


def write_rate_csv(path, report: RateReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATE_COLUMNS)
        for s in report.series:
            for r in s.rows:
                w.writerow([s.k, s.sign, _f(s.t), _f(r.epsilon), _f(r.lambda_eps), _f(r.lambda_0),
                            _f(r.abs_err), _f(s.slope), _f(s.c_emp)])


def summary_dict(report: RateReport) -> dict:
    out = []
    for s in report.series:
        out.append({
            "k": s.k, "sign": s.sign, "t": s.t,
            "slope": None if math.isnan(s.slope) else s.slope,
            "intercept": None if math.isnan(s.intercept) else s.intercept,
            "C_emp": None if math.isnan(s.c_emp) else s.c_emp,
            "complete": s.complete,
            "fit_error": s.fit_error,
            "failures": [{"epsilon": r.epsilon, "error": r.error} for r in s.rows if r.error],
        })
    return {"tol": report.tol, "complete": report.complete, "series": out}


def write_summary(path, report: RateReport) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
