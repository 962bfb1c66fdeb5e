"""Command-line front end.

    fucik-lab solve --k 2 --t 1 --sign + --const-weights 1,1 --ell pi
    fucik-lab homog --config exp.json

Exit codes: 0 success, 1 invalid input, 2 solver failure (partial output
is still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from typing import Optional

from . import homog, nodal, spectrum
from .shooting import ShootingError, write_trajectory_csv
from .spectrum import SolverError, T_MAX, T_MIN
from .weights import PiecewiseConstantWeight, constant, scale

CONFIG_KEYS = {"weights_m", "weights_n", "ell", "k_list", "t_list", "signs", "epsilon_list", "tol", "out_dir"}
WEIGHT_KEYS = {"period", "breakpoints", "values"}
CURVE_COLUMNS = ["k", "sign", "t", "lambda", "alpha", "beta"]
CHECK_COLUMNS = ["k", "sign", "t", "epsilon", "lambda", "in_bracket", "lower_bounds",
                 "equal_lengths", "pair_lengths", "worst_same_sign_gap", "worst_pair_deviation"]

_PI = re.compile(r"^\s*(?:([0-9.]+(?:[eE][-+]?\d+)?)\s*\*?\s*)?pi\s*(?:/\s*([0-9.]+(?:[eE][-+]?\d+)?))?\s*$")


class ConfigError(ValueError):
    pass


def parse_number(value, name: str) -> float:
    """Float, or a 'pi' literal such as 'pi', '2pi', '2*pi', 'pi/2'."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        mt = _PI.match(value)
        if mt:
            num = float(mt.group(1)) if mt.group(1) else 1.0
            den = float(mt.group(2)) if mt.group(2) else 1.0
            return num * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{name}: expected a number or pi literal, got {value!r}")


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _token(v) -> str:
    if v is None:
        return "all"
    if isinstance(v, str):
        return {"+": "p", "-": "m"}.get(v, v)
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".10g")


def output_name(verb, k=None, sign=None, t=None, epsilon=None, ext="csv") -> str:
    return f"{verb}_{_token(k)}_{_token(sign)}_{_token(t)}_{_token(epsilon)}.{ext}"


def parse_weight(obj, name: str) -> PiecewiseConstantWeight:
    if not isinstance(obj, dict):
        raise ConfigError(f"{name}: expected an object with period, breakpoints, values")
    extra = set(obj) - WEIGHT_KEYS
    if extra:
        raise ConfigError(f"{name}: unknown keys {sorted(extra)}")
    missing = WEIGHT_KEYS - set(obj)
    if missing:
        raise ConfigError(f"{name}: missing keys {sorted(missing)}")
    period = parse_number(obj["period"], f"{name}.period")
    bp = [parse_number(x, f"{name}.breakpoints") for x in obj["breakpoints"]]
    vals = [parse_number(x, f"{name}.values") for x in obj["values"]]
    try:
        return PiecewiseConstantWeight.from_cells(period, bp, vals)
    except ValueError as exc:
        raise ConfigError(f"{name}.{exc}") from None


def load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config: file not found: {path}")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    extra = set(raw) - CONFIG_KEYS
    if extra:
        raise ConfigError(f"config: unknown keys {sorted(extra)}")
    for key in ("weights_m", "weights_n"):
        if key not in raw:
            raise ConfigError(f"{key}: missing")
    cfg = {
        "m": parse_weight(raw["weights_m"], "weights_m"),
        "n": parse_weight(raw["weights_n"], "weights_n"),
        "ell": parse_number(raw.get("ell", 1.0), "ell"),
        "k_list": [_parse_k(k, "k_list") for k in raw.get("k_list", [1])],
        "t_list": [parse_number(t, "t_list") for t in raw.get("t_list", [1.0])],
        "signs": list(raw.get("signs", ["+", "-"])),
        "epsilon_list": None,
        "tol": parse_number(raw.get("tol", 1e-12), "tol"),
        "out_dir": raw.get("out_dir"),
    }
    if "epsilon_list" in raw:
        cfg["epsilon_list"] = [parse_number(e, "epsilon_list") for e in raw["epsilon_list"]]
    return cfg


def _parse_k(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ConfigError(f"{name}: expected a positive integer, got {v!r}")
    try:
        k = int(v)
    except ValueError:
        raise ConfigError(f"{name}: expected a positive integer, got {v!r}") from None
    if k < 1:
        raise ConfigError(f"{name}: expected a positive integer, got {v!r}")
    return k


def _validate(cfg):
    if not cfg["ell"] > 0:
        raise ConfigError("ell: must be positive")
    for t in cfg["t_list"]:
        if not T_MIN <= t <= T_MAX:
            raise ConfigError(f"t: {t!r} outside [{T_MIN:g}, {T_MAX:g}]")
    for s in cfg["signs"]:
        if s not in ("+", "-"):
            raise ConfigError(f"sign: expected '+' or '-', got {s!r}")
    if cfg["epsilon_list"] is not None:
        if not cfg["epsilon_list"]:
            raise ConfigError("epsilon: list must be non-empty")
        for e in cfg["epsilon_list"]:
            if not e > 0:
                raise ConfigError(f"epsilon: {e!r} must be positive")
    if not cfg["tol"] > 0:
        raise ConfigError("tol: must be positive")
    if not cfg["k_list"]:
        raise ConfigError("k: list must be non-empty")
    if not cfg["t_list"]:
        raise ConfigError("t: list must be non-empty")


def build_config(args) -> dict:
    """Merge the config file (if any) with command-line overrides."""
    if args.config:
        cfg = load_config(args.config)
    elif args.const_weights:
        parts = args.const_weights.split(",")
        if len(parts) != 2:
            raise ConfigError("const-weights: expected 'm,n'")
        mb, nb = (parse_number(p, "const-weights") for p in parts)
        if not (mb > 0 and nb > 0):
            raise ConfigError("const-weights: values must be positive")
        cfg = {"m": constant(mb), "n": constant(nb), "ell": 1.0, "k_list": [1], "t_list": [1.0],
               "signs": ["+", "-"], "epsilon_list": [1.0], "tol": 1e-12, "out_dir": None}
    else:
        raise ConfigError("config: give --config or --const-weights")
    if args.ell is not None:
        cfg["ell"] = parse_number(args.ell, "ell")
    if args.k is not None:
        cfg["k_list"] = [_parse_k(args.k, "k")]
    if args.t is not None:
        cfg["t_list"] = [parse_number(args.t, "t")]
    if args.sign is not None:
        cfg["signs"] = [args.sign]
    if args.epsilon is not None:
        cfg["epsilon_list"] = [parse_number(args.epsilon, "epsilon")]
    if args.tol is not None:
        cfg["tol"] = parse_number(args.tol, "tol")
    if args.out_dir is not None:
        cfg["out_dir"] = args.out_dir
    if cfg["epsilon_list"] is None:
        cfg["epsilon_list"] = [cfg["ell"] / j for j in homog.DEFAULT_J]
    _validate(cfg)
    return cfg


def _out_dir(cfg, required=True) -> Optional[str]:
    d = cfg["out_dir"]
    if d is None:
        if required:
            raise ConfigError("out_dir: required for this command")
        return None
    os.makedirs(d, exist_ok=True)
    return d


def _instances(cfg):
    for e in cfg["epsilon_list"]:
        for k in cfg["k_list"]:
            for t in cfg["t_list"]:
                for s in cfg["signs"]:
                    yield k, s, t, e


def _scaled(cfg, eps):
    return scale(cfg["m"], eps, cfg["ell"]), scale(cfg["n"], eps, cfg["ell"])


def cmd_solve(cfg) -> int:
    out = _out_dir(cfg, required=False)
    failed = 0
    for k, s, t, e in _instances(cfg):
        m, n = _scaled(cfg, e)
        try:
            ev = spectrum.solve_half_eigenvalue(k, t, s, m, n, cfg["ell"], cfg["tol"])
        except (SolverError, ShootingError) as exc:
            print(f"k={k} sign={s} t={t:g} epsilon={e:g} FAILED: {exc}", file=sys.stderr)
            failed += 1
            continue
        print(f"k={k} sign={s} t={_fmt(t)} epsilon={_fmt(e)} lambda={_fmt(ev.lam)}")
        if out:
            from .shooting import shoot
            res = shoot(ev.lam, t, s, m, n, cfg["ell"], record=True)
            write_trajectory_csv(os.path.join(out, output_name("solve", k, s, t, e)), res.trajectory)
    return 2 if failed else 0


def cmd_curve(cfg, args) -> int:
    out = _out_dir(cfg)
    ts = cfg["t_list"] if (args.config or args.t is not None) and not args.default_grid \
        else spectrum.default_t_grid()
    failed = 0
    for e in cfg["epsilon_list"]:
        m, n = _scaled(cfg, e)
        for k in cfg["k_list"]:
            for s in cfg["signs"]:
                pts = spectrum.trace_curve(k, s, m, n, cfg["ell"], ts, cfg["tol"])
                emit_curve_plotdata(pts, os.path.join(out, output_name("curve", k, s, None, e)))
                bad = [p for p in pts if not p.ok]
                for p in bad:
                    print(f"k={k} sign={s} t={p.t:g} epsilon={e:g} FAILED: {p.error}", file=sys.stderr)
                failed += len(bad)
    return 2 if failed else 0


def emit_curve_plotdata(points, path) -> None:
    if not points:
        raise ConfigError("t_grid: empty point list")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for p in points:
            w.writerow([p.k, "+" if p.sign > 0 else "-", _fmt(p.t), _fmt(p.lam), _fmt(p.alpha), _fmt(p.beta)])


def cmd_homog(cfg) -> int:
    out = _out_dir(cfg)
    ecfg = homog.ExperimentConfig(cfg["m"], cfg["n"], cfg["ell"], cfg["k_list"], cfg["t_list"],
                                  cfg["signs"], cfg["epsilon_list"], cfg["tol"], out)
    report = homog.run_rate_experiment(ecfg)
    homog.write_rate_csv(os.path.join(out, output_name("homog")), report)
    homog.write_summary(os.path.join(out, "summary.json"), report)
    for s in report.series:
        print(f"k={s.k} sign={s.sign} t={s.t:g} slope={s.slope:.4f} C_emp={s.c_emp:.4g}")
    return 0 if report.complete else 2


def _solve_and_decompose(cfg):
    for k, s, t, e in _instances(cfg):
        m, n = _scaled(cfg, e)
        try:
            ev = spectrum.solve_half_eigenvalue(k, t, s, m, n, cfg["ell"], cfg["tol"])
        except (SolverError, ShootingError) as exc:
            print(f"k={k} sign={s} t={t:g} epsilon={e:g} FAILED: {exc}", file=sys.stderr)
            yield k, s, t, e, m, None, None
            continue
        yield k, s, t, e, m, ev, nodal.extract(ev)


def cmd_nodal(cfg) -> int:
    out = _out_dir(cfg)
    failed = 0
    for k, s, t, e, m, ev, d in _solve_and_decompose(cfg):
        if ev is None:
            failed += 1
            continue
        nodal.write_nodal_csv(os.path.join(out, output_name("nodal", k, s, t, e)), [(ev, d)])
        print(f"k={k} sign={s} t={t:g} epsilon={e:g} lengths=" + ",".join(f"{x:.6g}" for x in d.lengths))
    return 2 if failed else 0


def cmd_check_bounds(cfg) -> int:
    out = _out_dir(cfg)
    ell = cfg["ell"]
    a = min(cfg["m"].lower, cfg["n"].lower)
    b = max(cfg["m"].upper, cfg["n"].upper)
    failed = violations = 0
    path = os.path.join(out, output_name("check-bounds"))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHECK_COLUMNS)
        for k, s, t, e, m, ev, d in _solve_and_decompose(cfg):
            if ev is None:
                failed += 1
                w.writerow([k, s, _fmt(t), _fmt(e), "nan", "", "", "", "", "", ""])
                continue
            br = spectrum.bracket(k, t, s, a, b, ell)
            inb = br.lambda_lo * (1 - 1e-12) <= ev.lam <= br.lambda_hi * (1 + 1e-12)
            lb = nodal.check_lower_bounds(d, t, a, b, k, ell)
            eq = nodal.check_equal_lengths(d, m.cell)
            pr = nodal.check_pair_lengths(d, m.cell, k, ell)
            flags = [inb, lb.ok, eq.ok, pr.ok]
            violations += flags.count(False)
            w.writerow([k, s, _fmt(t), _fmt(e), _fmt(ev.lam), *(str(f).lower() for f in flags),
                        _fmt(max(eq.worst_gap_pos, eq.worst_gap_neg)), _fmt(pr.worst)])
    print(f"violations={violations} failures={failed} report={path}")
    return 2 if failed else 0


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--const-weights", help="constant weights 'm,n' instead of a config")
    common.add_argument("--ell", help="domain length (number or pi literal)")
    common.add_argument("--k", help="nodal domain count")
    common.add_argument("--t", help="slope t (number or pi literal)")
    common.add_argument("--sign", choices=["+", "-"])
    common.add_argument("--epsilon", help="scaling parameter epsilon")
    common.add_argument("--tol", help="relative bisection tolerance")
    common.add_argument("--out-dir", dest="out_dir")

    p = argparse.ArgumentParser(prog="fucik-lab", description="Half-eigenvalues and Fucik curves "
                                "with periodic step weights.")
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("solve", parents=[common], help="solve half-eigenvalues")
    c = sub.add_parser("curve", parents=[common], help="trace Fucik curves")
    c.add_argument("--default-grid", action="store_true", help="use the 33-point t grid on [1/16, 16]")
    sub.add_parser("homog", parents=[common], help="run the epsilon-sweep rate experiment")
    sub.add_parser("nodal", parents=[common], help="write nodal decompositions")
    sub.add_parser("check-bounds", parents=[common], help="check the nodal and bracket inequalities")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = build_config(args)
        if args.verb == "solve":
            return cmd_solve(cfg)
        if args.verb == "curve":
            return cmd_curve(cfg, args)
        if args.verb == "homog":
            return cmd_homog(cfg)
        if args.verb == "nodal":
            return cmd_nodal(cfg)
        return cmd_check_bounds(cfg)
    except (SolverError, ShootingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
