import json
import math

import numpy as np
import pytest

from conftest import TWO_PHASE
from fucik_lab.homog import (
    ExperimentConfig,
    RateReport,
    Row,
    Series,
    check_k2_rate,
    check_rate_bound,
    constants_by,
    fit_rate,
    gamma,
    k2_constants,
    run_rate_experiment,
    summary_dict,
    tail_violations,
    variation,
    write_rate_csv,
    write_summary,
)
from fucik_lab.weights import PiecewiseConstantWeight, constant


@pytest.fixture(scope="module")
def two_phase_report():
    cfg = ExperimentConfig(PiecewiseConstantWeight(*TWO_PHASE), constant(1.0), 1.0,
                           k_list=[1, 2, 3], t_list=[0.25, 0.5, 1.0, 2.0], signs=["+", "-"])
    return run_rate_experiment(cfg)


def test_gamma():
    assert gamma(1.0) == 1.0
    assert gamma(0.25) == pytest.approx(8.0)
    assert gamma(4.0) == pytest.approx(2.0)
    # reflection: the bound on t*lam with slope 1/t, divided by t
    for t in (2.0, 4.0, 9.0):
        assert gamma(t) == pytest.approx(gamma(1 / t) / t)
    with pytest.raises(ValueError):
        gamma(0.0)


def test_fit_rate_exact():
    eps = np.array([1 / 4, 1 / 8, 1 / 16, 1 / 32])
    s, b = fit_rate(list(zip(eps, 0.5 * eps)))
    assert s == pytest.approx(1.0) and math.exp(b) == pytest.approx(0.5)
    s, b = fit_rate(list(zip(eps, 2 * eps ** 2)))
    assert s == pytest.approx(2.0) and math.exp(b) == pytest.approx(2.0)


def test_fit_rate_floor_and_minimum():
    eps = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    rows = list(zip(eps, [1e-2, 5e-3, 1e-20, 0.0]))
    with pytest.raises(ValueError):
        fit_rate(rows, floor=1e-12)
    s, _ = fit_rate(list(zip(eps, [1e-2, 5e-3, 2.5e-3, 1e-20])), floor=1e-12)
    assert s == pytest.approx(1.0)


def test_default_epsilons():
    cfg = ExperimentConfig(constant(1.0), constant(1.0), 2.0)
    assert cfg.epsilons == [2.0 / j for j in (4, 8, 16, 32, 64, 128, 256)]


@pytest.mark.parametrize("kw", [dict(epsilons=[0.1, 0.0]), dict(k_list=[0]), dict(t_list=[0.0]),
                                dict(t_list=[1e5]), dict(signs=["x"]), dict(tol=0), dict(ell=-1)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ExperimentConfig(constant(1.0), constant(1.0), **kw)


def test_constant_weights_zero_error():
    cfg = ExperimentConfig(constant(2.0), constant(0.5), 1.0, k_list=[1, 2, 3], t_list=[0.5, 2.0],
                           epsilons=[1 / 4, 1 / 8, 1 / 16])
    rep = run_rate_experiment(cfg)
    for s in rep.series:
        assert s.complete
        for r in s.rows:
            assert r.abs_err <= 1e-10 * r.lambda_0
        assert s.c_emp == 0.0
        assert s.fit_error is not None  # every error sits below the noise floor
    assert check_rate_bound(rep, 1e-6)
    assert check_k2_rate(rep.series)


def test_rows_sorted_and_nonnegative(two_phase_report):
    for s in two_phase_report.series:
        eps = [r.epsilon for r in s.rows]
        assert eps == sorted(eps, reverse=True)
        assert all(r.abs_err >= 0 for r in s.rows)


def test_two_phase_k2_errors_decrease(two_phase_report):
    s = two_phase_report.get(2, "+", 1.0)
    errs = [r.abs_err for r in s.rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # at least first order, as the O(eps) bound requires
    assert s.slope >= 0.9


def test_rate_bound_budget(two_phase_report):
    c = max(s.c_emp for s in two_phase_report.series)
    assert check_rate_bound(two_phase_report, 10 * c)
    assert check_rate_bound(two_phase_report, c * (1 + 1e-12))
    assert not check_rate_bound(two_phase_report, c / 2)


def test_k2_rate(two_phase_report):
    sub = [s for s in two_phase_report.series if s.k == 2 and s.t in (0.25, 0.5)]
    consts = k2_constants(sub)
    assert set(consts) == {0.25, 0.5} and all(math.isfinite(c) and c > 0 for c in consts.values())
    assert check_k2_rate(sub)
    withone = [s for s in two_phase_report.series if s.k == 2 and s.t <= 1.0]
    assert 1.0 in k2_constants(withone)
    fake = [Series(2, "+", 0.5, 1.0, [Row(0.1, 1.0, 0.0)]), Series(2, "+", 0.25, 1.0, [Row(0.1, 1.001, 1.0)])]
    assert not check_k2_rate(fake)


def test_tail_convergence(two_phase_report):
    for s in two_phase_report.series:
        assert tail_violations(s, 1 / 32) == 0


def test_constants_by_and_variation():
    rep = RateReport([Series(1, "+", 1.0, 1.0, c_emp=0.1), Series(1, "-", 2.0, 1.0, c_emp=0.3),
                      Series(2, "+", 1.0, 1.0, c_emp=0.0), Series(2, "-", 2.0, 1.0, c_emp=0.6)], 1e-12)
    assert constants_by(rep, "k") == {1: 0.3, 2: 0.6}
    assert constants_by(rep, "t") == {1.0: 0.1, 2.0: 0.6}
    assert variation({1: 0.3, 2: 0.6}) == pytest.approx(2.0)
    assert variation({1: 0.3}) == 1.0


def test_solver_failures_recorded(monkeypatch):
    import fucik_lab.homog as h
    from fucik_lab.spectrum import SolverError

    real = h.solve_half_eigenvalue

    def flaky(k, t, sign, m, n, ell, tol):
        if m.epsilon == 1 / 8:
            raise SolverError("boom")
        return real(k, t, sign, m, n, ell, tol)

    monkeypatch.setattr(h, "solve_half_eigenvalue", flaky)
    rep = run_rate_experiment(ExperimentConfig(PiecewiseConstantWeight(*TWO_PHASE), constant(1.0),
                                               k_list=[1], t_list=[1.0], signs=["+"],
                                               epsilons=[1 / 4, 1 / 8, 1 / 16, 1 / 32]))
    s = rep.series[0]
    assert not s.complete and not rep.complete
    assert [r.error for r in s.rows] == [None, "boom", None, None]
    assert math.isfinite(s.slope)
    assert summary_dict(rep)["series"][0]["failures"] == [{"epsilon": 0.125, "error": "boom"}]


def test_outputs(tmp_path, two_phase_report):
    p = tmp_path / "rates.csv"
    write_rate_csv(p, two_phase_report)
    lines = p.read_text().splitlines()
    assert lines[0] == "k,sign,t,epsilon,lambda_eps,lambda_0,abs_err,slope,C_emp"
    assert len(lines) == 1 + 7 * len(two_phase_report.series)
    q = tmp_path / "summary.json"
    write_summary(q, two_phase_report)
    data = json.loads(q.read_text())
    assert data["complete"] and len(data["series"]) == len(two_phase_report.series)
