"""Tests for the deviation and curvature condition diagnostics."""

import numpy as np
import pytest

from robustvar import (
    Penalty,
    Regression,
    RobustConfig,
    deviation_check,
    re_check,
    robust_gradient,
    robust_objective,
)
from robustvar.diagnostics import (
    _re_probe,
    diagnostics_replication,
    run_deviation_experiment,
    write_reports_csv,
)


def naive_linf_gradient(y, x, beta, tau, b):
    n, q = x.shape
    g = np.zeros(q)
    for i in range(n):
        nrm = np.linalg.norm(x[i])
        w = 1.0 if nrm == 0 else min(1.0, b / nrm)
        r = w * (y[i] - x[i] @ beta)
        g -= max(-tau, min(tau, r)) * w * w * x[i]
    return np.max(np.abs(g / n))


class TestDeviationCheck:
    def test_noiseless_truth_passes(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((30, 4))
        beta = rng.standard_normal(4)
        reg = Regression(x @ beta, x)
        cfg = RobustConfig(tau=1, b=3)
        stat, ok = deviation_check(reg, beta, cfg, Penalty("l1"), lam=1e-6)
        assert stat == pytest.approx(0.0, abs=1e-15)
        assert ok

    def test_matches_naive_linf(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((25, 3)) * 2
        beta = rng.standard_normal(3)
        y = x @ beta + rng.standard_normal(25)
        reg = Regression(y, x)
        cfg = RobustConfig(tau=0.8, b=2.5)
        stat, _ = deviation_check(reg, beta, cfg, Penalty("l1"), lam=1.0)
        assert stat == pytest.approx(naive_linf_gradient(y, x, beta, 0.8, 2.5), rel=1e-12)

    def test_zero_lambda_fails_on_nonzero_gradient(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        reg = Regression(y, x)
        stat, ok = deviation_check(reg, np.zeros(3), RobustConfig(tau=1, b=3), Penalty("l1"), 0.0)
        assert stat > 0 and not ok


class TestReCheck:
    def test_quadratic_regime_matches_half_rayleigh(self):
        # wide tau and b: the loss is exactly half mean squared error, so the
        # Taylor remainder ratio equals half the design quadratic form
        rng = np.random.default_rng(3)
        n, q = 60, 5
        x = rng.standard_normal((n, q))
        beta = rng.standard_normal(q)
        y = x @ beta + rng.standard_normal(n)
        reg = Regression(y, x)
        cfg = RobustConfig(tau=1e8, b=1e8)
        gram = x.T @ x / n
        seed, radius, n_dir, s = 7, 0.5, 50, 2
        got = re_check(reg, beta, cfg, radius=radius, n_directions=n_dir, sparsity_s=s, seed=seed)
        # replay the same probe directions through the quadratic-form oracle
        probe = np.random.default_rng(seed)
        best = np.inf
        for _ in range(n_dir):
            support = probe.choice(q, size=s, replace=False)
            u = np.zeros(q)
            u[support] = probe.standard_normal(s)
            u *= radius / np.linalg.norm(u)
            best = min(best, 0.5 * float(u @ gram @ u) / float(u @ u))
        assert got == pytest.approx(best, rel=0.05)

    def test_single_direction_matches_hand_computation(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((30, 3))
        beta = rng.standard_normal(3)
        y = x @ beta + rng.standard_normal(30)
        reg = Regression(y, x)
        cfg = RobustConfig(tau=1.0, b=3.0)
        radius = cfg.tau / (2 * cfg.b_max)
        got, direction = _re_probe(reg, beta, cfg, radius, 1, 2, seed=9)
        base = robust_objective(reg, beta, cfg)
        grad = robust_gradient(reg, beta, cfg)
        by_hand = min(
            (robust_objective(reg, beta + v, cfg) - base - grad @ v) / (radius**2)
            for v in (direction, -direction)
        )
        assert got == pytest.approx(by_hand, rel=1e-12)

    def test_nonnegative_by_convexity(self):
        rng = np.random.default_rng(5)
        for k in range(100):
            n, q = 20, 4
            x = rng.standard_normal((n, q)) * rng.uniform(0.5, 3)
            y = rng.standard_normal(n) * 2
            reg = Regression(y, x)
            cfg = RobustConfig(tau=float(rng.uniform(0.5, 3)), b=float(rng.uniform(1, 5)))
            val = re_check(reg, np.zeros(q), cfg, n_directions=5, sparsity_s=2, seed=k)
            assert val >= -1e-12

    def test_sign_asymmetry_outside_quadratic_regime(self):
        # a residual pattern straddling the cut-off makes +u and -u curvatures
        # differ; re_check must take the smaller one
        x = np.array([[1.0], [1.0], [-1.0]])
        y = np.array([0.9, 0.9, 2.0])
        reg = Regression(y, x)
        cfg = RobustConfig(tau=1.0, b=10.0)
        beta = np.zeros(1)
        base = robust_objective(reg, beta, cfg)
        grad = robust_gradient(reg, beta, cfg)
        radius = 0.4
        u = np.array([radius])
        up = (robust_objective(reg, u, cfg) - base - grad @ u) / radius**2
        dn = (robust_objective(reg, -u, cfg) - base - grad @ (-u)) / radius**2
        assert up != pytest.approx(dn, rel=1e-6)
        got = re_check(reg, beta, cfg, radius=radius, n_directions=3, sparsity_s=1, seed=0)
        assert got <= min(up, dn) + 1e-12


class TestReplicationDriver:
    def test_report_invariant(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((25, 3))
        beta = rng.standard_normal(3)
        y = x @ beta + rng.standard_normal(25)
        reg = Regression(y, x)
        rep = diagnostics_replication(
            reg, beta, RobustConfig(tau=1, b=3), Penalty("l1"), lam=0.8, seed=0,
            n_directions=5,
        )
        assert rep.deviation_pass == (rep.deviation_stat <= rep.lambda_half)
        assert rep.lambda_half == 0.4
        assert rep.re_directions == 5
        assert rep.min_direction is not None

    def test_experiment_deterministic(self):
        a = run_deviation_experiment(5, 20, 3.0, 1.0, 3.0, c=0.5, replications=3, seed=1)
        b = run_deviation_experiment(5, 20, 3.0, 1.0, 3.0, c=0.5, replications=3, seed=1)
        assert [r.deviation_stat for r in a] == [r.deviation_stat for r in b]

    def test_reports_csv(self, tmp_path):
        reports = run_deviation_experiment(
            5, 20, 3.0, 1.0, 3.0, c=0.5, replications=3, seed=2, include_re=True,
            n_directions=5,
        )
        path = tmp_path / "diag.csv"
        write_reports_csv(reports, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("rep,deviation_stat,lambda_half,deviation_pass")
