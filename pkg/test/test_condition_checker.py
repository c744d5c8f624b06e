"""
Tests for the stationarity and non-negativity checks.
"""

import numpy as np
import pytest

from app.cogarch.engine import CogarchParams
from app.conditions.checker import (
    check_conditions,
    check_eigen,
    check_horizon,
    check_log_moment,
    check_nonneg,
    jump_constant,
    log_moment_integral,
    log_moment_rhs,
)
from app.matrix_core.linalg import eigen
from app.semi_levy.distributions import NormalJump, PointMassJump
from app.semi_levy.process import SemiLevyConfig
from app.shared.errors import NumericalError, ParameterError


def _scaled_variance(cfg: SemiLevyConfig, factor: float) -> SemiLevyConfig:
    dists = tuple(NormalJump(mu=d.mu, sigma2=d.sigma2 * factor) for d in cfg.jump_dists)
    return cfg.model_copy(update={"jump_dists": dists})


# ==================== EIGENVALUES ====================

class TestEigenCheck:
    def test_seasonal(self, seasonal_params):
        check = check_eigen(seasonal_params)
        assert check.ok and check.distinct
        assert check.eta_max == pytest.approx(-0.1036, abs=1e-3)
        assert len(check.eigenvalues) == 3

    def test_positive_root(self):
        check = check_eigen(CogarchParams(p=1, q=1, alpha0=1.0, alphas=(0.1,), betas=(-1.0,)))
        assert not check.ok and check.distinct
        assert check.eta_max == pytest.approx(1.0)

    def test_repeated_root(self):
        check = check_eigen(CogarchParams(p=1, q=2, alpha0=1.0, alphas=(0.1,), betas=(2.0, 1.0)))
        assert not check.ok and not check.distinct
        assert check.eta_max is None


# ==================== LOG MOMENT ====================

class TestLogMoment:
    def test_rhs_is_constant(self, seasonal_cfg, rng):
        reference = log_moment_rhs(seasonal_cfg, -0.1)
        assert reference == pytest.approx(0.1 * 6.5 / 57.0)
        for t in rng.uniform(0.0, 30.0, size=10):
            assert abs(log_moment_rhs(seasonal_cfg, -0.1, t) - reference) < 1e-12

    def test_quadrature_against_monte_carlo(self):
        dist, c = NormalJump(mu=2.0, sigma2=4.0), 0.01
        draws = np.log1p(c * np.random.default_rng(8).normal(2.0, 2.0, size=1_000_000) ** 2)
        standard_error = draws.std() / np.sqrt(draws.size)
        assert abs(log_moment_integral(dist, c) - draws.mean()) < 4.0 * standard_error

    def test_small_c_expansion(self):
        dist, c = NormalJump(mu=1.5, sigma2=2.5), 1e-6
        assert log_moment_integral(dist, c) == pytest.approx(c * dist.second_moment, rel=1e-5)

    def test_quadrature_failure(self):
        with pytest.raises(NumericalError):
            log_moment_integral(NormalJump(mu=0.0, sigma2=1e12), 1.0)

    def test_point_mass_at_zero(self, seasonal_params):
        cfg = SemiLevyConfig(
            period_tau=6.5,
            lengths=(0.5, 2.5, 3.0, 0.5),
            rates=(4.0, 10.0, 5.0, 30.0),
            jump_dists=tuple(PointMassJump(value=0.0) for _ in range(4)),
        )
        for r in (1, 2, np.inf):
            check = check_log_moment(cfg, seasonal_params, r)
            assert check.ok
            assert check.integrals == (0.0, 0.0, 0.0, 0.0)
            assert check.partition_margin == pytest.approx(check.rhs)

    def test_seasonal_rules(self, seasonal_cfg, seasonal_params):
        weighted = check_log_moment(seasonal_cfg, seasonal_params, 1, rule="weighted")
        partition = check_log_moment(seasonal_cfg, seasonal_params, 1, rule="partition")
        assert weighted.ok and not partition.ok
        assert weighted.weighted_margin == partition.weighted_margin
        assert weighted.margin == weighted.weighted_margin
        assert partition.margin == partition.partition_margin
        assert weighted.constant == pytest.approx(jump_constant(seasonal_params, eigen(seasonal_params.B), 1))

    def test_zero_mean_parameters_fail(self, zero_mean_cfg, zero_mean_params):
        for r in (1, 2, np.inf):
            assert not check_log_moment(zero_mean_cfg, zero_mean_params, r).ok

    def test_inflated_variance_fails(self, seasonal_cfg, seasonal_params):
        report = check_conditions(_scaled_variance(seasonal_cfg, 1e6), seasonal_params)
        assert not report.log_moment_ok
        assert not report.overall

    def test_unknown_rule(self, seasonal_cfg, seasonal_params):
        with pytest.raises(ParameterError):
            check_log_moment(seasonal_cfg, seasonal_params, 2, rule="strict")

    def test_needs_stable_eigenvalues(self, seasonal_cfg):
        params = CogarchParams(p=1, q=3, alpha0=1e-6, alphas=(0.005,), betas=(-2.1, 6.0, 0.6))
        with pytest.raises(ParameterError):
            check_log_moment(seasonal_cfg, params, 2)


# ==================== NON-NEGATIVITY ====================

class TestNonneg:
    def test_scalar_kernel(self, seasonal_cfg):
        positive = CogarchParams(p=1, q=1, alpha0=1.0, alphas=(0.3,), betas=(0.5,))
        negative = CogarchParams(p=1, q=1, alpha0=1.0, alphas=(-0.3,), betas=(0.5,))
        assert check_nonneg(seasonal_cfg, positive).ok
        check = check_nonneg(seasonal_cfg, negative)
        assert not check.ok and not check.kernel_ok
        assert check.f_min == pytest.approx(-0.3)

    def test_seasonal(self, seasonal_cfg, seasonal_params):
        check = check_nonneg(seasonal_cfg, seasonal_params)
        assert check.ok and check.kernel_ok
        assert check.gamma == pytest.approx(0.0, abs=1e-15)
        assert check.floor == pytest.approx(seasonal_params.alpha0)
        assert check.step == pytest.approx(6.5 / 1000)
        assert check.horizon == pytest.approx(check_horizon(seasonal_params, eigen(seasonal_params.B)))

    def test_refinement_agrees(self, seasonal_cfg, seasonal_params):
        coarse = check_nonneg(seasonal_cfg, seasonal_params)
        fine = check_nonneg(seasonal_cfg, seasonal_params, step=coarse.step / 10.0)
        assert fine.ok == coarse.ok
        assert fine.grid_points > coarse.grid_points

    def test_initial_state_below_floor(self, seasonal_cfg, seasonal_params):
        params = seasonal_params.model_copy(update={"y0": (-1e-3, 0.0, 0.0)})
        check = check_nonneg(seasonal_cfg, params)
        assert check.kernel_ok and not check.ok
        assert check.gamma < -params.alpha0
        assert "alpha0" in check.message

    def test_gamma_within_floor(self, seasonal_cfg, seasonal_params):
        params = seasonal_params.model_copy(update={"y0": (-1e-4, 0.0, 0.0)})
        check = check_nonneg(seasonal_cfg, params)
        assert check.ok
        assert -params.alpha0 < check.gamma <= -5e-7 * (1.0 - 1e-9)
        assert check.floor == pytest.approx(params.alpha0 + check.gamma)

    def test_invalid_step(self, seasonal_cfg, seasonal_params):
        with pytest.raises(ParameterError):
            check_nonneg(seasonal_cfg, seasonal_params, step=0.0)

    def test_unstable_reported(self, seasonal_cfg):
        params = CogarchParams(p=1, q=1, alpha0=1.0, alphas=(0.1,), betas=(-1.0,))
        check = check_nonneg(seasonal_cfg, params)
        assert not check.ok and check.gamma is None


# ==================== FULL REPORT ====================

class TestReport:
    def test_seasonal_passes(self, seasonal_cfg, seasonal_params):
        report = check_conditions(seasonal_cfg, seasonal_params)
        assert report.eigen_ok and report.log_moment_ok and report.nonneg_ok
        assert report.overall
        assert report.passing_norms == ["r1", "r2"]
        assert report.notes == []

    def test_key_values(self, seasonal_cfg, seasonal_params):
        values = check_conditions(seasonal_cfg, seasonal_params).to_key_values()
        assert list(values) == [
            "eigen_ok", "eta_max", "log_moment_rule",
            "log_moment_margin_r1", "log_moment_margin_r2", "log_moment_margin_rinf",
            "log_moment_ok", "nonneg_ok", "gamma", "floor", "overall",
        ]
        assert values["overall"] == "true"
        assert values["log_moment_rule"] == "weighted"
        assert float(values["log_moment_margin_r1"]) > 0.0
        assert float(values["log_moment_margin_rinf"]) < 0.0
        assert abs(float(values["gamma"])) < 1e-15

    def test_partition_rule_is_named(self, seasonal_cfg, seasonal_params):
        report = check_conditions(seasonal_cfg, seasonal_params, rule="partition")
        values = report.to_key_values()
        assert values["log_moment_rule"] == "partition"
        # the seasonal model passes only under the weighted rule
        for label in ("r1", "r2", "rinf"):
            assert float(values[f"log_moment_margin_{label}"]) < 0.0
        assert values["log_moment_ok"] == "false" and values["overall"] == "false"
        assert report.to_text().splitlines()[2] == "log-moment rule: partition"
        with pytest.raises(ParameterError):
            check_conditions(seasonal_cfg, seasonal_params, rule="median")

    def test_negated_beta(self, seasonal_cfg, seasonal_params):
        params = seasonal_params.model_copy(update={"betas": (-2.1, 6.0, 0.6)})
        report = check_conditions(seasonal_cfg, params)
        assert not report.eigen_ok and not report.overall
        values = report.to_key_values()
        assert values["eigen_ok"] == "false"
        assert values["log_moment_margin_r2"] == "none"
        assert values["gamma"] == "none"

    def test_numerical_failure_is_noted(self, seasonal_cfg, seasonal_params):
        dists = (NormalJump(mu=0.0, sigma2=1e12),) + seasonal_cfg.jump_dists[1:]
        report = check_conditions(seasonal_cfg.model_copy(update={"jump_dists": dists}), seasonal_params)
        assert not report.log_moment_ok
        assert len(report.notes) == 3
        assert all(not check.ok for check in report.log_moment.values())

    def test_text_and_dict(self, seasonal_cfg, seasonal_params):
        report = check_conditions(seasonal_cfg, seasonal_params)
        text = report.to_text()
        assert text.splitlines()[-1] == "overall: OK"
        assert "log-moment [r1, weighted]: OK" in text
        payload = report.to_dict()
        assert payload["passing_norms"] == ["r1", "r2"]
        assert payload["text"] == text


@pytest.mark.slow
def test_stable_parameters_stay_bounded(seasonal_cfg, seasonal_params):
    from app.cogarch.engine import simulate_ensemble

    for path in simulate_ensemble(seasonal_cfg, seasonal_params, 100, 0.25, seeds=range(20)):
        assert np.all(np.isfinite(path.states))
        assert np.max(np.linalg.norm(path.states, axis=1)) < 1.0
