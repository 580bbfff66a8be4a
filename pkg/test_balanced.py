import numpy as np
import pytest

from conftest import make_biased_dataset
from fairgap.balanced import BalancedConfig, Termination, run, smooth, solve_lambda, split_gap
from fairgap.dataset import Dataset
from fairgap.errors import ConfigError, NotDifferentiableError, SingularLambdaError
from fairgap.metrics import MarginSet
from fairgap.surrogates import Surrogate, SurrogateKind
from fairgap.trainer import TrainConfig, train

LINEAR = Surrogate(SurrogateKind.LINEAR)


def test_five_point_balance_factor(five_point):
    lam = solve_lambda(five_point, LINEAR)
    assert lam == pytest.approx(2.0)
    assert split_gap(five_point, LINEAR, lam) == pytest.approx(0.0, abs=1e-12)
    assert split_gap(five_point, LINEAR, 1.0) == pytest.approx(-0.25)


def test_symmetric_zero_gap_gives_unit_balance_factor():
    m = MarginSet(np.array([2.0, -1.0, 2.0, -1.0]), np.array([1, 1, -1, -1]))
    assert split_gap(m, LINEAR, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert solve_lambda(m, LINEAR) == pytest.approx(1.0, abs=1e-12)


def test_negative_balance_factor_is_returned_as_is():
    # protected surrogate sum is strongly negative, unprotected sum positive
    m = MarginSet(np.array([-3.0, -2.0, 0.5, 0.5]), np.array([1, 1, -1, -1]))
    lam = solve_lambda(m, LINEAR)
    assert lam < 0
    assert split_gap(m, LINEAR, lam) == pytest.approx(0.0, abs=1e-12)


def test_singular_balance_factor():
    m = MarginSet(np.array([1.0, 2.0, 0.0, 0.0]), np.array([1, 1, -1, -1]))
    with pytest.raises(SingularLambdaError):
        solve_lambda(m, LINEAR)


def test_smooth():
    assert smooth(1.0, 3.0, 0.9) == pytest.approx(2.8)
    assert smooth(1.0, 3.0, 0.0) == 1.0
    with pytest.raises(ConfigError):
        smooth(1.0, 3.0, 1.5)


def test_config_validation():
    with pytest.raises(ConfigError):
        BalancedConfig(eta=0.0)
    with pytest.raises(ConfigError):
        BalancedConfig.from_dict({"tau": 5, "beta": 0.1})
    cfg = BalancedConfig.from_dict({"tau": 5, "restart_from_theta0": True})
    assert BalancedConfig.from_dict(cfg.to_dict()) == cfg


def test_run_trace_and_reports(biased_dataset):
    tcfg = TrainConfig(rho=1.0, max_epochs=60)
    result = run(biased_dataset, Surrogate(SurrogateKind.HINGE), BalancedConfig(tau=4), tcfg)
    assert len(result.lambda_trace) == result.iterations + 1
    assert len(result.reports) == result.iterations
    assert result.lambda_trace[0] == 1.0
    assert all(lam > 0 for lam in result.lambda_trace)
    assert isinstance(result.terminated_by, Termination)
    if result.terminated_by is Termination.MAX_ITER:
        assert result.iterations == 4
    doc = result.to_dict()
    assert doc["terminated_by"] == result.terminated_by.value
    assert [r["iteration"] for r in doc["reports"]] == list(range(1, result.iterations + 1))


def test_zero_smoothing_single_step_equals_plain_warm_start(biased_dataset):
    tcfg = TrainConfig(rho=1.0, max_epochs=50)
    result = run(biased_dataset, LINEAR, BalancedConfig(alpha=0.0, tau=1), tcfg)
    theta0 = train(biased_dataset, LINEAR, tcfg.with_rho(0.0)).model
    plain = train(biased_dataset, LINEAR, tcfg, init_model=theta0).model
    assert result.terminated_by is Termination.THRESHOLD
    assert result.lambda_trace == [1.0, 1.0]
    np.testing.assert_array_equal(result.theta0.weights, theta0.weights)
    np.testing.assert_array_equal(result.model.weights, plain.weights)
    assert result.model.bias == plain.bias


def test_restart_mode_starts_every_iteration_at_theta0(biased_dataset):
    tcfg = TrainConfig(rho=1.0, max_epochs=40)
    result = run(biased_dataset, Surrogate(SurrogateKind.SIGMOID), BalancedConfig(tau=3, restart_from_theta0=True), tcfg)
    assert result.theta0 is not None
    assert 1 <= result.iterations <= 3


def test_indicator_cannot_be_balanced(biased_dataset):
    with pytest.raises(NotDifferentiableError):
        run(biased_dataset, Surrogate(SurrogateKind.INDICATOR), BalancedConfig(), TrainConfig(rho=1.0))


def _mirrored(n=60, seed=0) -> Dataset:
    # every protected row has an identical unprotected twin, so both groups see the same margins
    half = make_biased_dataset(n=n, seed=seed, shift=0.0)
    features = np.vstack([half.features, half.features])
    labels = np.concatenate([half.labels, half.labels])
    sensitive = np.concatenate([np.ones(n, dtype=int), -np.ones(n, dtype=int)])
    return Dataset(features, labels, sensitive, half.feature_names, source="mirrored")


def test_zero_gap_data_stays_at_unit_balance_factor():
    data = _mirrored()
    bcfg = BalancedConfig(tau=5, eta=0.01)
    result = run(data, Surrogate(SurrogateKind.SIGMOID), bcfg, TrainConfig(rho=1.0, max_epochs=40))
    assert result.iterations == 1
    assert result.terminated_by is Termination.THRESHOLD
    assert all(abs(lam - 1.0) <= bcfg.eta for lam in result.lambda_trace)
    report = result.reports[0]
    assert report.ddp_hat == 0.0
    assert report.gap == pytest.approx(0.0, abs=1e-12)
