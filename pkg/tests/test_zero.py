import warnings

import numpy as np
import pytest
from scipy.special import expit

from ziqsi.zero import (ZeroModel, fit_logistic, gamma_map, log_likelihood,
                        positive_probability)


def _symmetric_dataset():
    """Sign-balanced: invariant under (x, z) -> (-x, 1-z), which forces a
    zero intercept at the optimum."""
    x = np.array([1.0, 2.0, 3.0, -1.0, -2.0, -3.0, 1.5, -1.5])
    z = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    return x[:, None], z


class TestFitLogistic:
    def test_symmetric_intercept_zero(self):
        X, z = _symmetric_dataset()
        model = fit_logistic(X, z)
        assert model.converged
        assert abs(model.gamma[0]) < 1e-8

    def test_matches_likelihood_grid_oracle(self):
        # grid search of the log-likelihood over [-5, 5]^2 at step 1e-3,
        # run once and frozen: argmax (-0.222, 0.627)
        x = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0])
        z = np.array([0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
        model = fit_logistic(x[:, None], z)
        assert model.converged
        assert np.max(np.abs(model.gamma - np.array([-0.222, 0.627]))) < 2e-3

    def test_single_class_errors(self):
        X = np.linspace(0, 1, 10)[:, None]
        with pytest.raises(ValueError):
            fit_logistic(X, np.ones(10))
        with pytest.raises(ValueError):
            fit_logistic(X, np.zeros(10))

    def test_separation_warns_not_crashes(self):
        x = np.linspace(-2, 2, 30)
        z = (x > 0).astype(float)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            model = fit_logistic(x[:, None], z)
        assert not model.converged
        assert any("diverging" in str(w.message) or "converge" in str(w.message)
                   for w in caught)
        assert np.all(np.isfinite(model.gamma))

    def test_score_equations_hold_at_optimum(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(80, 3))
        z = (rng.uniform(size=80) < expit(0.3 + X @ [0.5, -0.7, 0.2])).astype(float)
        model = fit_logistic(X, z)
        Xa = np.column_stack([np.ones(80), X])
        score = Xa.T @ (z - expit(Xa @ model.gamma))
        assert np.max(np.abs(score)) < 1e-8

    def test_loglik_beats_null(self):
        X, z = _symmetric_dataset()
        model = fit_logistic(X, z)
        assert log_likelihood(model, X, z) >= log_likelihood(np.zeros(2), X, z)


class TestPositiveProbability:
    def test_zero_gamma_is_half(self):
        model = ZeroModel(np.zeros(3), True, 1)
        assert positive_probability(model, np.array([4.0, -2.0])) == 0.5

    def test_odds_three(self):
        model = ZeroModel(np.array([np.log(3.0), 0.0]), True, 1)
        assert positive_probability(model, np.array([5.0])) == pytest.approx(0.75, abs=1e-14)

    def test_saturation_without_underflow(self):
        model = ZeroModel(np.array([-50.0, 0.0]), True, 1)
        p = positive_probability(model, np.array([0.0]))
        assert 0.0 < p < 1e-20
        model = ZeroModel(np.array([700.0, 0.0]), True, 1)
        p = positive_probability(model, np.array([0.0]))
        assert 0.0 < p < 1.0

    def test_matrix_input(self):
        model = ZeroModel(np.array([0.1, 0.5, -0.2]), True, 1)
        X = np.array([[1.0, 2.0], [0.0, 0.0]])
        probs = positive_probability(model, X)
        assert probs.shape == (2,)
        assert probs[1] == pytest.approx(expit(0.1))


class TestGammaMap:
    def test_half_probability_values(self):
        model = ZeroModel(np.zeros(2), True, 1)  # pi = 0.5 everywhere
        x = np.array([0.0])
        assert gamma_map(0.75, x, model) == pytest.approx(0.5, abs=1e-15)
        assert gamma_map(0.3, x, model) == 0.0
        assert gamma_map(0.5, x, model) == 0.0  # boundary clamps exactly

    def test_identity_when_no_zero_mass(self):
        model = ZeroModel(np.array([700.0, 0.0]), True, 1)
        assert gamma_map(0.42, np.array([0.0]), model) == pytest.approx(0.42, abs=1e-12)

    def test_inverse_property(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            gamma = rng.normal(scale=0.8, size=3)
            model = ZeroModel(gamma, True, 1)
            x = rng.normal(size=2)
            pi = positive_probability(model, x)
            s = float(rng.uniform(0.01, 0.99))
            tau = 1.0 - pi + pi * s
            if not 0.0 < tau < 1.0:
                continue
            assert gamma_map(tau, x, model) == pytest.approx(s, abs=1e-12)

    def test_monotone_in_tau(self):
        model = ZeroModel(np.array([0.2, -0.4]), True, 1)
        x = np.array([1.3])
        taus = np.linspace(0.01, 0.99, 99)
        vals = [gamma_map(t, x, model) for t in taus]
        assert np.all(np.diff(vals) >= 0)
        assert all(0.0 <= v < 1.0 for v in vals)

    def test_tau_domain(self):
        model = ZeroModel(np.zeros(2), True, 1)
        with pytest.raises(ValueError):
            gamma_map(1.0, np.array([0.0]), model)
