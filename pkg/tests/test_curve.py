import dataclasses

import numpy as np
import pytest

from ziqsi.curve import (REGION_INTERP, REGION_POSITIVE, REGION_ZERO,
                         fit_ziqsi, positive_part_value, predict_curve,
                         predict_quantile)
from ziqsi.simulation import generate_dataset
from ziqsi.store import load_model, model_from_dict, model_to_dict, save_model
from ziqsi.zero import positive_probability


class TestFitZiqsi:
    def test_grid_fit_count(self, ziqsi_model):
        assert len(ziqsi_model.fits) == 99
        assert len(ziqsi_model.grid_levels) == 99
        assert ziqsi_model.knot_selection is not None

    def test_all_positive_directs_to_baseline(self):
        rng = np.random.default_rng(41)
        X = rng.normal(size=(80, 2))
        y = np.abs(X[:, 0]) + 1.0
        with pytest.raises(ValueError, match="single-index baseline"):
            fit_ziqsi(X, y, grid_levels=np.array([0.5]))

    def test_all_zero_errors(self):
        rng = np.random.default_rng(42)
        X = rng.normal(size=(80, 2))
        with pytest.raises(ValueError, match="positive"):
            fit_ziqsi(X, np.zeros(80), grid_levels=np.array([0.5]))

    def test_negative_response_errors(self):
        rng = np.random.default_rng(43)
        X = rng.normal(size=(60, 2))
        y = np.concatenate([np.zeros(30), np.ones(30)])
        y[5] = -0.5
        with pytest.raises(ValueError, match="non-negative"):
            fit_ziqsi(X, y, grid_levels=np.array([0.5]))

    def test_small_noisy_data_completes(self):
        X, y = generate_dataset(60, 7, replicate=1)
        model = fit_ziqsi(X, y, grid_levels=np.array([0.3, 0.5, 0.7]),
                          n_knots=1, order=2)
        statuses = {f.status for f in model.fits}
        assert statuses <= {"converged", "degenerate", "max_iter"}
        pred = predict_quantile(model, X[0], 0.5)
        assert np.isfinite(pred.value)

    def test_bad_delta_and_grid(self):
        X, y = generate_dataset(60, 7, replicate=1)
        with pytest.raises(ValueError):
            fit_ziqsi(X, y, delta=0.6, grid_levels=np.array([0.5]))
        with pytest.raises(ValueError):
            fit_ziqsi(X, y, grid_levels=np.array([0.5, 0.4]))


class TestPredictRegions:
    def test_zero_region(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        x = X[3]
        pi = positive_probability(small_model.zero, x)
        tau = 0.5 * (1.0 - pi)  # strictly inside the zero region
        pred = predict_quantile(small_model, x, tau)
        assert pred.region == REGION_ZERO
        assert pred.value == 0.0
        assert pred.tau_s == 0.0

    def test_zero_region_point_six(self, small_model):
        # pi = 0.6 for every x, so tau = 0.3 < 1 - pi = 0.4 sits in the
        # zero region
        import dataclasses
        from ziqsi.zero import ZeroModel
        zero = ZeroModel(gamma=np.array([np.log(1.5), 0., 0., 0., 0., 0.]),
                         converged=True, iterations=1)
        model = dataclasses.replace(small_model, zero=zero)
        X, _ = generate_dataset(150, 20260811, replicate=5)
        pred = predict_quantile(model, X[0], 0.3)
        assert pred.region == REGION_ZERO
        assert pred.value == 0.0

    def test_change_point_is_exact_zero(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        x = X[10]
        pi = positive_probability(small_model.zero, x)
        tau = 1.0 - pi
        if not 0.0 < tau < 1.0:
            pytest.skip("profile has no interior change point")
        pred = predict_quantile(small_model, x, tau)
        assert pred.region == REGION_INTERP
        assert pred.value == 0.0

    def test_interp_region_linear_in_tau(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        x = X[7]
        pi = positive_probability(small_model.zero, x)
        cp = 1.0 - pi
        width = small_model.n_total ** (-small_model.delta)
        taus = cp + width * np.array([0.25, 0.5, 0.75])
        vals = [predict_quantile(small_model, x, t).value for t in taus]
        slope1 = (vals[1] - vals[0]) / (taus[1] - taus[0])
        slope2 = (vals[2] - vals[1]) / (taus[2] - taus[1])
        assert slope1 == pytest.approx(slope2, rel=1e-10)

    def test_region_boundary_continuity(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        x = X[2]
        pi = positive_probability(small_model.zero, x)
        cp = 1.0 - pi
        width = small_model.n_total ** (-small_model.delta)
        boundary = cp + width
        if not 0.0 < boundary < 1.0:
            pytest.skip("boundary outside (0,1) for this profile")
        left = predict_quantile(small_model, x, boundary)
        assert left.region == REGION_INTERP
        # evaluate the positive branch at the same tau
        from ziqsi.zero import tau_s_from_probability
        tau_s = tau_s_from_probability(boundary, pi)
        right_value = positive_part_value(small_model, x, tau_s)
        assert left.value == pytest.approx(right_value,
                                           rel=1e-9, abs=1e-9)

    def test_exactly_one_region(self, small_model):
        rng = np.random.default_rng(44)
        X, _ = generate_dataset(150, 20260811, replicate=5)
        for _ in range(60):
            x = X[int(rng.integers(0, 150))]
            tau = float(rng.uniform(0.01, 0.99))
            delta = float(rng.uniform(0.05, 0.45))
            model = dataclasses.replace(small_model, delta=delta)
            pred = predict_quantile(model, x, tau)
            pi = positive_probability(model.zero, x)
            cp = 1.0 - pi
            width = model.n_total ** (-delta)
            if tau < cp:
                assert pred.region == REGION_ZERO
            elif tau <= cp + width:
                assert pred.region == REGION_INTERP
            else:
                assert pred.region == REGION_POSITIVE

    def test_tau_domain(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        with pytest.raises(ValueError):
            predict_quantile(small_model, X[0], 1.2)


class TestPredictCurve:
    def test_grid_sized_curve(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        taus = np.arange(1, 100) / 100.0
        preds = predict_curve(small_model, X[0], taus)
        assert len(preds) == 99
        regions = [p.region for p in preds]
        # regions appear in canonical order along tau
        order = {"zero": 0, "interpolation": 1, "positive": 2}
        codes = [order[r] for r in regions]
        assert codes == sorted(codes)

    def test_empty_taus(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        assert predict_curve(small_model, X[0], []) == []

    def test_unsorted_same_values(self, small_model):
        X, _ = generate_dataset(150, 20260811, replicate=5)
        taus = [0.7, 0.2, 0.5, 0.9]
        a = {t: p.value for t, p in zip(taus, predict_curve(small_model, X[1], taus))}
        b = {t: p.value for t, p in zip(sorted(taus),
                                        predict_curve(small_model, X[1], sorted(taus)))}
        assert a == b


class TestSerialization:
    def test_round_trip_bit_exact_predictions(self, ziqsi_model, sim_data, tmp_path):
        X, _ = sim_data
        path = tmp_path / "model.json"
        save_model(ziqsi_model, path)
        reloaded = load_model(path)
        rng = np.random.default_rng(45)
        for _ in range(1000):
            x = X[int(rng.integers(0, X.shape[0]))]
            tau = float(rng.uniform(0.01, 0.99))
            a = predict_quantile(ziqsi_model, x, tau)
            b = predict_quantile(reloaded, x, tau)
            assert a.value == b.value
            assert a.region == b.region
            assert a.tau_s == b.tau_s

    def test_dict_round_trip_values(self, small_model):
        doc = model_to_dict(small_model)
        back = model_from_dict(doc)
        assert np.array_equal(back.grid_levels, small_model.grid_levels)
        for f1, f2 in zip(back.fits, small_model.fits):
            assert np.array_equal(f1.beta, f2.beta)
            assert np.array_equal(f1.theta, f2.theta)
            assert np.array_equal(f1.basis.knots, f2.basis.knots)
