
import numpy as np
import pytest

from ziqsi.numerics import (angles_from_unit_vector, check_loss,
                            fit_linear_quantile, minimize_on_sphere,
                            unit_vector_from_angles)


class TestCheckLoss:
    @pytest.mark.parametrize("u,tau,expected", [
        (1.0, 0.5, 0.5),
        (-1.0, 0.5, 0.5),
        (-2.0, 0.3, 1.4),
        (0.0, 0.9, 0.0),
    ])
    def test_values(self, u, tau, expected):
        assert check_loss(u, tau) == pytest.approx(expected, abs=1e-15)

    def test_nonnegative_and_zero_iff_zero(self):
        rng = np.random.default_rng(1)
        u = rng.normal(scale=5.0, size=500)
        tau = rng.uniform(0.01, 0.99, size=500)
        vals = np.array([check_loss(ui, ti) for ui, ti in zip(u, tau)])
        assert np.all(vals >= 0)
        assert np.all(vals[u != 0] > 0)

    def test_mirror_identity(self):
        # rho(u) + rho(-u) = |u|
        rng = np.random.default_rng(2)
        for _ in range(200):
            u = float(rng.normal(scale=10.0))
            tau = float(rng.uniform(0.01, 0.99))
            assert check_loss(u, tau) + check_loss(-u, tau) == pytest.approx(abs(u), rel=1e-14)

    def test_tau_domain(self):
        with pytest.raises(ValueError):
            check_loss(1.0, 0.0)
        with pytest.raises(ValueError):
            check_loss(1.0, 1.0)


def _breakpoint_objective(y, tau):
    """Brute force: the optimum of an intercept-only quantile fit is
    attained at one of the response values."""
    return min(float(np.mean(check_loss(y - c, tau))) for c in y)


class TestLinearQuantile:
    def test_intercept_only_median(self):
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        sol = fit_linear_quantile(np.ones((5, 1)), y, 0.5)
        assert sol.status == "converged"
        assert sol.coefficients[0] == pytest.approx(3.0, abs=1e-6)

    def test_perfect_fit(self):
        x = np.linspace(-2, 3, 20)
        y = 2.0 * x
        for tau in (0.1, 0.5, 0.9):
            sol = fit_linear_quantile(x[:, None], y, tau)
            assert sol.coefficients[0] == pytest.approx(2.0, abs=1e-6)
            assert sol.objective <= 1e-8

    def test_breakpoint_oracle_quartile(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        sol = fit_linear_quantile(np.ones((4, 1)), y, 0.25)
        oracle = _breakpoint_objective(y, 0.25)
        assert oracle == pytest.approx(0.375)  # computed by the brute force
        assert sol.objective == pytest.approx(oracle, abs=1e-8)

    def test_objective_not_worse_than_zero_vector(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(8, 60))
            k = int(rng.integers(1, 5))
            Z = rng.normal(size=(n, k))
            y = rng.normal(scale=3.0, size=n)
            tau = float(rng.uniform(0.05, 0.95))
            sol = fit_linear_quantile(Z, y, tau)
            zero_obj = float(np.mean(check_loss(y, tau)))
            assert sol.objective <= zero_obj + 1e-10

    def test_intercept_within_quantile_minimizer_interval(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            n = int(rng.integers(5, 40))
            y = np.round(rng.normal(scale=4.0, size=n), 2)
            tau = float(rng.uniform(0.05, 0.95))
            sol = fit_linear_quantile(np.ones((n, 1)), y, tau)
            objs = np.array([np.mean(check_loss(y - c, tau)) for c in y])
            minimizers = y[objs <= objs.min() + 1e-12]
            assert minimizers.min() - 1e-6 <= sol.coefficients[0] <= minimizers.max() + 1e-6

    def test_degenerate_design_flagged_not_crashed(self):
        x = np.linspace(0, 1, 12)
        Z = np.column_stack([x, x])  # exact rank deficiency
        y = np.full(12, 2.5)
        sol = fit_linear_quantile(Z, y, 0.5)
        assert sol.status == "degenerate"
        assert np.all(np.isfinite(sol.coefficients))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fit_linear_quantile(np.ones((5, 1)), np.ones(4), 0.5)
        with pytest.raises(ValueError):
            fit_linear_quantile(np.ones((2, 3)), np.ones(2), 0.5)


class TestSphereMinimizer:
    def test_init_is_global_minimum(self):
        e1 = np.array([1.0, 0.0, 0.0])
        res = minimize_on_sphere(lambda b: float(np.sum((b - e1) ** 2)), 3, e1)
        assert np.linalg.norm(res.beta - e1) < 1e-6
        assert res.objective <= 1e-10

    def test_boundary_optimum_halfcircle(self):
        res = minimize_on_sphere(lambda b: -b[1], 2, np.array([1.0, 0.0]))
        assert np.linalg.norm(res.beta - np.array([0.0, 1.0])) < 1e-4

    def test_random_quadratic_matches_angle_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            A = rng.normal(size=(3, 3))
            A = A @ A.T
            b = rng.normal(size=3)

            def f(beta):
                return float(beta @ A @ beta + b @ beta)

            # dense feasible-set grid at 0.01 rad (phi1 capped at pi/2 so
            # every grid point satisfies beta_1 >= 0)
            phi1 = np.append(np.arange(0.0, np.pi / 2, 0.01), np.pi / 2)
            phi2 = np.arange(0.0, 2 * np.pi, 0.01)
            P1, P2 = np.meshgrid(phi1, phi2, indexing="ij")
            B1 = np.cos(P1)
            B2 = np.sin(P1) * np.cos(P2)
            B3 = np.sin(P1) * np.sin(P2)
            vals = (A[0, 0] * B1 ** 2 + A[1, 1] * B2 ** 2 + A[2, 2] * B3 ** 2
                    + 2 * A[0, 1] * B1 * B2 + 2 * A[0, 2] * B1 * B3
                    + 2 * A[1, 2] * B2 * B3 + b[0] * B1 + b[1] * B2 + b[2] * B3)
            grid_min = float(vals.min())

            init = np.array([1.0, 0.0, 0.0])
            res = minimize_on_sphere(f, 3, init)
            assert abs(res.objective - grid_min) <= 1e-3

    def test_feasibility_invariants(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = int(rng.integers(2, 6))
            A = rng.normal(size=(p, p))
            v = rng.normal(size=p)
            v[0] = abs(v[0])
            v = v / np.linalg.norm(v)
            res = minimize_on_sphere(lambda b: float(np.sum((A @ b) ** 2) + b @ v),
                                     p, v)
            assert abs(np.linalg.norm(res.beta) - 1.0) <= 1e-12
            assert res.beta[0] >= -1e-12

    def test_objective_never_increases_from_init(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = int(rng.integers(2, 5))
            c = rng.normal(size=p)
            init = rng.normal(size=p)
            init[0] = abs(init[0])
            init = init / np.linalg.norm(init)

            def f(beta):
                return float(np.cos(3 * beta @ c) + 0.2 * beta @ c)

            res = minimize_on_sphere(f, p, init)
            assert res.objective <= f(init) + 1e-12

    def test_nonfinite_init_errors(self):
        with pytest.raises(ValueError):
            minimize_on_sphere(lambda b: float("nan"), 2, np.array([1.0, 0.0]))

    def test_nonfinite_during_search_bounded(self):
        # objective finite at init but rapidly poisoned: the search must
        # give up with an error rather than loop forever
        calls = {"n": 0}

        def f(beta):
            calls["n"] += 1
            return 0.0 if calls["n"] == 1 else float("inf")

        with pytest.raises(RuntimeError):
            minimize_on_sphere(f, 3, np.array([1.0, 0.0, 0.0]),
                               nonfinite_budget=50)

    def test_angle_roundtrip(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = int(rng.integers(2, 7))
            v = rng.normal(size=p)
            v = v / np.linalg.norm(v)
            back = unit_vector_from_angles(angles_from_unit_vector(v))
            assert np.allclose(back, v, atol=1e-12)
