import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpipricing.errors import RankDeficient, WindowUnavailable
from cpipricing.ingestion import CpiCatalog
from cpipricing.regression import (
    FittedModel, ModelSpec, build_design, design_matrix, feasible_window, fit_model, ols_fit,
    predict, standard_error,
)
from cpipricing.synthetic import generate_prices, make_catalog
from cpipricing.timeseries import MonthlyIndex, MonthlySeries, Window, trend_values

from conftest import PRICE_WINDOW, TRUE_COEF, TRUE_SPEC

seeds = st.integers(0, 2**32 - 1)


def random_system(seed, n=80):
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.normal(200, 20, n), rng.normal(150, 10, n),
                         np.linspace(3, 10, n), np.ones(n)])
    y = X @ np.array([1.5, -0.7, 2.0, 30.0]) + rng.standard_normal(n)
    return X, y


class TestOls:
    def test_exact_fit(self):
        X, _ = random_system(1)
        beta = np.array([2.5, -1.3, 4.0, 100.0])
        coef, res, sigma = ols_fit(X, X @ beta)
        np.testing.assert_allclose(coef, beta, rtol=1e-9)
        assert np.max(np.abs(res)) < 1e-9
        assert sigma < 1e-9

    def test_duplicated_column(self):
        X, y = random_system(2)
        X[:, 1] = X[:, 0]
        with pytest.raises(RankDeficient):
            ols_fit(X, y)

    def test_too_few_rows(self):
        X, y = random_system(3, n=7)
        with pytest.raises(ValueError):
            ols_fit(X, y)

    def test_sigma_definition(self):
        X, y = random_system(4)
        _, res, sigma = ols_fit(X, y)
        assert sigma == pytest.approx(np.sqrt(np.sum(res**2) / (len(y) - 4)), rel=1e-12)
        assert standard_error(res) == sigma

    def test_matches_lstsq(self):
        X, y = random_system(5)
        coef, _, _ = ols_fit(X, y)
        ref, *_ = np.linalg.lstsq(X, y, rcond=None)
        np.testing.assert_allclose(coef, ref, rtol=1e-9)

    def test_brute_force_grid(self):
        # no point on a dense grid around the solution has a smaller residual sum
        X, y = random_system(6)
        coef, res, _ = ols_fit(X, y)
        best = res @ res
        rng = np.random.default_rng(0)
        scale = np.abs(coef) * 1e-4 + 1e-6
        for direction in np.vstack([np.eye(4), rng.standard_normal((40, 4))]):
            for step in np.linspace(-1, 1, 41):
                trial = coef + step * direction * scale
                r = y - X @ trial
                assert r @ r >= best * (1 - 1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seeds)
    def test_orthogonality(self, seed):
        X, y = random_system(seed)
        _, res, _ = ols_fit(X, y)
        assert np.linalg.norm(X.T @ res) <= 1e-8 * np.linalg.norm(X.T @ y)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_swap_columns(self, seed):
        X, y = random_system(seed)
        coef, _, sigma = ols_fit(X, y)
        coef2, _, sigma2 = ols_fit(X[:, [1, 0, 2, 3]], y)
        assert sigma2 == pytest.approx(sigma, rel=1e-10)
        np.testing.assert_allclose(coef2[[1, 0]], coef[:2], rtol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.floats(-1e3, 1e3))
    def test_constant_shift(self, seed, k):
        X, y = random_system(seed)
        coef, res, sigma = ols_fit(X, y)
        coef2, res2, sigma2 = ols_fit(X, y + k)
        assert coef2[3] == pytest.approx(coef[3] + k, rel=1e-9, abs=1e-8)
        np.testing.assert_allclose(coef2[:3], coef[:3], rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(res2, res, atol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.floats(0.01, 100))
    def test_column_scaling(self, seed, s):
        X, y = random_system(seed)
        coef, res, sigma = ols_fit(X, y)
        Xs = X.copy()
        Xs[:, 0] *= s
        coef2, res2, sigma2 = ols_fit(Xs, y)
        assert coef2[0] == pytest.approx(coef[0] / s, rel=1e-8)
        assert sigma2 == pytest.approx(sigma, rel=1e-9)
        np.testing.assert_allclose(y - res2, y - res, rtol=1e-10)


def constant_catalog(start, n, **components):
    return CpiCatalog.from_series(
        [MonthlySeries(a, start, np.full(n, v) if np.isscalar(v) else v) for a, v in components.items()]
    )


class TestDesign:
    def test_zero_lags(self, small_catalog, exact_prices):
        spec = ModelSpec("SYN", "FS", 0, "TS", 0)
        X, y = build_design(exact_prices, small_catalog, spec, PRICE_WINDOW)
        np.testing.assert_array_equal(X[:, 0], small_catalog["FS"].slice(PRICE_WINDOW))
        np.testing.assert_array_equal(X[:, 1], small_catalog["TS"].slice(PRICE_WINDOW))
        np.testing.assert_array_equal(X[:, 2], trend_values(PRICE_WINDOW))
        np.testing.assert_array_equal(X[:, 3], 1.0)
        np.testing.assert_array_equal(y, exact_prices.values)

    def test_lag_off_the_edge(self):
        rng = np.random.default_rng(0)
        cat = make_catalog(rng, ["FS", "TS"], MonthlyIndex(2002, 1), 120)
        prices = MonthlySeries("X", MonthlyIndex(2003, 1), np.full(60, 10.0))
        window = Window(MonthlyIndex(2003, 1), MonthlyIndex(2007, 12))
        with pytest.raises(WindowUnavailable) as info:
            build_design(prices, cat, ModelSpec("X", "FS", 14, "TS", 0), window)
        # the first feasible month is 2002-01 + 14
        assert info.value.feasible.first == MonthlyIndex(2003, 3)

    def test_afl_rows(self):
        rng = np.random.default_rng(0)
        cat = make_catalog(rng, ["FS", "TS"], MonthlyIndex(2001, 1), 132)
        prices = MonthlySeries("AFL", MonthlyIndex(2003, 1), np.full(90, 40.0))
        window = Window.parse("2003-07", "2009-12")
        X, y = build_design(prices, cat, ModelSpec("AFL", "FS", -2, "TS", 6), window)
        assert X.shape == (78, 4) and len(y) == 78

    def test_negative_lag_consumes_recent_edge(self):
        cat = constant_catalog(MonthlyIndex(2001, 1), 120, FS=np.arange(120.0), TS=np.arange(120.0) ** 1.5)
        prices = MonthlySeries("X", MonthlyIndex(2001, 1), np.full(120, 1.0))
        w = feasible_window(prices, cat, ModelSpec("X", "FS", -2, "TS", 0))
        assert w.last == MonthlyIndex(2010, 10)


class TestFitPredict:
    def test_recovers_generator(self, small_catalog, exact_prices):
        model = fit_model(exact_prices, small_catalog, TRUE_SPEC)
        np.testing.assert_allclose(model.coefficients, TRUE_COEF, rtol=1e-9)
        assert model.sigma < 1e-9
        assert model.window == PRICE_WINDOW

    def test_predict_fit_window(self, small_catalog, noisy_prices):
        model = fit_model(noisy_prices, small_catalog, TRUE_SPEC)
        pred = predict(model, small_catalog, model.window)
        np.testing.assert_allclose(noisy_prices.slice(model.window) - pred.values,
                                   model.residuals, atol=1e-12 * 1e3)
        assert model.sigma == pytest.approx(standard_error(model.residuals), rel=1e-12)

    def test_constant_model(self, small_catalog):
        window = Window.parse("2004-01", "2004-12")
        model = FittedModel(TRUE_SPEC, 0.0, 0.0, 0.0, 5.0, 0.0, window, np.zeros(12))
        np.testing.assert_array_equal(predict(model, small_catalog, window).values, 5.0)

    def test_extension_matches_generator(self, small_catalog):
        prefix = Window.parse("2003-07", "2008-06")
        prices = generate_prices(small_catalog, TRUE_SPEC, TRUE_COEF, prefix)
        model = fit_model(prices, small_catalog, TRUE_SPEC)
        suffix = Window.parse("2008-07", "2011-06")
        expected = design_matrix(small_catalog, TRUE_SPEC, suffix) @ np.array(TRUE_COEF)
        np.testing.assert_allclose(predict(model, small_catalog, suffix).values, expected,
                                   rtol=1e-9)

    def test_predict_beyond_data(self, small_catalog, exact_prices):
        model = fit_model(exact_prices, small_catalog, TRUE_SPEC)
        with pytest.raises(WindowUnavailable) as info:
            predict(model, small_catalog, Window.parse("2010-01", "2013-01"))
        # CPI ends 2011-12; the shorter lag (3) limits the horizon
        assert info.value.feasible.last == MonthlyIndex(2012, 3)

    def test_model_invariants(self):
        with pytest.raises(ValueError):
            ModelSpec("X", "FS", 0, "FS", 1)
        with pytest.raises(ValueError):
            FittedModel(TRUE_SPEC, 1, 1, 1, 1, 0.1, Window.parse("2004-01", "2004-12"), np.zeros(11))

    def test_canonical(self):
        spec = ModelSpec("X", "TS", 5, "FS", 3)
        assert spec.canonical() == ModelSpec("X", "FS", 3, "TS", 5)
