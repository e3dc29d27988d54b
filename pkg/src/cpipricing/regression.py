"""Least-squares fitting of the two-component lagged CPI price model.

A model explains a monthly share price as

    price(t) = b1 * CPI1(t - tau1) + b2 * CPI2(t - tau2) + c * (t - 2000) + d

with the design columns always ordered ``[cpi1 shifted, cpi2 shifted, trend, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import RankDeficient, WindowUnavailable
from .timeseries import MonthlySeries, Window, shift, trend_values

N_PARAMS = 4
MIN_OBS = 8
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    ticker: str
    cpi1: str
    tau1: int
    cpi2: str
    tau2: int

    def __post_init__(self):
        if self.cpi1 == self.cpi2:
            raise ValueError(f"model needs two distinct components, got {self.cpi1} twice")

    def canonical(self) -> ModelSpec:
        """Same model with components in acronym order."""
        if self.cpi1 <= self.cpi2:
            return self
        return ModelSpec(self.ticker, self.cpi2, self.tau2, self.cpi1, self.tau1)

    def sort_key(self) -> tuple:
        return (self.cpi1, self.cpi2, self.tau1, self.tau2)

    def __str__(self) -> str:
        return f"{self.ticker}: {self.cpi1}({self.tau1:+d}) {self.cpi2}({self.tau2:+d})"


@dataclass(frozen=True, eq=False)
class FittedModel:
    spec: ModelSpec
    b1: float
    b2: float
    c: float
    d: float
    sigma: float
    window: Window
    residuals: np.ndarray

    def __post_init__(self):
        res = np.array(self.residuals, dtype=float).reshape(-1)
        res.flags.writeable = False
        object.__setattr__(self, "residuals", res)
        if len(res) != len(self.window):
            raise ValueError(
                f"{len(res)} residuals for a {len(self.window)}-month window"
            )

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.b1, self.b2, self.c, self.d])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FittedModel):
            return NotImplemented
        return (
            self.spec == other.spec
            and (self.b1, self.b2, self.c, self.d, self.sigma)
            == (other.b1, other.b2, other.c, other.d, other.sigma)
            and self.window == other.window
            and np.array_equal(self.residuals, other.residuals)
        )

    __hash__ = None


class OlsResult(NamedTuple):
    coefficients: np.ndarray
    residuals: np.ndarray
    sigma: float


def standard_error(residuals: np.ndarray, n_params: int = N_PARAMS) -> float:
    """sqrt(sum e^2 / (J - n_params))."""
    residuals = np.asarray(residuals, dtype=float)
    return float(np.sqrt(residuals @ residuals / (len(residuals) - n_params)))


def ols_fit(X: np.ndarray, y: np.ndarray) -> OlsResult:
    """Least squares via the thin SVD of ``X``.

    Raises RankDeficient when the smallest singular value is below
    ``1e-10`` times the largest.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n_obs, n_cols = X.shape
    if n_obs != len(y):
        raise ValueError(f"X has {n_obs} rows but y has {len(y)}")
    if n_obs < max(MIN_OBS, n_cols + 1):
        raise ValueError(f"need at least {max(MIN_OBS, n_cols + 1)} observations, got {n_obs}")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if not s[-1] >= RANK_RTOL * s[0]:
        raise RankDeficient(
            f"design is rank deficient: singular value ratio {s[-1] / s[0]:.3g}"
        )
    beta = Vt.T @ ((U.T @ y) / s)
    residuals = y - X @ beta
    return OlsResult(beta, residuals, standard_error(residuals, n_cols))


def _shifted(catalog: Mapping[str, MonthlySeries], acronym: str, lag: int) -> MonthlySeries:
    return shift(catalog[acronym], lag)


def regressor_window(catalog, spec: ModelSpec) -> Window | None:
    """Months on which both shifted CPI regressors are defined."""
    w1 = _shifted(catalog, spec.cpi1, spec.tau1).window
    w2 = _shifted(catalog, spec.cpi2, spec.tau2).window
    return w1.intersect(w2)


def feasible_window(prices: MonthlySeries, catalog, spec: ModelSpec,
                    within: Window | None = None) -> Window | None:
    """Maximal window where prices and both shifted regressors exist."""
    window = regressor_window(catalog, spec)
    if window is not None:
        window = window.intersect(prices.window)
    if window is not None and within is not None:
        window = window.intersect(within)
    return window


def design_matrix(catalog, spec: ModelSpec, window: Window) -> np.ndarray:
    feasible = regressor_window(catalog, spec)
    if feasible is None or not feasible.contains_window(window):
        raise WindowUnavailable(
            f"{spec}: regressors do not cover {window} (feasible: {feasible})",
            feasible=None if feasible is None else feasible.intersect(window),
        )
    x1 = _shifted(catalog, spec.cpi1, spec.tau1).slice(window)
    x2 = _shifted(catalog, spec.cpi2, spec.tau2).slice(window)
    return np.column_stack([x1, x2, trend_values(window), np.ones(len(window))])


def build_design(prices: MonthlySeries, catalog, spec: ModelSpec,
                 window: Window) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and observed prices over ``window``.

    Raises WindowUnavailable (carrying the maximal feasible window) when a lag
    pushes a regressor, or the price series, off the data edge.
    """
    feasible = feasible_window(prices, catalog, spec)
    if feasible is None or not feasible.contains_window(window):
        raise WindowUnavailable(
            f"{spec}: window {window} not available (maximal feasible: {feasible})",
            feasible=feasible,
        )
    return design_matrix(catalog, spec, window), prices.slice(window).copy()


def fit_model(prices: MonthlySeries, catalog, spec: ModelSpec,
              window: Window | None = None) -> FittedModel:
    """Fit ``spec`` over ``window`` (default: maximal feasible window)."""
    if window is None:
        window = feasible_window(prices, catalog, spec)
        if window is None:
            raise WindowUnavailable(f"{spec}: no month where all series overlap")
    X, y = build_design(prices, catalog, spec, window)
    beta, residuals, sigma = ols_fit(X, y)
    b1, b2, c, d = (float(v) for v in beta)
    return FittedModel(spec, b1, b2, c, d, sigma, window, residuals)


def predict(model: FittedModel, catalog, range: Window) -> MonthlySeries:
    """Model prices over ``range`` using actual CPI readings.

    Values may be negative. Raises WindowUnavailable with the maximal feasible
    sub-range when the shifted CPI data do not cover ``range``.
    """
    X = design_matrix(catalog, model.spec, range)
    values = X @ model.coefficients
    return MonthlySeries(f"{model.spec.ticker}:predicted", range.first, values)
