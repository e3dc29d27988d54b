"""Point-in-time replay: fit as of a past month, project forward, score divergence."""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import NoFeasibleCandidate, WindowUnavailable
from .regression import FittedModel, predict, regressor_window
from .search import SearchConfig, SearchResult, search_best
from .timeseries import MonthlyIndex, MonthlySeries, Window


def truncate_inputs(prices: MonthlySeries, catalog, asof: MonthlyIndex,
                    reporting_lag: int = 0):
    """Prices cut at ``asof`` and CPI cut at ``asof - reporting_lag``."""
    cut_prices = prices.truncate(asof)
    cut_catalog = catalog.truncate(asof - reporting_lag)
    return cut_prices, cut_catalog


def search_asof(prices: MonthlySeries, catalog, asof: MonthlyIndex,
                config: SearchConfig | None = None, reporting_lag: int = 0,
                jobs: int = 1) -> SearchResult:
    """Full search using only data observable at ``asof``.

    Every input series is truncated before the search runs, so no value after
    ``asof`` can reach the fit.
    """
    config = config or SearchConfig()
    cut_prices, cut_catalog = truncate_inputs(prices, catalog, asof, reporting_lag)
    if cut_prices is None:
        raise NoFeasibleCandidate(f"no price data for {prices.id} on or before {asof}")
    if config.window is not None:
        if config.window.first > asof:
            raise NoFeasibleCandidate(f"search window {config.window} starts after {asof}")
        config = replace(config, window=Window(config.window.first, min(config.window.last, asof)))
    return search_best(cut_prices, cut_catalog, config, jobs=jobs)


def fit_asof(prices: MonthlySeries, catalog, asof: MonthlyIndex,
             config: SearchConfig | None = None, reporting_lag: int = 0,
             jobs: int = 1) -> FittedModel:
    return search_asof(prices, catalog, asof, config, reporting_lag, jobs).best


def projection_horizon(model: FittedModel, catalog) -> MonthlyIndex | None:
    """Last month the model can be evaluated with the available CPI data."""
    window = regressor_window(catalog, model.spec)
    return None if window is None else window.last


def project(model: FittedModel, catalog, through: MonthlyIndex,
            start: MonthlyIndex | None = None) -> MonthlySeries:
    """Model prices from ``start`` (default: month after the fit window) to ``through``.

    Raises WindowUnavailable, carrying the feasible horizon, when the CPI data
    end too early for the model's lags.
    """
    start = model.window.last + 1 if start is None else start
    if through < start:
        raise ValueError(f"projection end {through} precedes start {start}")
    try:
        return predict(model, catalog, Window(start, through))
    except WindowUnavailable as exc:
        horizon = projection_horizon(model, catalog)
        feasible = None
        if horizon is not None and horizon >= start:
            feasible = Window(start, horizon)
        raise WindowUnavailable(
            f"{model.spec}: CPI data support projection only through {horizon}",
            feasible=feasible,
        ) from exc


def _rms(values: np.ndarray) -> float | None:
    return float(np.sqrt(np.mean(values**2))) if len(values) else None


@dataclass
class AsOfRun:
    asof: MonthlyIndex
    model: FittedModel
    projection: MonthlySeries | None
    divergence: MonthlySeries | None
    rms_forward: float | None


def run_asof(prices: MonthlySeries, catalog, asof: MonthlyIndex, through: MonthlyIndex,
             config: SearchConfig | None = None, reporting_lag: int = 0,
             jobs: int = 1) -> AsOfRun:
    """Fit as of ``asof`` and project with actual CPI as far as ``through`` allows.

    The projection stops early (at the feasible horizon) when lags or the CPI
    data do not reach ``through``. Divergence is observed minus projected.
    """
    model = fit_asof(prices, catalog, asof, config, reporting_lag, jobs)
    start = asof + 1
    end = through
    horizon = projection_horizon(model, catalog)
    if horizon is not None:
        end = min(end, horizon)
    if end < start:
        return AsOfRun(asof, model, None, None, None)
    projection = project(model, catalog, end, start)
    overlap = projection.window.intersect(prices.window)
    divergence = None
    if overlap is not None:
        diff = prices.slice(overlap) - projection.slice(overlap)
        divergence = MonthlySeries(f"{prices.id}:divergence", overlap.first, diff)
    rms = _rms(divergence.values) if divergence is not None else None
    return AsOfRun(asof, model, projection, divergence, rms)


def divergence_onset(months: list[MonthlyIndex], observed: np.ndarray, projected: np.ndarray,
                     sigma: float, k_sigma: float = 2.0, run_length: int = 3) -> MonthlyIndex | None:
    """First month opening a run of ``run_length`` months with |gap| > k_sigma * sigma.

    The threshold has a floor of 1e-9 times the largest observed price so that
    rounding noise cannot trigger onset for an exact (zero-sigma) model.
    """
    floor = 1e-9 * float(np.max(np.abs(observed))) if len(observed) else 0.0
    exceed = np.abs(projected - observed) > max(k_sigma * sigma, floor)
    run = 0
    for i, flag in enumerate(exceed):
        run = run + 1 if flag else 0
        if run == run_length:
            return months[i - run_length + 1]
    return None


@dataclass
class ComparisonReport:
    ticker: str
    asof: MonthlyIndex
    months: list[MonthlyIndex]
    observed: np.ndarray
    asof_pred: np.ndarray
    later_pred: np.ndarray
    rms_asof: float | None
    rms_later: float | None
    onset: MonthlyIndex | None
    k_sigma: float
    run_length: int

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("month,observed,asof_pred,later_pred\n")
        for m, o, a, l in zip(self.months, self.observed.tolist(), self.asof_pred.tolist(),
                              self.later_pred.tolist()):
            out.write(f"{m},{o!r},{a!r},{l!r}\n")
        return out.getvalue()

    def summary(self) -> dict:
        return {
            "ticker": self.ticker,
            "asof": str(self.asof),
            "rows": len(self.months),
            "first_month": str(self.months[0]) if self.months else None,
            "last_month": str(self.months[-1]) if self.months else None,
            "rms_asof": self.rms_asof,
            "rms_later": self.rms_later,
            "divergence_onset": str(self.onset) if self.onset else "none",
            "divergence_rule": {"k_sigma": self.k_sigma, "consecutive_months": self.run_length},
        }


def compare(asof_run: AsOfRun, later_model: FittedModel, observed: MonthlySeries, catalog,
            k_sigma: float = 2.0, run_length: int = 3) -> ComparisonReport:
    """Month-by-month comparison after the as-of month.

    Rows cover months where the as-of projection, the later model and the
    observed prices all exist. Divergence onset is the first month starting a
    run of ``run_length`` months where the as-of projection misses the
    observed price by more than ``k_sigma`` times the as-of model's sigma.
    """
    empty = ComparisonReport(observed.id, asof_run.asof, [], np.empty(0), np.empty(0),
                             np.empty(0), None, None, None, k_sigma, run_length)
    if asof_run.projection is None:
        return empty
    window = asof_run.projection.window.intersect(observed.window)
    later_range = regressor_window(catalog, later_model.spec)
    if window is not None and later_range is not None:
        window = window.intersect(later_range)
    else:
        window = None
    if window is None:
        return empty
    obs = observed.slice(window).copy()
    asof_pred = asof_run.projection.slice(window).copy()
    later_pred = predict(later_model, catalog, window).values.copy()
    months = list(window)
    onset = divergence_onset(months, obs, asof_pred, asof_run.model.sigma, k_sigma, run_length)
    return ComparisonReport(observed.id, asof_run.asof, months, obs, asof_pred, later_pred,
                            _rms(obs - asof_pred), _rms(obs - later_pred), onset,
                            k_sigma, run_length)
