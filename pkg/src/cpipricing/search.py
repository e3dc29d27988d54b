"""Exhaustive search over CPI component pairs and lags.

Every unordered component pair ``{i, j}`` (``i < j`` in acronym order) is
combined with every lag pair ``(tau1, tau2)`` from the configured range and
fitted by least squares; candidates are ranked by standard error.

Candidates that share a lag pair and a fit window are solved together with a
stacked SVD, the same decomposition ``ols_fit`` applies to a single design.
The shortlist that makes it into the result is refitted with ``fit_model`` so
reported models are exactly what a standalone fit produces.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from math import comb

import numpy as np

from .errors import NoFeasibleCandidate, RankDeficient
from .ingestion import model_to_dict
from .regression import N_PARAMS, RANK_RTOL, FittedModel, ModelSpec, fit_model
from .timeseries import MonthlyIndex, MonthlySeries, Window, trend_values

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_START = MonthlyIndex(2003, 7)
LAG_CAP = 14
SHORTLIST_RTOL = 1e-8


@dataclass(frozen=True)
class SearchConfig:
    lag_min: int = -6
    lag_max: int = LAG_CAP
    window: Window | None = None
    top_k: int = 10
    min_obs: int = 60
    strict_window: bool = False
    allow_extended_lags: bool = False

    def __post_init__(self):
        if self.lag_min > self.lag_max:
            raise ValueError(f"lag_min {self.lag_min} exceeds lag_max {self.lag_max}")
        if not self.allow_extended_lags and max(abs(self.lag_min), abs(self.lag_max)) > LAG_CAP:
            raise ValueError(
                f"lags are capped at {LAG_CAP} months; pass allow_extended_lags to go beyond"
            )
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.min_obs < 8:
            raise ValueError("min_obs must be at least 8")

    @property
    def lags(self) -> range:
        return range(self.lag_min, self.lag_max + 1)

    def resolve_window(self, prices: MonthlySeries) -> Window:
        """Configured window clipped to the price data."""
        wanted = self.window or Window(DEFAULT_WINDOW_START, max(DEFAULT_WINDOW_START, prices.end))
        window = wanted.intersect(prices.window)
        if window is None:
            raise NoFeasibleCandidate(
                f"prices {prices.window} do not overlap the search window {wanted}"
            )
        return window

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["window"] = None if self.window is None else {
            "first": str(self.window.first), "last": str(self.window.last)}
        return doc


def candidate_count(n_components: int, n_lags: int) -> int:
    return comb(n_components, 2) * n_lags * n_lags


@dataclass
class SearchResult:
    ticker: str
    config: SearchConfig
    window: Window
    ranked: list[FittedModel]
    evaluated_count: int
    rejected_count: int

    @property
    def best(self) -> FittedModel:
        return self.ranked[0]

    @property
    def candidate_count(self) -> int:
        return self.evaluated_count + self.rejected_count

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "search_result",
            "run": {
                "ticker": self.ticker,
                "config": self.config.to_dict(),
                "search_window": {"first": str(self.window.first), "last": str(self.window.last)},
                "candidate_count": self.candidate_count,
                "evaluated_count": self.evaluated_count,
                "rejected_count": self.rejected_count,
            },
            "models": [model_to_dict(m) for m in self.ranked],
        }


# -- batched evaluation ------------------------------------------------------

@dataclass
class _Panel:
    """CPI components on a shared, NaN-padded monthly grid."""

    origin: int
    values: np.ndarray  # (grid, N)
    starts: np.ndarray
    ends: np.ndarray
    price: np.ndarray  # (grid,)
    first: int  # search window, ordinals
    last: int
    min_obs: int
    strict: tuple[int, int] | None
    iu: np.ndarray
    ju: np.ndarray


def _build_panel(prices: MonthlySeries, catalog, acronyms, window: Window,
                 config: SearchConfig) -> _Panel:
    series = [catalog[a] for a in acronyms]
    starts = np.array([s.start.ordinal for s in series])
    ends = np.array([s.end.ordinal for s in series])
    origin = min(starts.min(), prices.start.ordinal)
    top = max(ends.max(), prices.end.ordinal)
    values = np.full((top - origin + 1, len(series)), np.nan)
    for k, s in enumerate(series):
        values[s.start.ordinal - origin : s.end.ordinal - origin + 1, k] = s.values
    price = np.full(top - origin + 1, np.nan)
    price[prices.start.ordinal - origin : prices.end.ordinal - origin + 1] = prices.values
    first, last = window.first.ordinal, window.last.ordinal
    strict = None
    if config.strict_window:
        strict = (max(first, int(starts.max()) + config.lag_max),
                  min(last, int(ends.min()) + config.lag_min))
    iu, ju = np.triu_indices(len(series), k=1)
    return _Panel(origin, values, starts, ends, price, first, last,
                  config.min_obs, strict, iu, ju)


def _solve_stack(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Standard errors for a stack of designs sharing ``y``; NaN if rank deficient."""
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    ok = s[:, -1] >= RANK_RTOL * s[:, 0]
    z = np.einsum("bjk,j->bk", U, y) / np.where(ok, s.T, 1.0).T
    beta = np.einsum("bkl,bk->bl", Vt, z)
    resid = y[None, :] - np.einsum("bjl,bl->bj", X, beta)
    sigma = np.sqrt(np.einsum("bj,bj->b", resid, resid) / (X.shape[1] - N_PARAMS))
    sigma[~ok] = np.nan
    return sigma


def _evaluate_lag_pair(panel: _Panel, ta: int, tb: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sigma and fit window for every component pair at lags ``(ta, tb)``.

    Rejected candidates (short window or rank deficient) get NaN sigma.
    """
    iu, ju = panel.iu, panel.ju
    if panel.strict is not None:
        first = np.full(len(iu), panel.strict[0])
        last = np.full(len(iu), panel.strict[1])
    else:
        first = np.maximum(np.maximum(panel.starts[iu] + ta, panel.starts[ju] + tb), panel.first)
        last = np.minimum(np.minimum(panel.ends[iu] + ta, panel.ends[ju] + tb), panel.last)
    sigma = np.full(len(iu), np.nan)
    feasible = (last - first + 1) >= panel.min_obs
    if feasible.any():
        bounds = np.stack([first, last], axis=1)
        for f, l in np.unique(bounds[feasible], axis=0):
            group = np.flatnonzero(feasible & (first == f) & (last == l))
            rows = np.arange(f, l + 1) - panel.origin
            n_obs = len(rows)
            X = np.empty((len(group), n_obs, N_PARAMS))
            X[:, :, 0] = panel.values[rows - ta][:, iu[group]].T
            X[:, :, 1] = panel.values[rows - tb][:, ju[group]].T
            X[:, :, 2] = trend_values(Window.from_ordinals(int(f), int(l)))
            X[:, :, 3] = 1.0
            sigma[group] = _solve_stack(X, panel.price[rows])
    return sigma, first, last


_WORKER_PANEL: _Panel | None = None


def _init_worker(panel: _Panel) -> None:
    global _WORKER_PANEL
    _WORKER_PANEL = panel


def _worker(lag_pair: tuple[int, int]):
    return _evaluate_lag_pair(_WORKER_PANEL, *lag_pair)


def _evaluate_all(panel: _Panel, lag_pairs: list[tuple[int, int]], jobs: int):
    if jobs <= 1:
        return [_evaluate_lag_pair(panel, ta, tb) for ta, tb in lag_pairs]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(panel,)) as pool:
        return list(pool.map(_worker, lag_pairs, chunksize=max(1, len(lag_pairs) // (4 * jobs))))


def search_best(prices: MonthlySeries, catalog, config: SearchConfig | None = None,
                jobs: int = 1) -> SearchResult:
    """Rank every two-component model for ``prices`` by standard error.

    Ties in sigma are broken by ``(cpi1, cpi2, tau1, tau2)`` with ``cpi1 <
    cpi2``. The result is independent of ``jobs`` and of catalog order.
    """
    config = config or SearchConfig()
    acronyms = sorted(catalog)
    if len(acronyms) < 2:
        raise NoFeasibleCandidate("catalog needs at least two components")
    window = config.resolve_window(prices)
    started = time.perf_counter()

    panel = _build_panel(prices, catalog, acronyms, window, config)
    lags = list(config.lags)
    lag_pairs = [(ta, tb) for ta in lags for tb in lags]
    results = _evaluate_all(panel, lag_pairs, jobs)

    sigma = np.concatenate([r[0] for r in results])
    first = np.concatenate([r[1] for r in results])
    last = np.concatenate([r[2] for r in results])
    n_pairs = len(panel.iu)
    ii = np.tile(panel.iu, len(lag_pairs))
    jj = np.tile(panel.ju, len(lag_pairs))
    ta = np.repeat([p[0] for p in lag_pairs], n_pairs)
    tb = np.repeat([p[1] for p in lag_pairs], n_pairs)

    valid = np.flatnonzero(~np.isnan(sigma))
    evaluated = len(valid)
    rejected = len(sigma) - evaluated
    logger.info("%s: %d candidates evaluated, %d rejected in %.2fs", prices.id,
                evaluated, rejected, time.perf_counter() - started)
    if evaluated == 0:
        raise NoFeasibleCandidate(
            f"{prices.id}: all {len(sigma)} candidates rejected (rank deficient or fewer than "
            f"{config.min_obs} months)"
        )

    order = valid[np.lexsort((tb[valid], ta[valid], jj[valid], ii[valid], sigma[valid]))]
    cutoff = sigma[order[min(config.top_k, len(order)) - 1]]
    cutoff = cutoff * (1 + SHORTLIST_RTOL) + 1e-300
    shortlist = [k for k in order[: config.top_k]]
    shortlist += [k for k in order[config.top_k:] if sigma[k] <= cutoff]

    models = []
    for k in shortlist:
        spec = ModelSpec(prices.id, acronyms[ii[k]], int(ta[k]), acronyms[jj[k]], int(tb[k]))
        fit_window = Window.from_ordinals(int(first[k]), int(last[k]))
        try:
            models.append(fit_model(prices, catalog, spec, fit_window))
        except RankDeficient:  # pragma: no cover - batched and single SVD agree
            logger.warning("%s: shortlisted candidate became rank deficient", spec)
    models.sort(key=lambda m: (m.sigma, m.spec.sort_key()))
    return SearchResult(prices.id, config, window, models[: config.top_k], evaluated, rejected)


# -- stability over trailing end-months --------------------------------------

@dataclass
class StabilityReport:
    end_months: list[MonthlyIndex]
    winners: list[ModelSpec | None]
    errors: list[str | None]

    @property
    def stable(self) -> bool:
        return all(w is not None for w in self.winners) and len(set(self.winners)) == 1

    def __len__(self) -> int:
        return len(self.end_months)


def rolling_stability(prices: MonthlySeries, catalog, config: SearchConfig | None = None,
                      months_back: int = 10, jobs: int = 1) -> StabilityReport:
    """Rerun the search with the window ending at each of the last ``months_back`` months."""
    if months_back < 1:
        raise ValueError("months_back must be at least 1")
    config = config or SearchConfig()
    full = config.resolve_window(prices)
    end_months = [full.last - k for k in range(months_back - 1, -1, -1)]
    winners: list[ModelSpec | None] = []
    errors: list[str | None] = []
    for m in end_months:
        try:
            window = Window(full.first, m)
            result = search_best(prices, catalog, replace(config, window=window, top_k=1), jobs=jobs)
        except (NoFeasibleCandidate, ValueError) as exc:
            winners.append(None)
            errors.append(str(exc))
        else:
            winners.append(result.best.spec)
            errors.append(None)
    return StabilityReport(end_months, winners, errors)
