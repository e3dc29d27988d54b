"""Share prices modelled as two lagged CPI components plus a linear trend."""

from .errors import (
    AnalyticError, CpiPricingError, InputError, NoFeasibleCandidate, RankDeficient,
    WindowUnavailable,
)
from .regression import FittedModel, ModelSpec, fit_model, ols_fit, predict
from .search import SearchConfig, SearchResult, search_best
from .timeseries import MonthlyIndex, MonthlySeries, Window, align, shift

__version__ = "0.1.0"

__all__ = [
    "AnalyticError", "CpiPricingError", "FittedModel", "InputError", "ModelSpec",
    "MonthlyIndex", "MonthlySeries", "NoFeasibleCandidate", "RankDeficient",
    "SearchConfig", "SearchResult", "Window", "WindowUnavailable", "align", "fit_model",
    "ols_fit", "predict", "search_best", "shift",
]
