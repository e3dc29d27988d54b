"""Augmented Dickey-Fuller, Phillips-Perron and Engle-Granger residual tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateSeries, SeriesTooShort
from ..timeseries import MonthlySeries, align
from .tables import LEVELS, df_critical_values, eg_critical_values

DETERMINISTIC = ("none", "constant", "constant+trend")
_ALIASES = {"n": "none", "nc": "none", "c": "constant", "ct": "constant+trend",
            "trend": "constant+trend"}

DEGENERATE_RTOL = 1e-12


def normalize_deterministic(deterministic: str) -> str:
    value = _ALIASES.get(deterministic, deterministic)
    if value not in DETERMINISTIC:
        raise ValueError(f"deterministic must be one of {DETERMINISTIC}, got {deterministic!r}")
    return value


@dataclass
class UnitRootReport:
    """Outcome of a left-tailed unit-root test.

    ``statistic_t`` is the t-type statistic and ``statistic_rho`` the
    normalized-bias ``n(rho - 1)`` statistic. The rejection decision uses
    ``statistic_t`` against ``critical_values``.
    """

    test: str
    statistic_t: float
    statistic_rho: float
    lags_used: int
    nobs: int
    deterministic: str
    critical_values: dict[str, float]
    critical_values_rho: dict[str, float] = field(default_factory=dict)

    @property
    def reject_unit_root_at(self) -> str | None:
        """Smallest tabulated level at which the unit root is rejected."""
        for level in sorted(self.critical_values, key=lambda s: float(s.rstrip("%"))):
            if self.statistic_t < self.critical_values[level]:
                return level
        return None

    def rejects(self, level: str = "5%") -> bool:
        return self.statistic_t < self.critical_values[level]

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic_t": self.statistic_t,
            "statistic_rho": self.statistic_rho,
            "lags_used": self.lags_used,
            "nobs": self.nobs,
            "deterministic": self.deterministic,
            "critical_values": self.critical_values,
            "critical_values_rho": self.critical_values_rho,
            "reject_unit_root_at": self.reject_unit_root_at,
        }


def _as_array(series) -> np.ndarray:
    if isinstance(series, MonthlySeries):
        return np.asarray(series.values, dtype=float)
    return np.asarray(series, dtype=float).reshape(-1)


def _deterministic_columns(deterministic: str, n: int, offset: int) -> list[np.ndarray]:
    cols = []
    if deterministic != "none":
        cols.append(np.ones(n))
    if deterministic == "constant+trend":
        cols.append(np.arange(offset, offset + n, dtype=float))
    return cols


def _ols(X: np.ndarray, y: np.ndarray):
    """Coefficients, residuals and the coefficient covariance (s^2 (X'X)^-1)."""
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= DEGENERATE_RTOL * max(diag.max(), 1.0):
        raise DegenerateSeries("unit-root regression is degenerate (collinear regressors)")
    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ beta
    dof = len(y) - X.shape[1]
    s2 = resid @ resid / dof
    Rinv = np.linalg.inv(R)
    cov = s2 * (Rinv @ Rinv.T)
    return beta, resid, cov


def _adf_design(y: np.ndarray, p: int, deterministic: str, start: int):
    """Regression of dy_t on [y_{t-1}, dy_{t-1..t-p}, deterministic] for t >= start.

    ``start`` indexes ``dy`` (so the first observation uses dy[start]).
    """
    dy = np.diff(y)
    n = len(dy) - start
    cols = [y[start : start + n]]
    for i in range(1, p + 1):
        cols.append(dy[start - i : start - i + n])
    cols += _deterministic_columns(deterministic, n, start + 1)
    return np.column_stack(cols), dy[start:]


def _check_not_constant(y: np.ndarray) -> None:
    dy = np.diff(y)
    scale = max(np.max(np.abs(y)), 1.0)
    if np.all(np.abs(dy) <= DEGENERATE_RTOL * scale):
        raise DegenerateSeries("series is constant; unit-root regression is degenerate")


def _bic(resid: np.ndarray, k: int) -> float:
    n = len(resid)
    return n * np.log(resid @ resid / n) + k * np.log(n)


def _adf_core(y: np.ndarray, max_lag: int, deterministic: str, fixed_lag: int | None):
    if fixed_lag is not None:
        p = fixed_lag
    else:
        # lag order chosen on a common sample so BIC values are comparable
        best = None
        for lag in range(max_lag + 1):
            X, dy = _adf_design(y, lag, deterministic, max_lag)
            _, resid, _ = _ols(X, dy)
            crit = _bic(resid, X.shape[1])
            if best is None or crit < best[0]:
                best = (crit, lag)
        p = best[1]
    X, dy = _adf_design(y, p, deterministic, p)
    beta, resid, cov = _ols(X, dy)
    gamma = beta[0]
    stat_t = float(gamma / np.sqrt(cov[0, 0]))
    nobs = len(dy)
    stat_rho = float(nobs * gamma / (1.0 - np.sum(beta[1 : p + 1])))
    return stat_t, stat_rho, p, nobs


def adf_test(series, max_lag: int = 12, deterministic: str = "constant",
             lags: int | None = None) -> UnitRootReport:
    """Augmented Dickey-Fuller test.

    Fits ``dy_t = det + gamma * y_{t-1} + sum_i phi_i dy_{t-i} + e_t``. The
    lag order minimizes BIC over ``0..max_lag`` unless ``lags`` fixes it.
    ``statistic_rho`` is ``n * gamma / (1 - sum(phi))``.
    """
    deterministic = normalize_deterministic(deterministic)
    y = _as_array(series)
    max_lag = max_lag if lags is None else lags
    if len(y) < 20 + max_lag:
        raise SeriesTooShort(f"ADF needs at least {20 + max_lag} points, got {len(y)}")
    _check_not_constant(y)
    stat_t, stat_rho, p, nobs = _adf_core(y, max_lag, deterministic, lags)
    return UnitRootReport(
        "ADF", stat_t, stat_rho, p, nobs, deterministic,
        df_critical_values(deterministic, nobs, "tau"),
        df_critical_values(deterministic, nobs, "rho"),
    )


def auto_bandwidth(n: int) -> int:
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def pp_test(series, bandwidth: int | None = None,
            deterministic: str = "constant") -> UnitRootReport:
    """Phillips-Perron Z_t and Z_rho from the first-order Dickey-Fuller regression.

    The long-run variance uses Bartlett weights ``1 - j / (q + 1)`` over ``q =
    bandwidth`` autocovariances (default ``floor(4 (n/100)^(2/9))``). With
    ``bandwidth=0`` Z_t is the plain Dickey-Fuller t-statistic.
    """
    deterministic = normalize_deterministic(deterministic)
    y = _as_array(series)
    if len(y) < 20:
        raise SeriesTooShort(f"Phillips-Perron needs at least 20 points, got {len(y)}")
    _check_not_constant(y)
    q = auto_bandwidth(len(y)) if bandwidth is None else int(bandwidth)
    if q < 0:
        raise ValueError("bandwidth must be non-negative")

    X, dy = _adf_design(y, 0, deterministic, 0)
    beta, u, cov = _ols(X, dy)
    T = len(u)
    k = X.shape[1]
    gamma0 = u @ u / T
    lrv = gamma0
    for j in range(1, q + 1):
        lrv += 2.0 * (1.0 - j / (q + 1.0)) * (u[j:] @ u[:-j]) / T
    s2 = u @ u / (T - k)
    se_rho = np.sqrt(cov[0, 0])
    t_rho = beta[0] / se_rho

    z_t = np.sqrt(gamma0 / lrv) * t_rho - 0.5 * (lrv - gamma0) / np.sqrt(lrv) * (T * se_rho / np.sqrt(s2))
    z_rho = T * beta[0] - 0.5 * (T**2 * se_rho**2 / s2) * (lrv - gamma0)
    return UnitRootReport(
        "PP", float(z_t), float(z_rho), q, T, deterministic,
        df_critical_values(deterministic, T, "tau"),
        df_critical_values(deterministic, T, "rho"),
    )


def engle_granger(observed, predicted, deterministic: str = "constant",
                  max_lag: int = 12) -> UnitRootReport:
    """Two-step residual cointegration test of ``observed`` on ``predicted``.

    Step one regresses observed on predicted plus ``deterministic`` terms;
    step two runs an ADF test without deterministic terms on the residuals,
    judged against Engle-Granger critical values.
    """
    deterministic = normalize_deterministic(deterministic)
    if isinstance(observed, MonthlySeries) and isinstance(predicted, MonthlySeries):
        _, matrix = align([observed, predicted])
        obs, pred = matrix[:, 0], matrix[:, 1]
    else:
        obs, pred = _as_array(observed), _as_array(predicted)
        if len(obs) != len(pred):
            raise ValueError("observed and predicted differ in length")
    if len(obs) < 30:
        raise SeriesTooShort(f"Engle-Granger needs at least 30 aligned points, got {len(obs)}")
    eg_critical_values(deterministic, len(obs))  # validates the deterministic case early

    X = np.column_stack([pred] + _deterministic_columns(deterministic, len(obs), 0))
    _, resid, _ = _ols(X, obs)
    scale = max(np.max(np.abs(obs)), 1.0)
    if np.all(np.abs(resid) <= 1e-10 * scale):
        raise DegenerateSeries("observed is an exact linear function of predicted; residuals vanish")
    lag_cap = min(max_lag, len(resid) - 20)
    stat_t, stat_rho, p, nobs = _adf_core(resid, max(lag_cap, 0), "none", None)
    return UnitRootReport(
        "Engle-Granger", stat_t, stat_rho, p, nobs, deterministic,
        eg_critical_values(deterministic, nobs),
    )


__all__ = ["UnitRootReport", "adf_test", "pp_test", "engle_granger", "auto_bandwidth", "LEVELS"]
