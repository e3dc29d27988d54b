"""Johansen reduced-rank trace test for a pair of series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SeriesTooShort, SingularMoment
from ..timeseries import MonthlySeries, align
from .tables import JOHANSEN_TRACE, johansen_critical_values

DET_CASES = tuple(JOHANSEN_TRACE)
DEFAULT_DET_CASE = "unrestricted_constant"
SINGULAR_RTOL = 1e-10


@dataclass
class JohansenReport:
    eigenvalues: list[float]
    trace_stats: list[float]
    max_eig_stats: list[float]
    critical_values: list[dict[str, float]]
    det_case: str
    vecm_lag: int
    nobs: int

    def rank_at(self, level: str = "5%") -> int:
        """Smallest r whose null ``rank <= r`` is not rejected at ``level``."""
        for r, (stat, cv) in enumerate(zip(self.trace_stats, self.critical_values)):
            if stat < cv[level]:
                return r
        return len(self.trace_stats)

    @property
    def rank(self) -> int:
        return self.rank_at("5%")

    def to_dict(self) -> dict:
        return {
            "det_case": self.det_case,
            "vecm_lag": self.vecm_lag,
            "nobs": self.nobs,
            "eigenvalues": self.eigenvalues,
            "stages": [
                {"null_rank": r, "trace_statistic": t, "max_eigen_statistic": m,
                 "critical_values": cv, "rejected_5%": t >= cv["5%"]}
                for r, (t, m, cv) in enumerate(
                    zip(self.trace_stats, self.max_eig_stats, self.critical_values))
            ],
            "rank": self.rank,
        }


def _residualize(A: np.ndarray, Z: np.ndarray | None) -> np.ndarray:
    if Z is None or Z.shape[1] == 0:
        return A
    coef, *_ = np.linalg.lstsq(Z, A, rcond=None)
    return A - Z @ coef


def _check_moment(S: np.ndarray, name: str) -> np.ndarray:
    eig = np.linalg.eigvalsh(S)
    if eig[0] <= SINGULAR_RTOL * max(eig[-1], np.finfo(float).tiny):
        raise SingularMoment(f"moment matrix {name} is singular (degenerate input)")
    return np.linalg.cholesky(S)


def johansen_test(y1, y2, vecm_lag: int = 2,
                  det_case: str = DEFAULT_DET_CASE) -> JohansenReport:
    """Johansen trace test for cointegration between two series.

    ``vecm_lag`` is the number of lagged differences in the VECM. The
    deterministic cases are ``none``, ``restricted_constant``,
    ``unrestricted_constant`` (default), ``restricted_trend`` and
    ``unrestricted_trend``.
    """
    if det_case not in DET_CASES:
        raise ValueError(f"det_case must be one of {DET_CASES}, got {det_case!r}")
    if vecm_lag < 0:
        raise ValueError("vecm_lag must be non-negative")
    if isinstance(y1, MonthlySeries) and isinstance(y2, MonthlySeries):
        _, Y = align([y1, y2])
    else:
        a, b = np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)
        if len(a) != len(b):
            raise ValueError("series differ in length")
        Y = np.column_stack([a, b])
    n, k = Y.shape
    if n < 30 + vecm_lag:
        raise SeriesTooShort(f"Johansen test needs at least {30 + vecm_lag} points, got {n}")

    dY = np.diff(Y, axis=0)
    p = vecm_lag
    T = len(dY) - p
    Z0 = dY[p:]
    Z1 = Y[p:-1]
    lagged = [dY[p - i : p - i + T] for i in range(1, p + 1)]
    trend = np.arange(p + 1, p + 1 + T, dtype=float)[:, None]
    ones = np.ones((T, 1))
    if det_case == "restricted_constant":
        Z1 = np.hstack([Z1, ones])
    elif det_case == "unrestricted_constant":
        lagged.append(ones)
    elif det_case == "restricted_trend":
        Z1 = np.hstack([Z1, trend])
        lagged.append(ones)
    elif det_case == "unrestricted_trend":
        lagged += [ones, trend]
    Z2 = np.hstack(lagged) if lagged else None

    R0 = _residualize(Z0, Z2)
    R1 = _residualize(Z1, Z2)
    S00 = R0.T @ R0 / T
    S11 = R1.T @ R1 / T
    S01 = R0.T @ R1 / T
    L00 = _check_moment(S00, "S00")
    L11 = _check_moment(S11, "S11")
    # symmetric form of S11^-1 S10 S00^-1 S01
    A = np.linalg.solve(L00, S01)  # L00^-1 S01
    B = np.linalg.solve(L11, A.T)  # L11^-1 S10 L00^-T
    eig = np.linalg.eigvalsh(B @ B.T)[::-1][:k]
    eig = np.clip(eig, 0.0, np.nextafter(1.0, 0.0))

    logs = np.log1p(-eig)
    trace = [float(-T * logs[r:].sum()) for r in range(k)]
    max_eig = [float(-T * logs[r]) for r in range(k)]
    cvs = [johansen_critical_values(det_case, k - r) for r in range(k)]
    return JohansenReport([float(e) for e in eig], trace, max_eig, cvs, det_case, vecm_lag, T)
