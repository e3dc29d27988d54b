"""Critical value tables.

Dickey-Fuller tables are the Fuller (1976) small-sample brackets as reproduced
in Hamilton (1994), Tables B.5 (``n(rho - 1)``) and B.6 (``t``), interpolated
linearly in the sample size. Engle-Granger residual tests use the MacKinnon
(2010) response surfaces for two variables. Johansen trace critical values
are the asymptotic Osterwald-Lenum (1992) quantiles for ``k - r`` in {1, 2}.
"""

from __future__ import annotations

import numpy as np

LEVELS = ("1%", "2.5%", "5%", "10%")

SAMPLE_SIZES = np.array([25, 50, 100, 250, 500, np.inf])

# rows follow SAMPLE_SIZES, columns follow LEVELS
DF_TAU = {
    "none": np.array([
        [-2.66, -2.26, -1.95, -1.60],
        [-2.62, -2.25, -1.95, -1.61],
        [-2.60, -2.24, -1.95, -1.61],
        [-2.58, -2.23, -1.95, -1.62],
        [-2.58, -2.23, -1.95, -1.62],
        [-2.58, -2.23, -1.95, -1.62],
    ]),
    "constant": np.array([
        [-3.75, -3.33, -3.00, -2.63],
        [-3.58, -3.22, -2.93, -2.60],
        [-3.51, -3.17, -2.89, -2.58],
        [-3.46, -3.14, -2.88, -2.57],
        [-3.44, -3.13, -2.87, -2.57],
        [-3.43, -3.12, -2.86, -2.57],
    ]),
    "constant+trend": np.array([
        [-4.38, -3.95, -3.60, -3.24],
        [-4.15, -3.80, -3.50, -3.18],
        [-4.04, -3.73, -3.45, -3.15],
        [-3.99, -3.69, -3.43, -3.13],
        [-3.98, -3.68, -3.42, -3.13],
        [-3.96, -3.66, -3.41, -3.12],
    ]),
}

DF_RHO = {
    "none": np.array([
        [-11.9, -9.3, -7.3, -5.3],
        [-12.9, -9.9, -7.7, -5.5],
        [-13.3, -10.2, -7.9, -5.6],
        [-13.6, -10.3, -8.0, -5.7],
        [-13.7, -10.4, -8.0, -5.7],
        [-13.8, -10.5, -8.1, -5.7],
    ]),
    "constant": np.array([
        [-17.2, -14.6, -12.5, -10.2],
        [-18.9, -15.7, -13.3, -10.7],
        [-19.8, -16.3, -13.7, -11.0],
        [-20.3, -16.6, -14.0, -11.2],
        [-20.5, -16.8, -14.0, -11.2],
        [-20.7, -16.9, -14.1, -11.3],
    ]),
    "constant+trend": np.array([
        [-22.5, -19.9, -17.9, -15.6],
        [-25.7, -22.4, -19.8, -16.8],
        [-27.4, -23.6, -20.7, -17.5],
        [-28.4, -24.4, -21.3, -18.0],
        [-28.9, -24.8, -21.5, -18.1],
        [-29.5, -25.1, -21.8, -18.3],
    ]),
}

# MacKinnon (2010), N = 2: cv(T) = b0 + b1/T + b2/T^2 + b3/T^3
EG_TAU_N2 = {
    "constant": {
        "1%": (-3.89644, -10.9519, -33.527, 0.0),
        "5%": (-3.33613, -6.1101, -6.823, 0.0),
        "10%": (-3.04445, -4.2412, -2.720, 0.0),
    },
    "constant+trend": {
        "1%": (-4.32762, -15.4387, -35.679, 0.0),
        "5%": (-3.78057, -9.5106, -12.074, 0.0),
        "10%": (-3.49631, -7.0815, -7.538, 21.892),
    },
}

JOHANSEN_LEVELS = ("10%", "5%", "1%")

# keyed by deterministic case, then k - r
JOHANSEN_TRACE = {
    "none": {1: (2.98, 4.14, 7.02), 2: (10.35, 12.21, 16.16)},
    "restricted_constant": {1: (7.52, 9.24, 12.97), 2: (17.85, 19.96, 24.60)},
    "unrestricted_constant": {1: (2.69, 3.76, 6.65), 2: (13.33, 15.41, 20.04)},
    "restricted_trend": {1: (10.49, 12.25, 16.26), 2: (22.76, 25.32, 30.45)},
    "unrestricted_trend": {1: (2.57, 3.74, 6.40), 2: (16.06, 18.17, 23.46)},
}


def _interpolate(table: np.ndarray, n: int) -> np.ndarray:
    finite = SAMPLE_SIZES[:-1]
    if n <= finite[0]:
        return table[0].copy()
    if n >= finite[-1]:
        # between 500 and infinity, interpolate in 1/n
        w = finite[-1] / n
        return w * table[-2] + (1 - w) * table[-1]
    k = int(np.searchsorted(finite, n)) - 1
    w = (n - finite[k]) / (finite[k + 1] - finite[k])
    return (1 - w) * table[k] + w * table[k + 1]


def df_critical_values(deterministic: str, n: int, statistic: str = "tau") -> dict[str, float]:
    """Dickey-Fuller critical values for sample size ``n``."""
    tables = DF_TAU if statistic == "tau" else DF_RHO
    row = _interpolate(tables[deterministic], n)
    return {level: float(round(v, 6)) for level, v in zip(LEVELS, row)}


def eg_critical_values(deterministic: str, n: int) -> dict[str, float]:
    """Engle-Granger (two-variable) residual ADF critical values."""
    if deterministic not in EG_TAU_N2:
        raise ValueError(
            f"Engle-Granger critical values need deterministic 'constant' or "
            f"'constant+trend', got {deterministic!r}"
        )
    out = {}
    for level, (b0, b1, b2, b3) in EG_TAU_N2[deterministic].items():
        out[level] = b0 + b1 / n + b2 / n**2 + b3 / n**3
    return out


def johansen_critical_values(det_case: str, k_minus_r: int) -> dict[str, float]:
    return dict(zip(JOHANSEN_LEVELS, JOHANSEN_TRACE[det_case][k_minus_r]))
