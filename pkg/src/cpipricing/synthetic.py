"""Synthetic CPI-like data and prices generated by a known model.

Used by the self-test command and the test suite; all generators take an
explicit ``numpy.random.Generator`` so results are reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingestion import CpiCatalog, atomic_write_text
from .regression import ModelSpec, design_matrix
from .registry import CPI_COMPONENTS
from .timeseries import MonthlyIndex, MonthlySeries, Window


def cpi_walk(rng: np.random.Generator, n: int, level: float = 180.0,
             drift: float = 0.25, step: float = 0.5) -> np.ndarray:
    """Random walk with drift, loosely scaled like a monthly CPI index."""
    return level + np.cumsum(drift + step * rng.standard_normal(n))


def make_catalog(rng: np.random.Generator, acronyms, start: MonthlyIndex,
                 n_months: int, **walk_kwargs) -> CpiCatalog:
    series = []
    for acronym in acronyms:
        level = rng.uniform(120.0, 260.0)
        series.append(MonthlySeries(acronym, start, cpi_walk(rng, n_months, level=level, **walk_kwargs)))
    return CpiCatalog.from_series(series)


def registry_acronyms(n: int) -> list[str]:
    return sorted(CPI_COMPONENTS)[:n]


def generate_prices(catalog, spec: ModelSpec, coefficients, window: Window,
                    noise: float = 0.0, rng: np.random.Generator | None = None) -> MonthlySeries:
    """Prices from the linear CPI model over ``window``, plus optional Gaussian noise."""
    values = design_matrix(catalog, spec, window) @ np.asarray(coefficients, dtype=float)
    if noise:
        values = values + noise * rng.standard_normal(len(values))
    return MonthlySeries(spec.ticker, window.first, values)


def write_series_csv(series: MonthlySeries, path) -> None:
    lines = [f"{m},{v!r}" for m, v in zip(series.months(), series.values.tolist())]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_fixture_tree(root, catalog: CpiCatalog, prices: dict[str, MonthlySeries],
                       shares: dict[str, float] | None = None) -> Path:
    """Write a catalog manifest, CPI files, price files and a shares file under ``root``.

    Returns the manifest path.
    """
    root = Path(root)
    manifest = [f"{a},cpi/{a}.csv" for a in catalog]
    for a in catalog:
        write_series_csv(catalog[a], root / "cpi" / f"{a}.csv")
    atomic_write_text(root / "catalog.csv", "\n".join(manifest) + "\n")
    for ticker, series in prices.items():
        write_series_csv(series, root / "prices" / f"{ticker}.csv")
    if shares:
        rows = [f"{t},{v!r}" for t, v in shares.items()]
        atomic_write_text(root / "prices" / "shares.csv", "\n".join(rows) + "\n")
    return root / "catalog.csv"
