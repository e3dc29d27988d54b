import numpy as np
import pytest

from cpipricing.ingestion import CpiCatalog
from cpipricing.regression import ModelSpec
from cpipricing.synthetic import generate_prices, make_catalog, write_fixture_tree
from cpipricing.timeseries import MonthlyIndex, MonthlySeries, Window

TRUE_SPEC = ModelSpec("SYN", "FS", 3, "TS", 5)
TRUE_COEF = (2.5, -1.3, 4.0, 100.0)
PRICE_WINDOW = Window(MonthlyIndex(2003, 7), MonthlyIndex(2010, 6))


@pytest.fixture(scope="session")
def small_catalog() -> CpiCatalog:
    rng = np.random.default_rng(11)
    return make_catalog(rng, ["C", "FS", "H", "M", "SEFV", "TS"], MonthlyIndex(2001, 1), 132)


@pytest.fixture(scope="session")
def exact_prices(small_catalog) -> MonthlySeries:
    return generate_prices(small_catalog, TRUE_SPEC, TRUE_COEF, PRICE_WINDOW)


@pytest.fixture(scope="session")
def noisy_prices(small_catalog) -> MonthlySeries:
    rng = np.random.default_rng(12)
    return generate_prices(small_catalog, TRUE_SPEC, TRUE_COEF, PRICE_WINDOW, noise=0.5, rng=rng)


def ramp_catalog() -> CpiCatalog:
    """Two hand-made components: FS rises slowly, TS rises fast after 2009."""
    start = MonthlyIndex(2001, 1)
    n = 132
    t = np.arange(n, dtype=float)
    rng = np.random.default_rng(3)
    fs = 180 + 0.3 * t + rng.normal(0, 0.8, n)
    ts = 150 + 0.2 * t + np.where(t > 96, 6.0 * (t - 96), 0.0) + rng.normal(0, 0.8, n)
    m = 200 + 0.25 * t + rng.normal(0, 0.8, n)
    return CpiCatalog.from_series([
        MonthlySeries("FS", start, fs), MonthlySeries("TS", start, ts), MonthlySeries("M", start, m),
    ])


@pytest.fixture
def fixture_tree(tmp_path, small_catalog, noisy_prices, exact_prices):
    """Two on-disk data sets; returns a dict of paths.

    ``data`` holds the noisy and exact synthetic tickers on the random-walk
    catalog; ``ramp`` holds three tickers on the hand-made ramp catalog, one
    of which (DOOM) is driven below zero by its fast-rising TS component.
    """
    data = write_fixture_tree(
        tmp_path / "data", small_catalog,
        {"SYN": noisy_prices.with_id("SYN"), "EXACT": exact_prices.with_id("EXACT")},
        {"SYN": 1.0e9, "EXACT": 2.0e8},
    )
    cat = ramp_catalog()
    fit_window = Window(MonthlyIndex(2003, 7), MonthlyIndex(2008, 12))
    rng = np.random.default_rng(4)
    ramp_prices = {
        "DOOM": generate_prices(cat, ModelSpec("DOOM", "FS", 0, "TS", 0), (1.0, -1.0, 0.0, 40.0),
                                fit_window, noise=0.2, rng=rng),
        "SAFE": generate_prices(cat, ModelSpec("SAFE", "FS", 0, "M", 0), (0.5, 0.2, 1.0, 5.0),
                                fit_window, noise=0.2, rng=rng),
        "GROW": generate_prices(cat, ModelSpec("GROW", "M", 2, "TS", 1), (0.1, 0.3, 0.5, 10.0),
                                fit_window, noise=0.2, rng=rng),
    }
    ramp = write_fixture_tree(tmp_path / "ramp", cat, ramp_prices,
                              {"DOOM": 5.0e8, "SAFE": 1.0e8, "GROW": 3.0e8})
    return {"root": tmp_path, "data": data, "ramp": ramp, "out": tmp_path / "out"}


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_record():
    def record(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
