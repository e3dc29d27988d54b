"""Negative predicted prices as a distress signal, and the implied debt.

A predicted share price below zero is read as net debt per share; the
implied debt is shares outstanding times the absolute negative price.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import NotDistressed
from .timeseries import MonthlyIndex, MonthlySeries


@dataclass(frozen=True)
class DistressSignal:
    ticker: str
    first_negative: MonthlyIndex
    trough_price: float
    trough_month: MonthlyIndex
    consecutive_negative_months: int
    recovery_month: MonthlyIndex | None
    first_negative_price: float


@dataclass(frozen=True)
class DebtEstimate:
    ticker: str
    shares_outstanding: float
    reference_price: float
    debt: float


def _ticker(series: MonthlySeries) -> str:
    return series.id.split(":", 1)[0]


def detect_negative(predicted: MonthlySeries) -> DistressSignal | None:
    """Locate the first excursion below zero.

    An excursion runs from the first negative value until the path is back
    strictly above zero; the trough is its minimum, the run length counts its
    months, and the recovery month is the first positive month after it
    (absent if the path never gets back above zero).
    """
    values = predicted.values
    negative = np.flatnonzero(values < 0)
    if len(negative) == 0:
        return None
    start = int(negative[0])
    stop = start
    while stop < len(values) and values[stop] <= 0:
        stop += 1
    excursion = values[start:stop]
    trough = start + int(np.argmin(excursion))
    recovery = predicted.start + stop if stop < len(values) else None
    return DistressSignal(
        ticker=_ticker(predicted),
        first_negative=predicted.start + start,
        trough_price=float(values[trough]),
        trough_month=predicted.start + trough,
        consecutive_negative_months=stop - start,
        recovery_month=recovery,
        first_negative_price=float(values[start]),
    )


def estimate_debt(shares: float, reference_price: float, ticker: str = "") -> DebtEstimate:
    """Implied debt = shares * |reference_price| for a negative price."""
    if not shares > 0:
        raise ValueError("shares outstanding must be positive")
    if not reference_price < 0:
        raise NotDistressed(f"{ticker or 'price'} {reference_price} is not negative")
    return DebtEstimate(ticker, shares, reference_price, shares * abs(reference_price))


def debt_from_signal(signal: DistressSignal, shares: float,
                     reference: str = "trough") -> DebtEstimate:
    if reference == "trough":
        price = signal.trough_price
    elif reference == "first_negative":
        price = signal.first_negative_price
    else:
        raise ValueError("reference must be 'trough' or 'first_negative'")
    return estimate_debt(shares, price, signal.ticker)


DISTRESS_COLUMNS = ("ticker", "first_negative", "trough_month", "trough_price",
                    "shares", "debt")


def distress_csv(rows: list[tuple[DistressSignal, DebtEstimate]]) -> str:
    out = io.StringIO()
    out.write(",".join(DISTRESS_COLUMNS) + "\n")
    for signal, debt in rows:
        out.write(
            f"{signal.ticker},{signal.first_negative},{signal.trough_month},"
            f"{debt.reference_price!r},{debt.shares_outstanding!r},{debt.debt!r}\n"
        )
    return out.getvalue()
