"""Monthly calendar arithmetic, series alignment and lag shifting."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import EmptyIntersection, ParseError

_MONTH_RE = re.compile(r"^\s*(\d{4})-(\d{1,2})\s*$")

TREND_ORIGIN_YEAR = 2000


@dataclass(frozen=True, order=True)
class MonthlyIndex:
    """A calendar month. Ordering follows ``12 * year + month``."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @property
    def ordinal(self) -> int:
        return 12 * self.year + (self.month - 1)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> MonthlyIndex:
        year, m0 = divmod(int(ordinal), 12)
        return cls(year, m0 + 1)

    @classmethod
    def parse(cls, text: str) -> MonthlyIndex:
        match = _MONTH_RE.match(text)
        if match is None:
            raise ParseError(f"not a YYYY-MM month: {text!r}")
        year, month = int(match.group(1)), int(match.group(2))
        if not 1 <= month <= 12:
            raise ParseError(f"month out of range in {text!r}")
        return cls(year, month)

    def __add__(self, months: int) -> MonthlyIndex:
        if not isinstance(months, (int, np.integer)):
            return NotImplemented
        return MonthlyIndex.from_ordinal(self.ordinal + int(months))

    def __sub__(self, other):
        if isinstance(other, MonthlyIndex):
            return self.ordinal - other.ordinal
        if isinstance(other, (int, np.integer)):
            return MonthlyIndex.from_ordinal(self.ordinal - int(other))
        return NotImplemented

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def months_between(first: MonthlyIndex, last: MonthlyIndex) -> int:
    """Inclusive month count from ``first`` to ``last``."""
    return last.ordinal - first.ordinal + 1


@dataclass(frozen=True)
class Window:
    """Inclusive range of months ``first..last``."""

    first: MonthlyIndex
    last: MonthlyIndex

    def __post_init__(self):
        if self.last < self.first:
            raise ValueError(f"window last {self.last} precedes first {self.first}")

    @classmethod
    def parse(cls, first: str, last: str) -> Window:
        return cls(MonthlyIndex.parse(first), MonthlyIndex.parse(last))

    @classmethod
    def from_ordinals(cls, first: int, last: int) -> Window:
        return cls(MonthlyIndex.from_ordinal(first), MonthlyIndex.from_ordinal(last))

    def __len__(self) -> int:
        return months_between(self.first, self.last)

    def __contains__(self, month: MonthlyIndex) -> bool:
        return self.first <= month <= self.last

    def __iter__(self) -> Iterator[MonthlyIndex]:
        for ordinal in range(self.first.ordinal, self.last.ordinal + 1):
            yield MonthlyIndex.from_ordinal(ordinal)

    def contains_window(self, other: Window) -> bool:
        return self.first <= other.first and other.last <= self.last

    def intersect(self, other: Window) -> Window | None:
        first = max(self.first, other.first)
        last = min(self.last, other.last)
        if last < first:
            return None
        return Window(first, last)

    def shift(self, lag: int) -> Window:
        return Window(self.first + lag, self.last + lag)

    def __str__(self) -> str:
        return f"{self.first}..{self.last}"


def _split_id(series_id: str) -> tuple[str, int]:
    base, sep, lag = series_id.rpartition("@")
    if sep and re.fullmatch(r"[+-]\d+", lag):
        return base, int(lag)
    return series_id, 0


class MonthlySeries:
    """Contiguous monthly series with finite values.

    Instances are immutable; ``values`` is a read-only float64 array.
    """

    __slots__ = ("_id", "_start", "_values")

    def __init__(self, id: str, start: MonthlyIndex, values):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError(f"series {id!r} is empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"series {id!r} has non-finite values")
        arr.flags.writeable = False
        self._id = id
        self._start = start
        self._values = arr

    @property
    def id(self) -> str:
        return self._id

    @property
    def start(self) -> MonthlyIndex:
        return self._start

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def end(self) -> MonthlyIndex:
        return self._start + (len(self._values) - 1)

    @property
    def window(self) -> Window:
        return Window(self._start, self.end)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"MonthlySeries({self._id!r}, {self._start}..{self.end}, n={len(self)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonthlySeries):
            return NotImplemented
        return (
            self._id == other._id
            and self._start == other._start
            and np.array_equal(self._values, other._values)
        )

    __hash__ = None

    def months(self) -> Iterator[MonthlyIndex]:
        return iter(self.window)

    def at(self, month: MonthlyIndex) -> float:
        offset = month - self._start
        if not 0 <= offset < len(self._values):
            raise KeyError(f"{month} outside {self.window} of {self._id}")
        return float(self._values[offset])

    def slice(self, window: Window) -> np.ndarray:
        """Values over ``window``, which must lie inside the series."""
        if not self.window.contains_window(window):
            raise KeyError(f"{window} not inside {self.window} of {self._id}")
        lo = window.first - self._start
        return self._values[lo : lo + len(window)]

    def restrict(self, window: Window) -> MonthlySeries | None:
        """Sub-series over the overlap with ``window`` (``None`` if disjoint)."""
        overlap = self.window.intersect(window)
        if overlap is None:
            return None
        return MonthlySeries(self._id, overlap.first, self.slice(overlap))

    def truncate(self, last: MonthlyIndex) -> MonthlySeries | None:
        """Drop every value after ``last``."""
        if last < self._start:
            return None
        return self.restrict(Window(self._start, min(last, self.end)))

    def with_id(self, new_id: str) -> MonthlySeries:
        return MonthlySeries(new_id, self._start, self._values)


def shift(series: MonthlySeries, lag: int) -> MonthlySeries:
    """Displace a series by ``lag`` months.

    Reading the result at month ``t`` gives the input at ``t - lag``: a
    positive lag attributes past values to later months. The id records the
    accumulated lag as ``ID@+n`` so that shifts compose and cancel.
    """
    lag = int(lag)
    base, previous = _split_id(series.id)
    total = previous + lag
    new_id = base if total == 0 else f"{base}@{total:+d}"
    return MonthlySeries(new_id, series.start + lag, series.values)


def align(series_list: Sequence[MonthlySeries]) -> tuple[Window, np.ndarray]:
    """Common window of all series and a (months x series) value matrix."""
    if not series_list:
        raise ValueError("align needs at least one series")
    window = series_list[0].window
    for s in series_list[1:]:
        window = window.intersect(s.window)
        if window is None:
            raise EmptyIntersection(
                "series have no common month: "
                + ", ".join(f"{x.id} {x.window}" for x in series_list)
            )
    matrix = np.column_stack([s.slice(window) for s in series_list])
    return window, matrix


def time_trend(t: MonthlyIndex) -> float:
    """Decimal-year offset from January 2000 (January of year Y is Y.0)."""
    return (t.year + (t.month - 1) / 12.0) - TREND_ORIGIN_YEAR


def trend_values(window: Window) -> np.ndarray:
    """``time_trend`` for every month of ``window``, in order."""
    return np.array([time_trend(m) for m in window])
