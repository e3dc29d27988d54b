"""File-based loading of CPI components and share prices, and model persistence.

File formats
------------
Series CSV
    One series per file, optional header, rows ``YYYY-MM,value``. UTF-8 with
    LF or CRLF line endings. Rows must be ascending with no missing months.
Catalog manifest
    CSV rows ``ACRONYM,path``; relative paths resolve against the manifest's
    directory.
Shares file
    CSV rows ``TICKER,shares``.
Model JSON
    ``{schema_version, ticker, cpi1, tau1, cpi2, tau2, b1, b2, c, d, sigma,
    window: {first, last}, residuals: [...]}``.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DuplicateAcronym, GapError, OrderError, ParseError, SchemaError
from .regression import FittedModel, ModelSpec
from .registry import CPI_COMPONENTS
from .timeseries import MonthlyIndex, MonthlySeries, Window

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODEL_FIELDS = (
    "schema_version", "ticker", "cpi1", "tau1", "cpi2", "tau2",
    "b1", "b2", "c", "d", "sigma", "window", "residuals",
)


def _csv_rows(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        yield lineno, [cell.strip() for cell in line.split(",")]


def _looks_like_header(cells: list[str]) -> bool:
    try:
        MonthlyIndex.parse(cells[0])
    except ParseError:
        return True
    return False


def parse_series(text: str, id: str, source: str = "<string>") -> MonthlySeries:
    """Parse ``YYYY-MM,value`` rows into a contiguous series."""
    months: list[MonthlyIndex] = []
    values: list[float] = []
    for i, (lineno, cells) in enumerate(_csv_rows(text)):
        if i == 0 and _looks_like_header(cells):
            continue
        if len(cells) != 2:
            raise ParseError(f"{source}:{lineno}: expected 'YYYY-MM,value', got {','.join(cells)!r}")
        month = MonthlyIndex.parse(cells[0])
        try:
            value = float(cells[1])
        except ValueError:
            raise ParseError(f"{source}:{lineno}: bad value {cells[1]!r}") from None
        if not math.isfinite(value):
            raise ParseError(f"{source}:{lineno}: non-finite value {cells[1]!r}")
        if months:
            step = month - months[-1]
            if step <= 0:
                raise OrderError(f"{source}:{lineno}: {month} does not follow {months[-1]}")
            if step > 1:
                missing = [months[-1] + k for k in range(1, step)]
                raise GapError(
                    f"{source}:{lineno}: missing month(s) "
                    + ", ".join(str(m) for m in missing),
                    missing=missing,
                )
        months.append(month)
        values.append(value)
    if not values:
        raise ParseError(f"{source}: no data rows")
    return MonthlySeries(id, months[0], values)


def load_series(path, id: str | None = None) -> MonthlySeries:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc})") from None
    return parse_series(text, id if id is not None else path.stem, source=str(path))


@dataclass(frozen=True)
class CatalogEntry:
    acronym: str
    description: str
    series: MonthlySeries
    user_defined: bool = False


class CpiCatalog(Mapping[str, MonthlySeries]):
    """Immutable acronym -> CPI series mapping.

    Acronyms outside the built-in registry are accepted and flagged
    ``user_defined``. Iteration is in sorted acronym order.
    """

    def __init__(self, entries: Iterable[CatalogEntry]):
        self._entries: dict[str, CatalogEntry] = {}
        for entry in entries:
            if entry.acronym in self._entries:
                raise DuplicateAcronym(f"acronym {entry.acronym!r} listed twice")
            self._entries[entry.acronym] = entry
        self._order = tuple(sorted(self._entries))

    @classmethod
    def from_series(cls, series: Iterable[MonthlySeries]) -> CpiCatalog:
        return cls(_make_entry(s.id, s) for s in series)

    def __getitem__(self, acronym: str) -> MonthlySeries:
        return self._entries[acronym].series

    def __iter__(self):
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def acronyms(self) -> tuple[str, ...]:
        return self._order

    def entry(self, acronym: str) -> CatalogEntry:
        return self._entries[acronym]

    def description(self, acronym: str) -> str:
        return self._entries[acronym].description

    def user_defined(self) -> list[str]:
        return [a for a in self._order if self._entries[a].user_defined]

    def truncate(self, last: MonthlyIndex) -> CpiCatalog:
        """Catalog with every series cut after ``last``; emptied series are dropped."""
        kept = []
        for a in self._order:
            e = self._entries[a]
            cut = e.series.truncate(last)
            if cut is not None:
                kept.append(CatalogEntry(a, e.description, cut, e.user_defined))
        return CpiCatalog(kept)


def _make_entry(acronym: str, series: MonthlySeries) -> CatalogEntry:
    description = CPI_COMPONENTS.get(acronym)
    if description is None:
        logger.warning("CPI component %s is not in the built-in registry", acronym)
        return CatalogEntry(acronym, "user-defined", series.with_id(acronym), True)
    return CatalogEntry(acronym, description, series.with_id(acronym), False)


def read_manifest(manifest_path) -> list[tuple[str, Path]]:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    rows: list[tuple[str, Path]] = []
    seen: set[str] = set()
    text = manifest_path.read_text(encoding="utf-8")
    for i, (lineno, cells) in enumerate(_csv_rows(text)):
        if len(cells) != 2 or not cells[0] or not cells[1]:
            raise ParseError(f"{manifest_path}:{lineno}: expected 'ACRONYM,path'")
        if i == 0 and cells[0].lower() in ("acronym", "id", "component"):
            continue
        acronym, rel = cells
        if acronym in seen:
            raise DuplicateAcronym(f"{manifest_path}:{lineno}: acronym {acronym!r} listed twice")
        seen.add(acronym)
        path = Path(rel)
        rows.append((acronym, path if path.is_absolute() else base / path))
    return rows


def load_catalog(manifest_path) -> CpiCatalog:
    entries = [_make_entry(a, load_series(p, a)) for a, p in read_manifest(manifest_path)]
    return CpiCatalog(entries)


@dataclass
class PriceBook:
    """Observed share prices (strictly positive) and optional share counts."""

    entries: dict[str, MonthlySeries] = field(default_factory=dict)
    shares_outstanding: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for ticker, series in self.entries.items():
            _check_positive(series, ticker)
        for ticker, shares in self.shares_outstanding.items():
            if not shares > 0:
                raise ParseError(f"shares outstanding for {ticker} must be positive")

    def __getitem__(self, ticker: str) -> MonthlySeries:
        return self.entries[ticker]


def _check_positive(series: MonthlySeries, ticker: str) -> None:
    if (series.values <= 0).any():
        raise ParseError(f"observed prices for {ticker} must be strictly positive")


def price_path(prices_dir, ticker: str) -> Path:
    return Path(prices_dir) / f"{ticker}.csv"


def load_prices(prices_dir, ticker: str) -> MonthlySeries:
    path = price_path(prices_dir, ticker)
    if not path.is_file():
        raise FileNotFoundError(f"no price file for {ticker}: {path}")
    series = load_series(path, ticker)
    _check_positive(series, ticker)
    return series


def load_shares(path) -> dict[str, float]:
    path = Path(path)
    shares: dict[str, float] = {}
    for i, (lineno, cells) in enumerate(_csv_rows(path.read_text(encoding="utf-8"))):
        if len(cells) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'TICKER,shares'")
        try:
            value = float(cells[1])
        except ValueError:
            if i == 0:
                continue
            raise ParseError(f"{path}:{lineno}: bad share count {cells[1]!r}") from None
        if not (math.isfinite(value) and value > 0):
            raise ParseError(f"{path}:{lineno}: share count must be positive")
        if cells[0] in shares:
            raise ParseError(f"{path}:{lineno}: ticker {cells[0]} listed twice")
        shares[cells[0]] = value
    return shares


def load_pricebook(prices_dir, tickers: Iterable[str], shares_path=None) -> PriceBook:
    entries = {t: load_prices(prices_dir, t) for t in tickers}
    shares = load_shares(shares_path) if shares_path is not None else {}
    return PriceBook(entries, shares)


# -- model persistence -------------------------------------------------------

def model_to_dict(model: FittedModel) -> dict:
    s = model.spec
    return {
        "schema_version": SCHEMA_VERSION,
        "ticker": s.ticker,
        "cpi1": s.cpi1,
        "tau1": s.tau1,
        "cpi2": s.cpi2,
        "tau2": s.tau2,
        "b1": model.b1,
        "b2": model.b2,
        "c": model.c,
        "d": model.d,
        "sigma": model.sigma,
        "window": {"first": str(model.window.first), "last": str(model.window.last)},
        "residuals": [float(r) for r in model.residuals],
    }


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{where}: field {key!r} must be a number")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{where}: field {key!r} must be an integer")
        return value
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    return value


def model_from_dict(doc, where: str = "model") -> FittedModel:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected a JSON object")
    version = _require(doc, "schema_version", int, where)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{where}: schema_version {version} unsupported (expected {SCHEMA_VERSION})")
    window_doc = _require(doc, "window", dict, where)
    try:
        window = Window.parse(_require(window_doc, "first", str, where),
                              _require(window_doc, "last", str, where))
        spec = ModelSpec(
            _require(doc, "ticker", str, where),
            _require(doc, "cpi1", str, where),
            _require(doc, "tau1", int, where),
            _require(doc, "cpi2", str, where),
            _require(doc, "tau2", int, where),
        )
        residuals = _require(doc, "residuals", list, where)
        if any(isinstance(r, bool) or not isinstance(r, (int, float)) for r in residuals):
            raise SchemaError(f"{where}: residuals must be numbers")
        return FittedModel(
            spec,
            _require(doc, "b1", float, where),
            _require(doc, "b2", float, where),
            _require(doc, "c", float, where),
            _require(doc, "d", float, where),
            _require(doc, "sigma", float, where),
            window,
            residuals,
        )
    except (ValueError, ParseError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def dumps(doc) -> str:
    # repr-based float output is the shortest exact round-trip form
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: FittedModel, path) -> None:
    atomic_write_text(path, dumps(model_to_dict(model)))


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def load_model(path) -> FittedModel:
    """Load a model file; a search-result file yields its best model."""
    doc = read_json(path)
    if isinstance(doc, dict) and doc.get("kind") == "search_result":
        models = doc.get("models")
        if not isinstance(models, list) or not models:
            raise SchemaError(f"{path}: search result holds no models")
        doc = models[0]
    return model_from_dict(doc, where=str(path))
