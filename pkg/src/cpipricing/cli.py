"""Command-line interface: ``cpipricing <command> ...``.

Exit codes: 0 success, 1 input or IO error, 2 analytic infeasibility.
Path flags fall back to the ``CPIPRICING_CATALOG``, ``CPIPRICING_PRICES_DIR``
and ``CPIPRICING_OUTPUT_DIR`` environment variables.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backtest, bankruptcy, checks
from .econometrics import adf_test, engle_granger, johansen_test, pp_test
from .errors import CpiPricingError, DegenerateSeries, InputError, ParseError, SingularMoment
from .ingestion import (
    atomic_write_text, dumps, load_catalog, load_model, load_prices, load_shares,
    model_to_dict, save_model,
)
from .regression import FittedModel, ModelSpec, fit_model, predict
from .search import SearchConfig, search_best
from .timeseries import MonthlyIndex, MonthlySeries, Window

logger = logging.getLogger("cpipricing")

ENV_CATALOG = "CPIPRICING_CATALOG"
ENV_PRICES_DIR = "CPIPRICING_PRICES_DIR"
ENV_OUTPUT_DIR = "CPIPRICING_OUTPUT_DIR"


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are input errors (exit 1); argparse would use 2
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    catalog_manifest: Path | None
    prices_dir: Path | None
    output_dir: Path
    search: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0
    strict_window: bool = False
    jobs: int = 1

    def require_inputs(self) -> None:
        if self.catalog_manifest is None:
            raise UsageError(f"no catalog manifest: pass --catalog or set {ENV_CATALOG}")
        if self.prices_dir is None:
            raise UsageError(f"no prices directory: pass --prices-dir or set {ENV_PRICES_DIR}")
        if not self.catalog_manifest.is_file():
            raise FileNotFoundError(f"catalog manifest not found: {self.catalog_manifest}")
        if not self.prices_dir.is_dir():
            raise FileNotFoundError(f"prices directory not found: {self.prices_dir}")


def _month(text: str) -> MonthlyIndex:
    try:
        return MonthlyIndex.parse(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _env_path(value, env: str, default=None):
    value = value if value is not None else os.environ.get(env, default)
    return None if value is None else Path(value)


def _search_config(args) -> SearchConfig:
    window = None
    if args.window_start or args.window_end:
        first = args.window_start or MonthlyIndex(1900, 1)
        last = args.window_end or MonthlyIndex(2999, 12)
        window = Window(first, last)
    try:
        return SearchConfig(
            lag_min=args.lag_min, lag_max=args.lag_max, window=window, top_k=args.top_k,
            min_obs=args.min_obs, strict_window=args.strict_window,
            allow_extended_lags=args.allow_extended_lags,
        )
    except ValueError as exc:
        raise UsageError(str(exc).replace("allow_extended_lags", "--allow-extended-lags")) from None


def run_config(args) -> RunConfig:
    search = _search_config(args) if hasattr(args, "lag_min") else SearchConfig()
    return RunConfig(
        catalog_manifest=_env_path(args.catalog, ENV_CATALOG),
        prices_dir=_env_path(args.prices_dir, ENV_PRICES_DIR),
        output_dir=_env_path(args.output_dir, ENV_OUTPUT_DIR, "."),
        search=search,
        seed=args.seed,
        strict_window=search.strict_window,
        jobs=args.jobs,
    )


def _fit_csv(model: FittedModel, prices: MonthlySeries) -> str:
    observed = prices.slice(model.window)
    out = io.StringIO()
    out.write("month,observed,predicted,residual\n")
    for m, o, r in zip(model.window, observed.tolist(), model.residuals.tolist()):
        out.write(f"{m},{o!r},{o - r!r},{r!r}\n")
    return out.getvalue()


def _model_summary(model: FittedModel) -> dict:
    doc = model_to_dict(model)
    del doc["residuals"]
    return doc


def _say(text: str) -> None:
    print(text, file=sys.stdout)


# -- commands ----------------------------------------------------------------

def cmd_search(args) -> int:
    cfg = run_config(args)
    cfg.require_inputs()
    catalog = load_catalog(cfg.catalog_manifest)
    prices = load_prices(cfg.prices_dir, args.ticker)
    result = search_best(prices, catalog, cfg.search, jobs=cfg.jobs)
    models_path = cfg.output_dir / f"{args.ticker}.models.json"
    fit_path = cfg.output_dir / f"{args.ticker}.fit.csv"
    atomic_write_text(models_path, dumps(result.to_dict()))
    atomic_write_text(fit_path, _fit_csv(result.best, prices))
    best = result.best
    _say(f"{best.spec}  sigma={best.sigma:.4g}  window={best.window}  "
         f"({result.candidate_count} candidates, {result.rejected_count} rejected)")
    _say(f"wrote {models_path} and {fit_path}")
    return 0


def cmd_fit(args) -> int:
    cfg = run_config(args)
    cfg.require_inputs()
    catalog = load_catalog(cfg.catalog_manifest)
    prices = load_prices(cfg.prices_dir, args.ticker)
    for acronym in (args.cpi1, args.cpi2):
        if acronym not in catalog:
            raise UsageError(f"CPI component {acronym!r} is not in the catalog")
    try:
        spec = ModelSpec(args.ticker, args.cpi1, args.tau1, args.cpi2, args.tau2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    window = None
    if args.window_start or args.window_end:
        window = Window(args.window_start or prices.start, args.window_end or prices.end)
    model = fit_model(prices, catalog, spec, window)
    model_path = cfg.output_dir / f"{args.ticker}.model.json"
    fit_path = cfg.output_dir / f"{args.ticker}.fit.csv"
    save_model(model, model_path)
    atomic_write_text(fit_path, _fit_csv(model, prices))
    _say(f"{model.spec}  b1={model.b1:.6g} b2={model.b2:.6g} c={model.c:.6g} d={model.d:.6g}  "
         f"sigma={model.sigma:.4g}")
    _say(f"wrote {model_path} and {fit_path}")
    return 0


def _default_model_path(cfg: RunConfig, ticker: str) -> Path:
    return cfg.output_dir / f"{ticker}.models.json"


def _load_model_file(path: Path) -> FittedModel:
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return load_model(path)


def cointegration_report(model: FittedModel, prices: MonthlySeries, catalog,
                         max_lag: int = 12, vecm_lag: int = 2,
                         det_case: str = "unrestricted_constant",
                         deterministic: str = "constant") -> dict:
    """ADF and PP on the fit residuals, Engle-Granger and Johansen on (observed, predicted)."""
    observed = MonthlySeries(prices.id, model.window.first, prices.slice(model.window))
    predicted = predict(model, catalog, model.window)
    residuals = model.residuals
    if np.ptp(residuals) <= 1e-12 * max(1.0, float(np.max(np.abs(observed.values)))):
        raise DegenerateSeries(
            f"{model.spec}: residuals are (numerically) constant; the model fits exactly "
            "and the residual tests are undefined"
        )
    try:
        johansen = johansen_test(observed, predicted, vecm_lag=vecm_lag, det_case=det_case)
    except SingularMoment as exc:
        raise DegenerateSeries(f"{model.spec}: Johansen test degenerate ({exc})") from None
    return {
        "schema_version": 1,
        "kind": "cointegration_report",
        "model": _model_summary(model),
        "window": {"first": str(model.window.first), "last": str(model.window.last)},
        "residual_adf": adf_test(residuals, max_lag=max_lag, deterministic=deterministic).to_dict(),
        "residual_pp": pp_test(residuals, deterministic=deterministic).to_dict(),
        "engle_granger": engle_granger(observed, predicted, max_lag=max_lag).to_dict(),
        "johansen": johansen.to_dict(),
    }


def cmd_cointegrate(args) -> int:
    cfg = run_config(args)
    cfg.require_inputs()
    model_path = Path(args.model) if args.model else _default_model_path(cfg, args.ticker)
    model = _load_model_file(model_path)
    catalog = load_catalog(cfg.catalog_manifest)
    prices = load_prices(cfg.prices_dir, args.ticker)
    report = cointegration_report(model, prices, catalog, max_lag=args.max_lag,
                                  vecm_lag=args.vecm_lag, det_case=args.det_case,
                                  deterministic=args.deterministic)
    out = cfg.output_dir / f"{args.ticker}.coint.json"
    atomic_write_text(out, dumps(report))
    j = report["johansen"]
    eg = report["engle_granger"]
    _say(f"{model.spec}: Johansen rank {j['rank']} (trace {j['stages'][0]['trace_statistic']:.3f}); "
         f"EG t={eg['statistic_t']:.3f}")
    _say(f"wrote {out}")
    return 0


def cmd_backtest(args) -> int:
    cfg = run_config(args)
    cfg.require_inputs()
    if args.through < args.asof:
        raise UsageError(f"--through {args.through} precedes --asof {args.asof}")
    catalog = load_catalog(cfg.catalog_manifest)
    prices = load_prices(cfg.prices_dir, args.ticker)
    run = backtest.run_asof(prices, catalog, args.asof, args.through, cfg.search,
                            reporting_lag=args.reporting_lag, jobs=cfg.jobs)
    if args.later_model:
        later = _load_model_file(Path(args.later_model))
    else:
        later = backtest.fit_asof(prices, catalog, args.through, cfg.search,
                                  reporting_lag=args.reporting_lag, jobs=cfg.jobs)
    report = backtest.compare(run, later, prices, catalog, k_sigma=args.k_sigma,
                              run_length=args.run_length)
    summary = report.summary() | {
        "schema_version": 1,
        "kind": "backtest_report",
        "through": str(args.through),
        "reporting_lag": args.reporting_lag,
        "asof_model": _model_summary(run.model),
        "later_model": _model_summary(later),
    }
    csv_path = cfg.output_dir / f"{args.ticker}.backtest.csv"
    json_path = cfg.output_dir / f"{args.ticker}.backtest.json"
    atomic_write_text(csv_path, report.to_csv())
    atomic_write_text(json_path, dumps(summary))
    _say(f"as of {args.asof}: {run.model.spec}; later: {later.spec}; "
         f"{len(report.months)} comparison months; divergence onset {summary['divergence_onset']}")
    _say(f"wrote {csv_path} and {json_path}")
    return 0


def read_portfolio(path: Path) -> list[tuple[str, Path, MonthlyIndex | None]]:
    """Rows ``ticker,model_path[,through]``; model paths resolve against the file."""
    if not path.is_file():
        raise FileNotFoundError(f"portfolio file not found: {path}")
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        cells = [c.strip() for c in line.split(",")]
        if not line.strip():
            continue
        if lineno == 1 and cells[0].lower() == "ticker":
            continue
        if len(cells) not in (2, 3) or not cells[0] or not cells[1]:
            raise ParseError(f"{path}:{lineno}: expected 'ticker,model_path[,through]'")
        through = None
        if len(cells) == 3 and cells[2]:
            through = MonthlyIndex.parse(cells[2])
        rows.append((cells[0], path.parent / cells[1], through))
    return rows


def cmd_distress(args) -> int:
    cfg = run_config(args)
    if cfg.catalog_manifest is None or not cfg.catalog_manifest.is_file():
        cfg.require_inputs()
    portfolio = read_portfolio(Path(args.portfolio))
    out = cfg.output_dir / (args.output or "distress.csv")
    if not portfolio:
        atomic_write_text(out, bankruptcy.distress_csv([]))
        _say(f"empty portfolio; wrote {out}")
        return 0
    shares_path = Path(args.shares) if args.shares else (
        cfg.prices_dir / "shares.csv" if cfg.prices_dir else None)
    if shares_path is None or not shares_path.is_file():
        raise FileNotFoundError(f"shares file not found: {shares_path}")
    shares = load_shares(shares_path)
    missing = [t for t, _, _ in portfolio if t not in shares]
    if missing:
        raise InputError(f"{shares_path}: no share count for {', '.join(missing)}")
    catalog = load_catalog(cfg.catalog_manifest)
    rows = []
    for ticker, model_path, through in portfolio:
        model = _load_model_file(model_path)
        horizon = backtest.projection_horizon(model, catalog)
        end = horizon if through is None else through
        path = backtest.project(model, catalog, end, start=model.window.first)
        signal = bankruptcy.detect_negative(path.with_id(f"{ticker}:predicted"))
        if signal is None:
            logger.info("%s: predicted path stays non-negative through %s", ticker, end)
            continue
        debt = bankruptcy.debt_from_signal(signal, shares[ticker], reference=args.reference)
        rows.append((signal, debt))
        _say(f"{ticker}: negative from {signal.first_negative}, trough {signal.trough_price:.2f} "
             f"at {signal.trough_month}, implied debt {debt.debt:.3g}")
    atomic_write_text(out, bankruptcy.distress_csv(rows))
    _say(f"{len(rows)} of {len(portfolio)} tickers flagged; wrote {out}")
    return 0


def cmd_selftest(args) -> int:
    results = checks.run_all(seed=args.seed, full=args.full)
    for r in results:
        _say(r.line())
    failed = [r.name for r in results if not r.passed]
    _say(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 2 if failed else 0


# -- parser ------------------------------------------------------------------

def _add_paths(p: argparse.ArgumentParser) -> None:
    p.add_argument("--catalog", help=f"CPI catalog manifest (env {ENV_CATALOG})")
    p.add_argument("--prices-dir", help=f"directory of <TICKER>.csv price files (env {ENV_PRICES_DIR})")
    p.add_argument("--output-dir", help=f"where artifacts are written (env {ENV_OUTPUT_DIR}, default .)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the search")


def _add_search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lag-min", type=int, default=-6)
    p.add_argument("--lag-max", type=int, default=14)
    p.add_argument("--allow-extended-lags", action="store_true",
                   help="permit lags beyond the 14-month cap")
    p.add_argument("--window-start", type=_month, help="first month of the fit window (YYYY-MM)")
    p.add_argument("--window-end", type=_month, help="last month of the fit window (YYYY-MM)")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--min-obs", type=int, default=60)
    p.add_argument("--strict-window", action="store_true",
                   help="reject candidates that cannot fill the whole window")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpipricing", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--seed", type=int, default=0, help="root seed for Monte-Carlo checks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", help="exhaustive two-component model search")
    p.add_argument("ticker")
    _add_paths(p)
    _add_search(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fit", help="fit one fixed specification")
    p.add_argument("ticker")
    p.add_argument("--cpi1", required=True)
    p.add_argument("--tau1", type=int, required=True)
    p.add_argument("--cpi2", required=True)
    p.add_argument("--tau2", type=int, required=True)
    p.add_argument("--window-start", type=_month)
    p.add_argument("--window-end", type=_month)
    _add_paths(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cointegrate", help="unit-root and cointegration report for a model")
    p.add_argument("ticker")
    p.add_argument("--model", help="model or search-result JSON (default <output-dir>/<ticker>.models.json)")
    p.add_argument("--max-lag", type=int, default=12)
    p.add_argument("--vecm-lag", type=int, default=2)
    p.add_argument("--det-case", default="unrestricted_constant",
                   choices=["none", "restricted_constant", "unrestricted_constant",
                            "restricted_trend", "unrestricted_trend"])
    p.add_argument("--deterministic", default="constant",
                   choices=["none", "constant", "constant+trend"])
    _add_paths(p)
    p.set_defaults(func=cmd_cointegrate)

    p = sub.add_parser("backtest", help="as-of fit, forward projection and comparison")
    p.add_argument("ticker")
    p.add_argument("--asof", type=_month, required=True)
    p.add_argument("--through", type=_month, required=True)
    p.add_argument("--later-model", help="model JSON to compare against (default: refit through --through)")
    p.add_argument("--reporting-lag", type=int, default=0, choices=[0, 1],
                   help="months between a CPI reading and its publication")
    p.add_argument("--k-sigma", type=float, default=2.0)
    p.add_argument("--run-length", type=int, default=3)
    _add_paths(p)
    _add_search(p)
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("distress", help="screen model projections for negative prices")
    p.add_argument("--portfolio", required=True, help="CSV rows ticker,model_path[,through]")
    p.add_argument("--shares", help="CSV rows TICKER,shares (default <prices-dir>/shares.csv)")
    p.add_argument("--reference", default="trough", choices=["trough", "first_negative"])
    p.add_argument("--output", help="output file name inside --output-dir (default distress.csv)")
    _add_paths(p)
    p.set_defaults(func=cmd_distress)

    p = sub.add_parser("selftest", help="run the seeded Monte-Carlo acceptance checks")
    p.add_argument("--full", action="store_true", help="include the 70-component search")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CpiPricingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
