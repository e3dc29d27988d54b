import json

import pytest

from cpipricing import checks, cli
from cpipricing.ingestion import load_model, save_model
from cpipricing.regression import ModelSpec, fit_model
from cpipricing.ingestion import load_catalog, load_prices

from conftest import TRUE_SPEC


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def env(fixture_tree, monkeypatch):
    monkeypatch.setenv(cli.ENV_CATALOG, str(fixture_tree["data"]))
    monkeypatch.setenv(cli.ENV_PRICES_DIR, str(fixture_tree["data"].parent / "prices"))
    monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(fixture_tree["out"]))
    return fixture_tree


NARROW = ["--lag-min", "-2", "--lag-max", "6"]


class TestSearch:
    def test_writes_artifacts(self, env, capsys):
        code, out, _ = run(capsys, "search", "SYN", *NARROW)
        assert code == 0
        doc = json.loads((env["out"] / "SYN.models.json").read_text())
        assert doc["schema_version"] == 1 and doc["kind"] == "search_result"
        assert len(doc["models"]) == 10
        best = load_model(env["out"] / "SYN.models.json")
        assert best.spec == TRUE_SPEC
        rows = (env["out"] / "SYN.fit.csv").read_text().splitlines()
        assert rows[0] == "month,observed,predicted,residual"
        assert len(rows) == 1 + len(best.window)
        month, obs, pred, res = rows[1].split(",")
        assert float(obs) - float(pred) == pytest.approx(float(res), abs=1e-9)

    def test_unknown_ticker(self, env, capsys):
        code, _, err = run(capsys, "search", "ZZZ")
        assert code == 1
        assert "ZZZ.csv" in err

    def test_lag_cap(self, env, capsys):
        code, _, err = run(capsys, "search", "SYN", "--lag-max", "20")
        assert code == 1
        assert "--allow-extended-lags" in err
        code, _, _ = run(capsys, "search", "SYN", "--lag-min", "0", "--lag-max", "20",
                         "--allow-extended-lags", "--top-k", "1")
        assert code == 0

    def test_bad_month_flag(self, env, capsys):
        code, _, _ = run(capsys, "search", "SYN", "--window-start", "2003-13")
        assert code == 1

    def test_missing_catalog(self, env, capsys, monkeypatch):
        monkeypatch.delenv(cli.ENV_CATALOG)
        code, _, err = run(capsys, "search", "SYN")
        assert code == 1 and "catalog" in err

    def test_no_feasible_candidate(self, env, capsys):
        code, _, _ = run(capsys, "search", "SYN", "--min-obs", "200")
        assert code == 2

    def test_deterministic(self, env, capsys):
        out = env["out"]
        run(capsys, "search", "SYN", *NARROW)
        first = (out / "SYN.models.json").read_bytes()
        run(capsys, "search", "SYN", *NARROW, "--jobs", "2")
        assert (out / "SYN.models.json").read_bytes() == first

    def test_explicit_flags_override_env(self, env, capsys, tmp_path):
        other = tmp_path / "elsewhere"
        code, _, _ = run(capsys, "search", "SYN", *NARROW, "--output-dir", other)
        assert code == 0
        assert (other / "SYN.models.json").is_file()


class TestFit:
    def test_fixed_spec(self, env, capsys):
        code, _, _ = run(capsys, "fit", "SYN", "--cpi1", "FS", "--tau1", "3",
                         "--cpi2", "TS", "--tau2", "5")
        assert code == 0
        model = load_model(env["out"] / "SYN.model.json")
        assert model.spec == TRUE_SPEC

    def test_unknown_component(self, env, capsys):
        code, _, err = run(capsys, "fit", "SYN", "--cpi1", "FS", "--tau1", "3",
                           "--cpi2", "NOPE", "--tau2", "5")
        assert code == 1 and "NOPE" in err


class TestCointegrate:
    def test_report(self, env, capsys):
        run(capsys, "search", "SYN", *NARROW)
        code, _, _ = run(capsys, "cointegrate", "SYN")
        assert code == 0
        doc = json.loads((env["out"] / "SYN.coint.json").read_text())
        for key in ("residual_adf", "residual_pp", "engle_granger", "johansen"):
            assert key in doc
        assert doc["johansen"]["stages"][1]["critical_values"]["5%"] == 3.76
        assert doc["residual_adf"]["critical_values"]["1%"] < -3.4

    def test_missing_model(self, env, capsys):
        code, _, err = run(capsys, "cointegrate", "SYN", "--model", env["root"] / "nope.json")
        assert code == 1 and "nope.json" in err

    def test_exact_fit_degenerate(self, env, capsys):
        run(capsys, "search", "EXACT", *NARROW)
        code, _, err = run(capsys, "cointegrate", "EXACT")
        assert code == 2
        assert "constant" in err or "degenerate" in err


class TestBacktest:
    def test_stable_generator(self, env, capsys):
        code, _, _ = run(capsys, "backtest", "SYN", "--asof", "2009-01", "--through", "2010-06", *NARROW)
        assert code == 0
        summary = json.loads((env["out"] / "SYN.backtest.json").read_text())
        assert summary["divergence_onset"] == "none"
        assert summary["rows"] == 17
        rows = (env["out"] / "SYN.backtest.csv").read_text().splitlines()
        assert rows[0] == "month,observed,asof_pred,later_pred"
        assert rows[1].startswith("2009-02,")

    def test_asof_last_month(self, env, capsys):
        code, _, _ = run(capsys, "backtest", "SYN", "--asof", "2010-06", "--through", "2010-06", *NARROW)
        assert code == 0
        assert (env["out"] / "SYN.backtest.csv").read_text() == "month,observed,asof_pred,later_pred\n"

    def test_asof_too_early(self, env, capsys):
        code, _, _ = run(capsys, "backtest", "SYN", "--asof", "2005-01", "--through", "2010-06")
        assert code == 2

    def test_later_model_file(self, env, capsys):
        run(capsys, "search", "SYN", *NARROW)
        code, _, _ = run(capsys, "backtest", "SYN", "--asof", "2009-01", "--through", "2010-06",
                         "--later-model", env["out"] / "SYN.models.json", *NARROW)
        assert code == 0

    def test_through_before_asof(self, env, capsys):
        code, _, _ = run(capsys, "backtest", "SYN", "--asof", "2009-01", "--through", "2008-01")
        assert code == 1


class TestDistress:
    @pytest.fixture
    def ramp(self, fixture_tree, monkeypatch):
        manifest = fixture_tree["ramp"]
        prices_dir = manifest.parent / "prices"
        monkeypatch.setenv(cli.ENV_CATALOG, str(manifest))
        monkeypatch.setenv(cli.ENV_PRICES_DIR, str(prices_dir))
        monkeypatch.setenv(cli.ENV_OUTPUT_DIR, str(fixture_tree["out"]))
        catalog = load_catalog(manifest)
        specs = {"DOOM": ("FS", 0, "TS", 0), "SAFE": ("FS", 0, "M", 0), "GROW": ("M", 2, "TS", 1)}
        lines = ["ticker,model_path"]
        for ticker, spec in specs.items():
            model = fit_model(load_prices(prices_dir, ticker), catalog, ModelSpec(ticker, *spec))
            save_model(model, fixture_tree["root"] / "models" / f"{ticker}.json")
            lines.append(f"{ticker},models/{ticker}.json")
        portfolio = fixture_tree["root"] / "portfolio.csv"
        portfolio.write_text("\n".join(lines) + "\n")
        return fixture_tree, portfolio

    def test_one_flagged(self, ramp, capsys):
        tree, portfolio = ramp
        code, _, _ = run(capsys, "distress", "--portfolio", portfolio)
        assert code == 0
        rows = (tree["out"] / "distress.csv").read_text().splitlines()
        assert rows[0] == "ticker,first_negative,trough_month,trough_price,shares,debt"
        assert len(rows) == 2
        ticker, first, trough, price, shares, debt = rows[1].split(",")
        assert ticker == "DOOM"
        assert float(price) < 0
        assert float(debt) == float(shares) * abs(float(price))

    def test_empty_portfolio(self, ramp, capsys):
        tree, _ = ramp
        empty = tree["root"] / "empty.csv"
        empty.write_text("ticker,model_path\n")
        code, _, _ = run(capsys, "distress", "--portfolio", empty)
        assert code == 0
        assert (tree["out"] / "distress.csv").read_text() == (
            "ticker,first_negative,trough_month,trough_price,shares,debt\n")

    def test_shares_missing_ticker(self, ramp, capsys):
        tree, portfolio = ramp
        shares = tree["root"] / "shares.csv"
        shares.write_text("DOOM,5e8\nSAFE,1e8\n")
        code, _, err = run(capsys, "distress", "--portfolio", portfolio, "--shares", shares)
        assert code == 1 and "GROW" in err

    def test_through_limits_screen(self, ramp, capsys):
        tree, _ = ramp
        short = tree["root"] / "short.csv"
        short.write_text("DOOM,models/DOOM.json,2008-12\n")
        code, _, _ = run(capsys, "distress", "--portfolio", short)
        assert code == 0
        assert len((tree["out"] / "distress.csv").read_text().splitlines()) == 1


class TestSelftest:
    def test_exit_codes(self, capsys, monkeypatch):
        ok = checks.CheckResult("a", True, "fine")
        bad = checks.CheckResult("b", False, "broken")
        monkeypatch.setattr(checks, "run_all", lambda seed, full: [ok])
        assert run(capsys, "selftest")[0] == 0
        monkeypatch.setattr(checks, "run_all", lambda seed, full: [ok, bad])
        code, out, _ = run(capsys, "--seed", "3", "selftest")
        assert code == 2
        assert "FAIL  b: broken" in out

    def test_debt_check(self):
        assert checks.check_debt_arithmetic().passed
