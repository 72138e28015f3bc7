import csv
import io
import json
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from tveff.cli import main
from tveff.errors import DataError
from tveff.pipeline import (
    PipelineConfig,
    StageError,
    emit_report,
    plot_data,
    read_returns_csv,
    read_zeta_csv,
    run_pipeline,
    write_returns_csv,
    write_zeta_csv,
)
from tveff.series import ReturnMatrix
from tveff.synth import ScenarioSpec, gen_returns
from tveff.tvvar import EfficiencyPath


def synth_prices(tmp_path, name="prices.csv", **kw):
    args = dict(kind="sinusoidal-tv", T=300, n=2, q=1, sigma_eps=0.02, seed=5,
                amplitude=0.3, period=150.0)
    args.update(kw)
    spec = ScenarioSpec(**args)
    returns, _ = gen_returns(spec)
    levels = 100.0 * np.exp(np.concatenate(
        [np.zeros((1, returns.n_columns)), np.cumsum(returns.values, axis=0)]))
    dates = np.concatenate([[returns.dates[0] - np.timedelta64(1, "D")], returns.dates])
    rows = ["date," + ",".join(returns.labels)]
    for i in range(levels.shape[0]):
        rows.append(str(dates[i]) + "," + ",".join(repr(float(v)) for v in levels[i]))
    p = tmp_path / name
    p.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return p, returns


def small_config(tmp_path, prices, **overrides):
    cfg = dict(
        input_path=str(prices),
        output_dir=str(tmp_path / "out"),
        q=1,
        lam=1.0,
        replications=120,
        coverage=0.9,
        seed=7,
        min_run=5,
    )
    cfg.update(overrides)
    return PipelineConfig.from_dict(cfg)


class TestRoundTrips:
    def test_returns_csv_round_trip_exact(self, tmp_path):
        X, _ = gen_returns(ScenarioSpec(kind="iid", T=50, n=2, sigma_eps=0.01, seed=1))
        p = tmp_path / "r.csv"
        write_returns_csv(p, X)
        back = read_returns_csv(p)
        assert np.array_equal(back.values, X.values)
        assert np.array_equal(back.dates, X.dates)
        assert back.labels == X.labels

    def test_zeta_csv_round_trip_with_nan(self, tmp_path):
        m = 20
        zeta = np.linspace(0, 1, m)
        zeta[3] = np.nan
        ep = EfficiencyPath(
            dates=np.datetime64("2020-01-01") + np.arange(m),
            zeta=zeta, flagged=~np.isfinite(zeta),
        ).with_bands(np.zeros(m), np.ones(m))
        p = tmp_path / "z.csv"
        write_zeta_csv(p, ep)
        back = read_zeta_csv(p)
        np.testing.assert_array_equal(np.isnan(back.zeta), np.isnan(ep.zeta))
        ok = np.isfinite(ep.zeta)
        assert np.array_equal(back.zeta[ok], ep.zeta[ok])
        assert np.array_equal(back.efficient_flag, ep.efficient_flag)


class TestPipeline:
    def test_full_run_artifacts(self, tmp_path):
        prices, _ = synth_prices(tmp_path)
        config = small_config(tmp_path, prices)
        result = run_pipeline(config)
        out = Path(config.output_dir)
        for name in ("prices_clean.csv", "returns.csv", "stats.csv", "stats.json",
                     "table1.csv", "table1.json", "table2.csv", "table2.json",
                     "tvvar_zeta.csv", "zeta_path.csv", "zeta_path.json",
                     "segments.csv", "regimes.csv", "zeta_plot.csv",
                     "zeta_plot.svg", "report.txt", "run_manifest.json"):
            assert (out / name).exists(), name
        assert result.q == 1

    def test_reruns_byte_identical(self, tmp_path):
        prices, _ = synth_prices(tmp_path)
        c1 = small_config(tmp_path, prices, output_dir=str(tmp_path / "a"))
        c2 = small_config(tmp_path, prices, output_dir=str(tmp_path / "b"))
        run_pipeline(c1)
        run_pipeline(c2)
        names = [p.name for p in (tmp_path / "a").iterdir()
                 if p.name != "run_manifest.json"]
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes(), name

    def test_worker_count_does_not_change_artifacts(self, tmp_path):
        prices, _ = synth_prices(tmp_path)
        c1 = small_config(tmp_path, prices, output_dir=str(tmp_path / "w1"), workers=1)
        c4 = small_config(tmp_path, prices, output_dir=str(tmp_path / "w4"), workers=4)
        run_pipeline(c1)
        run_pipeline(c4)
        for p in (tmp_path / "w1").iterdir():
            if p.name == "run_manifest.json":
                continue
            assert p.read_bytes() == (tmp_path / "w4" / p.name).read_bytes(), p.name

    def test_manifest_reproduces_run(self, tmp_path):
        prices, _ = synth_prices(tmp_path)
        config = small_config(tmp_path, prices)
        run_pipeline(config)
        out = Path(config.output_dir)
        manifest = json.loads((out / "run_manifest.json").read_text())
        before = {p.name: p.read_bytes() for p in out.iterdir()}
        rerun = PipelineConfig.from_dict(manifest)
        run_pipeline(rerun)
        after = {p.name: p.read_bytes() for p in out.iterdir()}
        assert before == after

    def test_missing_input_fails_in_ingest_with_no_artifacts(self, tmp_path):
        config = small_config(tmp_path, tmp_path / "missing.csv")
        with pytest.raises(StageError, match="ingest"):
            run_pipeline(config)
        out = Path(config.output_dir)
        assert not any(out.iterdir())

    def test_breakpoints_make_regime_rows(self, tmp_path):
        prices, returns = synth_prices(tmp_path)
        mid = str(returns.dates[150])
        config = small_config(tmp_path, prices, breakpoints=[mid])
        run_pipeline(config)
        text = (Path(config.output_dir) / "regimes.csv").read_text()
        assert len(text.strip().splitlines()) == 3  # header + 2 regimes

    def test_unknown_config_key_rejected(self):
        with pytest.raises(DataError, match="unknown config keys"):
            PipelineConfig.from_dict({"input_path": "x", "output_dir": "y", "qq": 3})


class TestReport:
    def test_report_without_tvvar_artifacts(self, tmp_path):
        text = emit_report(tmp_path)
        assert "no TV-VAR run" in text

    def test_report_renders_tables(self, tmp_path):
        prices, _ = synth_prices(tmp_path)
        config = small_config(tmp_path, prices)
        run_pipeline(config)
        text = (Path(config.output_dir) / "report.txt").read_text()
        assert "Descriptive statistics and unit root tests" in text
        assert "Time-invariant VAR(1) estimates" in text
        assert re.search(r"\[\d\.\d{4}\]", text)  # bracketed SEs at 4 decimals
        assert "share efficient" in text


class TestPlotData:
    def make_banded_path(self, m=40):
        rng = np.random.default_rng(3)
        zeta = rng.random(m)
        ep = EfficiencyPath(
            dates=np.datetime64("2020-01-01") + np.arange(m),
            zeta=zeta, flagged=np.zeros(m, bool),
        )
        return ep.with_bands(zeta - 0.1, zeta + 0.1)

    def test_long_csv_has_three_rows_per_period(self, tmp_path):
        ep = self.make_banded_path(25)
        p_csv, _ = plot_data(ep, tmp_path)
        reader = csv.reader(io.StringIO(p_csv.read_text()))
        rows = list(reader)[1:]
        assert len(rows) == 3 * 25

    def test_svg_ranges_enclose_band_extrema(self, tmp_path):
        ep = self.make_banded_path(30)
        p_csv, p_svg = plot_data(ep, tmp_path)
        txt = p_svg.read_text()
        y_min = float(re.search(r'data-y-min="([^"]+)"', txt).group(1))
        y_max = float(re.search(r'data-y-max="([^"]+)"', txt).group(1))
        # recompute extrema from the CSV per series
        vals = {"zeta": [], "lower": [], "upper": []}
        for rec in list(csv.reader(io.StringIO(p_csv.read_text())))[1:]:
            if rec[2]:
                vals[rec[1]].append(float(rec[2]))
        assert y_min <= min(vals["lower"])
        assert y_max >= max(vals["upper"])
        every = np.concatenate([vals["zeta"], vals["lower"], vals["upper"]])
        assert y_min == every.min() and y_max == every.max()

    def test_constant_zero_path_flat_lines(self, tmp_path):
        m = 10
        ep = EfficiencyPath(
            dates=np.datetime64("2020-01-01") + np.arange(m),
            zeta=np.zeros(m), flagged=np.zeros(m, bool),
        ).with_bands(np.zeros(m), np.zeros(m))
        _, p_svg = plot_data(ep, tmp_path)
        assert p_svg.exists()
        assert p_svg.read_text().count("<polyline") == 3


def run_cli(*args):
    return main(list(args))


class TestCli:
    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("bogus-command")
        assert exc.value.code == 1

    def test_missing_input_exit_code_2(self, tmp_path, capsys):
        cfg = {"input_path": str(tmp_path / "nope.csv"),
               "output_dir": str(tmp_path / "out"), "replications": 120,
               "coverage": 0.9}
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        assert run_cli("run", "--config", str(p)) == 2
        err = capsys.readouterr().err
        assert "ingest" in err

    def test_synth_ingest_round_trip(self, tmp_path):
        prices = tmp_path / "p.csv"
        assert run_cli("synth", "--kind", "iid", "--T", "60", "--n", "2",
                       "--sigma-eps", "0.01", "--seed", "3",
                       "--out", str(prices)) == 0
        assert run_cli("ingest", "-i", str(prices), "-o", str(tmp_path / "ing")) == 0
        back = read_returns_csv(tmp_path / "ing" / "returns.csv")
        X, _ = gen_returns(ScenarioSpec(kind="iid", T=60, n=2, sigma_eps=0.01, seed=3))
        np.testing.assert_allclose(back.values, X.values, atol=1e-12)

    def test_chained_equals_single_shot(self, tmp_path):
        prices, _ = synth_prices(tmp_path, T=200, period=100.0)
        single = tmp_path / "single"
        cfg = {"input_path": str(prices), "output_dir": str(single), "q": 1,
               "lam": 1.0, "replications": 120, "coverage": 0.9, "seed": 7,
               "min_run": 5}
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps(cfg))
        assert run_cli("run", "--config", str(cfg_file)) == 0

        chain = tmp_path / "chain"
        assert run_cli("ingest", "-i", str(prices), "-o", str(chain)) == 0
        assert run_cli("stats", "--returns", str(chain / "returns.csv"), "-o", str(chain)) == 0
        assert run_cli("unitroot", "--returns", str(chain / "returns.csv"), "-o", str(chain)) == 0
        assert run_cli("var", "--returns", str(chain / "returns.csv"), "--q", "1",
                       "-o", str(chain)) == 0
        assert run_cli("tvvar", "--returns", str(chain / "returns.csv"), "--q", "1",
                       "--lam", "1.0", "-o", str(chain)) == 0
        assert run_cli("bootstrap", "--returns", str(chain / "returns.csv"), "--q", "1",
                       "--lam", "1.0", "--replications", "120", "--coverage", "0.9",
                       "--seed", "7", "-o", str(chain)) == 0
        assert run_cli("segments", "--zeta", str(chain / "zeta_path.csv"),
                       "--min-run", "5", "-o", str(chain)) == 0
        assert run_cli("report", "--artifacts", str(chain),
                       "--out", str(chain / "report.txt")) == 0
        for p in single.iterdir():
            if p.name == "run_manifest.json":
                continue
            assert p.read_bytes() == (chain / p.name).read_bytes(), p.name

    def test_flag_overrides_beat_config(self, tmp_path):
        prices, _ = synth_prices(tmp_path, T=200, period=100.0)
        cfg = {"input_path": str(prices), "output_dir": str(tmp_path / "o1"),
               "q": 1, "replications": 120, "coverage": 0.9, "seed": 1, "min_run": 5}
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps(cfg))
        assert run_cli("run", "--config", str(cfg_file),
                       "--output-dir", str(tmp_path / "o2"), "--seed", "2") == 0
        manifest = json.loads((tmp_path / "o2" / "run_manifest.json").read_text())
        assert manifest["config"]["seed"] == 2
        assert not (tmp_path / "o1").exists()

    def test_script_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "tveff.cli", "--version"],
                             capture_output=True, text=True)
        assert out.returncode == 0
        assert "tveff" in out.stdout
