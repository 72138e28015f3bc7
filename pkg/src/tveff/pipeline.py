"""End-to-end orchestration: config, artifacts, reports, plot data.

The pipeline runs ingest -> interpolate -> returns -> stats -> unit-root
tests -> lag selection -> VAR with robust errors and the constancy test
-> time-varying VAR -> efficiency path -> bootstrap bands -> segments ->
regime summaries, writing each product as CSV/JSON into one output
directory plus a manifest that reproduces the run bit-for-bit.

Floats are serialized with ``repr`` (shortest round-trip form) so that
artifacts read back exactly and re-runs compare byte-identically; JSON
uses sorted keys and represents NaN as null.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import DataError, NumericalError
from .inference import BootstrapSpec, RegimeSummary, Segment, bootstrap_bands, classify_segments, regime_volatility
from .series import CsvSchema, ReturnMatrix, StatsSummary, descriptive_stats, interpolate_missing, load_csv, log_returns
from .tvvar import EfficiencyPath, solve_tvvar, tv_efficiency_path
from .unitroot import AdfGlsResult, adf_gls
from .var import VarFit, fit_var, hansen_lc, newey_west_cov, select_lag_sbic

__all__ = [
    "PipelineConfig",
    "StageError",
    "run_pipeline",
    "emit_report",
    "plot_data",
    "write_returns_csv",
    "read_returns_csv",
    "write_zeta_csv",
    "read_zeta_csv",
]

STAGES = ("ingest", "stats", "unitroot", "var", "tvvar", "bootstrap", "segments", "report")


class StageError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"stage {stage!r} failed: {original}")
        self.stage = stage
        self.original = original


@dataclass
class PipelineConfig:
    """Resolved settings for one pipeline run.

    ``q=None`` selects the VAR order by the Schwarz criterion up to
    ``q_max``.  Breakpoints are ISO dates defining regime boundaries for
    the volatility summary.
    """

    input_path: str
    output_dir: str
    date_column: str = "date"
    price_columns: list[str] | None = None
    date_format: str = "%Y-%m-%d"
    interpolate: bool = True
    unitroot_model: str = "trend"
    unitroot_k_max: int | None = None
    q: int | None = None
    q_max: int = 8
    lam: float = 1.0
    replications: int = 5000
    coverage: float = 0.95
    seed: int = 0
    workers: int = 1
    min_run: int = 20
    breakpoints: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.unitroot_model not in ("constant", "trend"):
            raise DataError("unitroot_model must be 'constant' or 'trend'")
        if self.q is not None and self.q < 1:
            raise DataError("q must be >= 1")
        if self.q_max < 1:
            raise DataError("q_max must be >= 1")
        if self.lam <= 0:
            raise DataError("lam must be positive")
        if self.min_run < 1:
            raise DataError("min_run must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        if "config" in raw and isinstance(raw["config"], dict):
            raw = raw["config"]  # accept a run manifest
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        missing = {"input_path", "output_dir"} - set(raw)
        if missing:
            raise DataError(f"config missing required keys: {sorted(missing)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON in config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def bootstrap_spec(self, q: int) -> BootstrapSpec:
        return BootstrapSpec(
            replications=self.replications,
            coverage=self.coverage,
            seed=self.seed,
            lam=self.lam,
            q=q,
            workers=self.workers,
        )


# ---------------------------------------------------------------------------
# serialization helpers


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form; empty string for NaN."""
    if isinstance(x, float) and not np.isfinite(x):
        return ""
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, float):
        return None if not np.isfinite(x) else x
    if isinstance(x, (np.floating,)):
        return _jsonable(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.datetime64):
        return str(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()] if x.dtype.kind in "Mm" else _jsonable(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def write_returns_csv(path: Path, returns: ReturnMatrix) -> None:
    rows = [["date", *returns.labels]]
    for i in range(len(returns)):
        rows.append([str(returns.dates[i]), *[_fmt(v) for v in returns.values[i]]])
    path.write_text(_csv_text(rows), encoding="utf-8")


def read_returns_csv(path: str | Path) -> ReturnMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "date":
        raise DataError(f"{path}: expected a returns CSV with a 'date' first column")
    labels = tuple(header[1:])
    dates, rows = [], []
    for rec in reader:
        if not rec:
            continue
        dates.append(np.datetime64(rec[0], "D"))
        rows.append([float(v) for v in rec[1:]])
    if not rows:
        raise DataError(f"{path}: no data rows")
    return ReturnMatrix(
        dates=np.array(dates, dtype="datetime64[D]"),
        values=np.asarray(rows, dtype=np.float64),
        labels=labels,
    )


def _write_prices_csv(path: Path, dates: np.ndarray, prices: np.ndarray,
                      labels: tuple[str, ...]) -> None:
    rows = [["date", *labels]]
    for i in range(prices.shape[0]):
        rows.append([str(dates[i]), *[_fmt(v) for v in prices[i]]])
    path.write_text(_csv_text(rows), encoding="utf-8")


def write_zeta_csv(path: Path, ep: EfficiencyPath) -> None:
    rows = [["date", "zeta", "lower", "upper", "efficient_flag"]]
    lower = ep.band_lower if ep.band_lower is not None else np.full(len(ep), np.nan)
    upper = ep.band_upper if ep.band_upper is not None else np.full(len(ep), np.nan)
    flags = ep.efficient_flag
    for i in range(len(ep)):
        rows.append([
            str(ep.dates[i]),
            _fmt(ep.zeta[i]),
            _fmt(lower[i]),
            _fmt(upper[i]),
            "" if flags is None else ("true" if flags[i] else "false"),
        ])
    path.write_text(_csv_text(rows), encoding="utf-8")


def read_zeta_csv(path: str | Path) -> EfficiencyPath:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["date", "zeta", "lower", "upper", "efficient_flag"]:
        raise DataError(f"{path}: not an efficiency-path CSV")
    dates, zeta, lower, upper, flags = [], [], [], [], []
    any_flag = False
    for rec in reader:
        if not rec:
            continue
        dates.append(np.datetime64(rec[0], "D"))
        zeta.append(float(rec[1]) if rec[1] else np.nan)
        lower.append(float(rec[2]) if rec[2] else np.nan)
        upper.append(float(rec[3]) if rec[3] else np.nan)
        flags.append(rec[4] == "true")
        any_flag = any_flag or rec[4] != ""
    zeta_arr = np.asarray(zeta)
    ep = EfficiencyPath(
        dates=np.array(dates, dtype="datetime64[D]"),
        zeta=zeta_arr,
        flagged=~np.isfinite(zeta_arr),
    )
    lower_arr, upper_arr = np.asarray(lower), np.asarray(upper)
    if any_flag and np.isfinite(lower_arr).all() and np.isfinite(upper_arr).all():
        return ep.with_bands(lower_arr, upper_arr)
    return ep


def _write_zeta_json(path: Path, ep: EfficiencyPath) -> None:
    payload = {
        "dates": [str(d) for d in ep.dates],
        "zeta": ep.zeta,
        "lower": ep.band_lower,
        "upper": ep.band_upper,
        "efficient": ep.efficient_flag,
        "flagged": ep.flagged,
    }
    _write_json(path, payload)


def _table1_rows(stats: StatsSummary, tests: list[AdfGlsResult]) -> list[dict]:
    rows = []
    for j, lab in enumerate(stats.labels):
        t = tests[j]
        rows.append({
            "series": lab,
            "mean": float(stats.mean[j]),
            "sd": float(stats.sd[j]),
            "max": float(stats.maximum[j]),
            "min": float(stats.minimum[j]),
            "adf_gls": t.statistic,
            "lags": t.selected_lag,
            "phi_hat": t.phi_hat,
            "n": stats.count,
        })
    return rows


def _write_table1(out: Path, stats: StatsSummary, tests: list[AdfGlsResult]) -> list[Path]:
    rows = _table1_rows(stats, tests)
    csv_rows = [["series", "mean", "sd", "max", "min", "adf_gls", "lags", "phi_hat", "n"]]
    for r in rows:
        csv_rows.append([
            r["series"], _fmt(r["mean"]), _fmt(r["sd"]), _fmt(r["max"]), _fmt(r["min"]),
            _fmt(r["adf_gls"]), str(r["lags"]), _fmt(r["phi_hat"]), str(r["n"]),
        ])
    p_csv, p_json = out / "table1.csv", out / "table1.json"
    p_csv.write_text(_csv_text(csv_rows), encoding="utf-8")
    _write_json(p_json, {
        "columns": rows,
        "model": tests[0].model,
        "critical_values": tests[0].critical_values,
    })
    return [p_csv, p_json]


def _term_names(labels: tuple[str, ...], q: int) -> list[str]:
    names = ["const"]
    for l in range(1, q + 1):
        names.extend(f"{lab}_lag{l}" for lab in labels)
    return names


def _write_table2(out: Path, fit: VarFit, se: np.ndarray, lc) -> list[Path]:
    terms = _term_names(fit.labels, fit.q)
    # coefficient matrix in regressor order: (p, n)
    stacked = np.vstack([fit.nu[None, :]] + [A.T for A in fit.A])
    csv_rows = [["term", *fit.labels]]
    for i, term in enumerate(terms):
        csv_rows.append([term, *[_fmt(v) for v in stacked[i]]])
        csv_rows.append([f"{term} (se)", *[_fmt(v) for v in se[i]]])
    csv_rows.append(["adj_r2", *[_fmt(v) for v in fit.adj_r2]])
    csv_rows.append(["Lc", _fmt(lc.lc_statistic), *[""] * (fit.n_series - 1)])
    p_csv, p_json = out / "table2.csv", out / "table2.json"
    p_csv.write_text(_csv_text(csv_rows), encoding="utf-8")
    _write_json(p_json, {
        "q": fit.q,
        "labels": list(fit.labels),
        "terms": terms,
        "coefficients": stacked,
        "standard_errors": se,
        "adj_r2": fit.adj_r2,
        "lc_statistic": lc.lc_statistic,
        "lc_dof": lc.dof,
        "lc_critical_values": lc.critical_values,
        "lc_reject": lc.reject,
        "lc_level": lc.level,
    })
    return [p_csv, p_json]


def _write_segments(out: Path, segments: list[Segment]) -> Path:
    rows = [["start", "end", "label", "mean_zeta"]]
    for s in segments:
        rows.append([str(s.start), str(s.end), s.label, _fmt(s.mean_zeta)])
    p = out / "segments.csv"
    p.write_text(_csv_text(rows), encoding="utf-8")
    return p


def _write_regimes(out: Path, summary: RegimeSummary) -> Path:
    rows = [["regime", "start", "end", "sd_zeta", "efficient_share", "count"]]
    for r in range(summary.sd.shape[0]):
        rows.append([
            str(r + 1), str(summary.starts[r]), str(summary.ends[r]),
            _fmt(summary.sd[r]), _fmt(summary.efficient_share[r]), str(summary.counts[r]),
        ])
    p = out / "regimes.csv"
    p.write_text(_csv_text(rows), encoding="utf-8")
    return p


# ---------------------------------------------------------------------------
# plot emission


def plot_data(ep: EfficiencyPath, out_dir: str | Path, stem: str = "zeta_plot") -> tuple[Path, Path]:
    """Write the efficiency path as long-format CSV plus a static SVG.

    The SVG records its exact data ranges in ``data-y-min``/``data-y-max``
    attributes; the y range is the extremum over the path and both bands,
    so it encloses [min(lower), max(upper)].
    """
    if not ep.has_bands:
        raise DataError("path has no bands; nothing to plot")
    out_dir = Path(out_dir)
    rows = [["date", "series", "value"]]
    for name, arr in (("zeta", ep.zeta), ("lower", ep.band_lower), ("upper", ep.band_upper)):
        for i in range(len(ep)):
            rows.append([str(ep.dates[i]), name, _fmt(arr[i])])
    p_csv = out_dir / f"{stem}.csv"
    p_csv.write_text(_csv_text(rows), encoding="utf-8")
    p_svg = out_dir / f"{stem}.svg"
    p_svg.write_text(_svg_chart(ep), encoding="utf-8")
    return p_csv, p_svg


def _svg_chart(ep: EfficiencyPath, width: int = 800, height: int = 400, margin: int = 50) -> str:
    finite = np.concatenate([
        ep.zeta[np.isfinite(ep.zeta)],
        ep.band_lower[np.isfinite(ep.band_lower)],
        ep.band_upper[np.isfinite(ep.band_upper)],
    ])
    if finite.size == 0:
        raise DataError("no finite values to plot")
    y_min, y_max = float(finite.min()), float(finite.max())
    span = (y_max - y_min) or 1.0
    m = len(ep)
    inner_w, inner_h = width - 2 * margin, height - 2 * margin

    def x_px(i: int) -> float:
        return margin + (inner_w * i / max(m - 1, 1))

    def y_px(v: float) -> float:
        return margin + inner_h * (1.0 - (v - y_min) / span)

    def polyline(arr: np.ndarray, style: str) -> str:
        pts = " ".join(
            f"{x_px(i):.2f},{y_px(arr[i]):.2f}" for i in range(m) if np.isfinite(arr[i])
        )
        return f'<polyline fill="none" {style} points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" data-y-min="{_fmt(y_min)}" data-y-max="{_fmt(y_max)}" '
        f'data-x-start="{ep.dates[0]}" data-x-end="{ep.dates[-1]}">',
        f'<rect x="{margin}" y="{margin}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        polyline(ep.band_lower, 'stroke="red" stroke-width="1" stroke-dasharray="6,4"'),
        polyline(ep.band_upper, 'stroke="red" stroke-width="1" stroke-dasharray="6,4"'),
        polyline(ep.zeta, 'stroke="black" stroke-width="1.5"'),
        f'<text x="{margin}" y="{margin - 8}" font-size="12">{_fmt(y_max)}</text>',
        f'<text x="{margin}" y="{height - margin + 16}" font-size="12">{ep.dates[0]}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" font-size="12" '
        f'text-anchor="end">{ep.dates[-1]}</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# report rendering


def _fmt4(x: float) -> str:
    if not np.isfinite(x):
        return "--"
    return f"{x:.4f}"


def emit_report(artifact_dir: str | Path) -> str:
    """Render the fixed-width text report from written artifacts."""
    out = Path(artifact_dir)

    lines: list[str] = ["Market efficiency analysis", "=" * 60, ""]

    t1 = out / "table1.json"
    if t1.exists():
        data = json.loads(t1.read_text(encoding="utf-8"))
        lines.append("Descriptive statistics and unit root tests")
        lines.append("-" * 60)
        wl = max(8, max(len(r["series"]) for r in data["columns"]) + 2)
        lines.append(f"{'':{wl}s}{'Mean':>10s}{'SD':>10s}{'Max':>10s}{'Min':>10s}"
                     f"{'ADF-GLS':>10s}{'Lags':>6s}{'phi':>9s}{'N':>7s}")
        for r in data["columns"]:
            lines.append(
                f"{r['series']:<{wl}s}{_fmt4(r['mean']):>10s}{_fmt4(r['sd']):>10s}"
                f"{_fmt4(r['max']):>10s}{_fmt4(r['min']):>10s}"
                f"{_fmt4(r['adf_gls']):>10s}{r['lags']:>6d}{_fmt4(r['phi_hat']):>9s}{r['n']:>7d}"
            )
        cv = data["critical_values"]["1%"]
        lines.append(f"  (model: {data['model']}; 1% critical value {_fmt4(cv)})")
        lines.append("")

    t2 = out / "table2.json"
    if t2.exists():
        data = json.loads(t2.read_text(encoding="utf-8"))
        labels = data["labels"]
        lines.append(f"Time-invariant VAR({data['q']}) estimates")
        lines.append("-" * 60)
        wt = max(10, max(len(t) for t in data["terms"]) + 2)
        wc = max(12, max(len(lab) for lab in labels) + 2)
        lines.append(f"{'':{wt}s}" + "".join(f"{lab:>{wc}s}" for lab in labels))
        for i, term in enumerate(data["terms"]):
            coefs = data["coefficients"][i]
            ses = data["standard_errors"][i]
            lines.append(f"{term:<{wt}s}" + "".join(f"{_fmt4(c):>{wc}s}" for c in coefs))
            lines.append(f"{'':{wt}s}" + "".join(f"{'[' + _fmt4(s) + ']':>{wc}s}" for s in ses))
        lines.append(f"{'adj R2':<{wt}s}" + "".join(f"{_fmt4(v):>{wc}s}" for v in data["adj_r2"]))
        lines.append(f"{'Lc':<{wt}s}{_fmt4(data['lc_statistic']):>{wc}s}   "
                     f"(dof {data['lc_dof']}, 5% cv {_fmt4(data['lc_critical_values']['5%'])}, "
                     f"reject={data['lc_reject']})")
        lines.append("")

    zp = out / "zeta_path.csv"
    if zp.exists():
        ep = read_zeta_csv(zp)
        finite = ep.zeta[np.isfinite(ep.zeta)]
        lines.append("Time-varying efficiency degree")
        lines.append("-" * 60)
        if finite.size:
            lines.append(f"{'min zeta':<20s}{_fmt4(float(finite.min())):>12s}")
            lines.append(f"{'max zeta':<20s}{_fmt4(float(finite.max())):>12s}")
        if ep.efficient_flag is not None:
            share = float(np.mean(ep.efficient_flag))
            lines.append(f"{'share efficient':<20s}{_fmt4(share):>12s}")
        reg = out / "regimes.csv"
        if reg.exists():
            lines.append("")
            lines.append("Regime volatility of the efficiency degree")
            lines.append(f"{'regime':<8s}{'start':<14s}{'end':<14s}{'SD':>10s}{'eff. share':>12s}")
            reader = csv.reader(io.StringIO(reg.read_text(encoding="utf-8")))
            next(reader)
            for rec in reader:
                sd = _fmt4(float(rec[3])) if rec[3] else "--"
                sh = _fmt4(float(rec[4])) if rec[4] else "--"
                lines.append(f"{rec[0]:<8s}{rec[1]:<14s}{rec[2]:<14s}{sd:>10s}{sh:>12s}")
        seg = out / "segments.csv"
        if seg.exists():
            lines.append("")
            lines.append("Efficiency segments")
            reader = csv.reader(io.StringIO(seg.read_text(encoding="utf-8")))
            next(reader)
            for rec in reader:
                mz = _fmt4(float(rec[3])) if rec[3] else "--"
                lines.append(f"  {rec[0]} .. {rec[1]}  {rec[2]:<12s} mean zeta {mz}")
    else:
        lines.append("Time-varying efficiency degree")
        lines.append("-" * 60)
        lines.append("no TV-VAR run")
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# the pipeline


@dataclass
class PipelineResult:
    """Artifacts and headline objects of a completed run."""

    artifacts: list[Path]
    q: int
    path: EfficiencyPath
    segments: list[Segment]


def _versions() -> dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "tveff": __version__,
    }


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every stage, writing artifacts into ``config.output_dir``.

    On a stage failure all artifacts written by this run are removed and
    a :class:`StageError` naming the stage is raised.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def track(*paths: Path) -> None:
        written.extend(paths)

    stage = "ingest"
    try:
        schema = CsvSchema(
            date_column=config.date_column,
            price_columns=None if config.price_columns is None else tuple(config.price_columns),
            date_format=config.date_format,
        )
        prices = load_csv(config.input_path, schema)
        if config.interpolate:
            prices = interpolate_missing(prices)
        elif prices.missing_mask.any():
            raise DataError("input has missing prices and interpolation is disabled")
        returns = log_returns(prices)
        p1 = out / "prices_clean.csv"
        _write_prices_csv(p1, prices.dates, prices.prices, prices.labels)
        p2 = out / "returns.csv"
        write_returns_csv(p2, returns)
        track(p1, p2)

        stage = "stats"
        stats = descriptive_stats(returns)
        p_scsv, p_sjson = out / "stats.csv", out / "stats.json"
        p_scsv.write_text(stats.to_csv(), encoding="utf-8")
        p_sjson.write_text(stats.to_json() + "\n", encoding="utf-8")
        track(p_scsv, p_sjson)

        stage = "unitroot"
        tests = [
            adf_gls(returns.values[:, j], model=config.unitroot_model,
                    k_max=config.unitroot_k_max)
            for j in range(returns.n_columns)
        ]
        track(*_write_table1(out, stats, tests))

        stage = "var"
        q = config.q if config.q is not None else select_lag_sbic(returns, config.q_max)
        fit = fit_var(returns, q)
        hac = newey_west_cov(fit)
        lc = hansen_lc(fit)
        track(*_write_table2(out, fit, hac.se, lc))

        stage = "tvvar"
        tv_fit = solve_tvvar(returns, q=q, lam=config.lam)
        raw_path = tv_efficiency_path(tv_fit)
        p_tv = out / "tvvar_zeta.csv"
        write_zeta_csv(p_tv, raw_path)
        track(p_tv)

        stage = "bootstrap"
        ep = bootstrap_bands(returns, config.bootstrap_spec(q), pretested=True)
        p_z = out / "zeta_path.csv"
        write_zeta_csv(p_z, ep)
        p_zj = out / "zeta_path.json"
        _write_zeta_json(p_zj, ep)
        track(p_z, p_zj)
        track(*plot_data(ep, out))

        stage = "segments"
        segments = classify_segments(ep, min_run=config.min_run)
        track(_write_segments(out, segments))
        summary = regime_volatility(ep, config.breakpoints)
        track(_write_regimes(out, summary))

        stage = "report"
        p_rep = out / "report.txt"
        p_rep.write_text(emit_report(out), encoding="utf-8")
        track(p_rep)

        p_man = out / "run_manifest.json"
        _write_json(p_man, {"config": asdict(config), "versions": _versions()})
        track(p_man)
    except (DataError, NumericalError, OSError) as exc:
        for p in written:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass
        raise StageError(stage, exc) from exc

    return PipelineResult(artifacts=written, q=q, path=ep, segments=segments)
