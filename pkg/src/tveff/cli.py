"""Command-line interface.

Subcommands mirror the pipeline stages so the chain

    ingest -> stats -> unitroot -> var -> tvvar -> bootstrap -> segments -> report

writes the same artifacts as a single ``run``.  Stages that need the VAR
order re-select it by the Schwarz criterion when ``--q`` is omitted,
which reproduces the single-shot choice exactly.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, NumericalError
from .inference import classify_segments, regime_volatility
from .pipeline import (
    PipelineConfig,
    StageError,
    _write_json,
    _write_prices_csv,
    _write_segments,
    _write_regimes,
    _write_table1,
    _write_table2,
    _write_zeta_json,
    emit_report,
    plot_data,
    read_returns_csv,
    read_zeta_csv,
    run_pipeline,
    write_returns_csv,
    write_zeta_csv,
)
from .series import CsvSchema, descriptive_stats, interpolate_missing, load_csv, log_returns
from .synth import ScenarioSpec, gen_returns
from .tvvar import solve_tvvar, tv_efficiency_path
from .unitroot import adf_gls
from .var import fit_var, hansen_lc, newey_west_cov, select_lag_sbic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage problems, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", "-o", default=".", help="artifact directory")


def _add_returns_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--returns", required=True, help="returns CSV (from the ingest step)")


def _add_order_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, default=None,
                   help="VAR order; omitted selects by SBIC up to --q-max")
    p.add_argument("--q-max", type=int, default=8, help="SBIC search bound")


def _resolve_q(args, returns) -> int:
    return args.q if args.q is not None else select_lag_sbic(returns, args.q_max)


def build_parser() -> _Parser:
    parser = _Parser(prog="tveff", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"tveff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a price CSV, repair gaps, write returns")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--date-column", default="date")
    p.add_argument("--price-columns", nargs="+", default=None)
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--no-interpolate", action="store_true")
    _add_io_args(p)

    p = sub.add_parser("stats", help="descriptive statistics of returns")
    _add_returns_arg(p)
    _add_io_args(p)

    p = sub.add_parser("unitroot", help="GLS-detrended ADF tests per column")
    _add_returns_arg(p)
    p.add_argument("--model", choices=["constant", "trend"], default="trend")
    p.add_argument("--k-max", type=int, default=None)
    _add_io_args(p)

    p = sub.add_parser("var", help="time-invariant VAR with robust errors")
    _add_returns_arg(p)
    _add_order_args(p)
    _add_io_args(p)

    p = sub.add_parser("tvvar", help="time-varying VAR efficiency path (no bands)")
    _add_returns_arg(p)
    _add_order_args(p)
    p.add_argument("--lam", type=float, default=1.0,
                   help="smoothness ratio (observation / coefficient noise)")
    p.add_argument("--coef-out", default=None,
                   help="optional long-format CSV of the coefficient paths")
    _add_io_args(p)

    p = sub.add_parser("bootstrap", help="efficiency path with bootstrap bands")
    _add_returns_arg(p)
    _add_order_args(p)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--replications", type=int, default=5000)
    p.add_argument("--coverage", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_io_args(p)

    p = sub.add_parser("segments", help="classify efficient/inefficient periods")
    p.add_argument("--zeta", required=True, help="zeta_path.csv with bands")
    p.add_argument("--min-run", type=int, default=20)
    p.add_argument("--breakpoints", nargs="*", default=[],
                   help="ISO dates starting new volatility regimes")
    _add_io_args(p)

    p = sub.add_parser("report", help="render the text report from artifacts")
    p.add_argument("--artifacts", default=".", help="directory holding the artifacts")
    p.add_argument("--out", default=None, help="write to file instead of stdout")

    p = sub.add_parser("synth", help="generate a synthetic price CSV")
    p.add_argument("--kind", required=True,
                   choices=["iid", "constant-var", "sinusoidal-tv", "randomwalk-tv"])
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--sigma-eps", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=0.4)
    p.add_argument("--period", type=float, default=500.0)
    p.add_argument("--sigma-v", type=float, default=0.01)
    p.add_argument("--coeff", default=None,
                   help="JSON slope matrices with shape (q, n, n)")
    p.add_argument("--out", default="prices.csv")
    p.add_argument("--true-zeta", default=None,
                   help="optional CSV of the generator's efficiency degree")

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True,
                   help="JSON config (a run manifest is also accepted)")
    p.add_argument("--input", default=None, help="override input_path")
    p.add_argument("--output-dir", "-o", default=None, help="override output_dir")
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--coverage", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--min-run", type=int, default=None)

    return parser


def _cmd_ingest(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    schema = CsvSchema(
        date_column=args.date_column,
        price_columns=None if args.price_columns is None else tuple(args.price_columns),
        date_format=args.date_format,
    )
    prices = load_csv(args.input, schema)
    if not args.no_interpolate:
        prices = interpolate_missing(prices)
    elif prices.missing_mask.any():
        raise DataError("input has missing prices and interpolation is disabled")
    returns = log_returns(prices)
    _write_prices_csv(out / "prices_clean.csv", prices.dates, prices.prices, prices.labels)
    write_returns_csv(out / "returns.csv", returns)
    print(f"wrote {out / 'prices_clean.csv'} and {out / 'returns.csv'}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    returns = read_returns_csv(args.returns)
    stats = descriptive_stats(returns)
    (out / "stats.csv").write_text(stats.to_csv(), encoding="utf-8")
    (out / "stats.json").write_text(stats.to_json() + "\n", encoding="utf-8")
    print(f"wrote {out / 'stats.csv'}")
    return EXIT_OK


def _cmd_unitroot(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    returns = read_returns_csv(args.returns)
    stats = descriptive_stats(returns)
    tests = [
        adf_gls(returns.values[:, j], model=args.model, k_max=args.k_max)
        for j in range(returns.n_columns)
    ]
    _write_table1(out, stats, tests)
    for j, t in enumerate(tests):
        verdict = "rejects unit root at 1%" if t.rejects_at("1%") else "no rejection at 1%"
        print(f"{returns.labels[j]}: stat {t.statistic:.4f}, lags {t.selected_lag}, {verdict}")
    return EXIT_OK


def _cmd_var(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    returns = read_returns_csv(args.returns)
    q = _resolve_q(args, returns)
    fit = fit_var(returns, q)
    hac = newey_west_cov(fit)
    lc = hansen_lc(fit)
    _write_table2(out, fit, hac.se, lc)
    print(f"VAR({q}): Lc {lc.lc_statistic:.4f} (dof {lc.dof}), wrote {out / 'table2.csv'}")
    return EXIT_OK


def _cmd_tvvar(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    returns = read_returns_csv(args.returns)
    q = _resolve_q(args, returns)
    fit = solve_tvvar(returns, q=q, lam=args.lam)
    path = tv_efficiency_path(fit)
    write_zeta_csv(out / "tvvar_zeta.csv", path)
    if args.coef_out:
        _write_coef_paths(Path(args.coef_out), fit)
    print(f"TV-VAR({q}) lam={args.lam}: wrote {out / 'tvvar_zeta.csv'}")
    return EXIT_OK


def _write_coef_paths(path: Path, fit) -> None:
    import csv as _csv

    with path.open("w", encoding="utf-8", newline="") as f:
        w = _csv.writer(f, lineterminator="\n")
        w.writerow(["date", "lag", "equation", "regressor", "value"])
        dates = fit.dates if fit.dates is not None else np.arange(fit.nobs)
        for t in range(fit.nobs):
            for l in range(fit.q):
                for i, eq in enumerate(fit.labels):
                    for j, reg in enumerate(fit.labels):
                        w.writerow([str(dates[t]), l + 1, eq, reg,
                                    repr(float(fit.A_path[t, l, i, j]))])


def _cmd_bootstrap(args) -> int:
    from .inference import BootstrapSpec, bootstrap_bands

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    returns = read_returns_csv(args.returns)
    q = _resolve_q(args, returns)
    spec = BootstrapSpec(
        replications=args.replications,
        coverage=args.coverage,
        seed=args.seed,
        lam=args.lam,
        q=q,
        workers=args.workers,
    )
    ep = bootstrap_bands(returns, spec, pretested=True)
    write_zeta_csv(out / "zeta_path.csv", ep)
    _write_zeta_json(out / "zeta_path.json", ep)
    plot_data(ep, out)
    print(f"wrote {out / 'zeta_path.csv'} with {args.replications} replications")
    return EXIT_OK


def _cmd_segments(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ep = read_zeta_csv(args.zeta)
    segments = classify_segments(ep, min_run=args.min_run)
    _write_segments(out, segments)
    summary = regime_volatility(ep, args.breakpoints)
    _write_regimes(out, summary)
    print(f"wrote {out / 'segments.csv'} ({len(segments)} segments)")
    return EXIT_OK


def _cmd_report(args) -> int:
    text = emit_report(args.artifacts)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_synth(args) -> int:
    coeff = None
    if args.coeff is not None:
        try:
            coeff = np.asarray(json.loads(args.coeff), dtype=np.float64)
        except (json.JSONDecodeError, ValueError) as exc:
            raise DataError(f"--coeff must be JSON matrices: {exc}") from exc
    spec = ScenarioSpec(
        kind=args.kind,
        T=args.T,
        n=args.n,
        q=args.q,
        sigma_eps=args.sigma_eps,
        seed=args.seed,
        coeff=coeff,
        amplitude=args.amplitude,
        period=args.period,
        sigma_v=args.sigma_v,
    )
    returns, path = gen_returns(spec)
    # prices that reproduce the generated returns under the ingest step
    levels = 100.0 * np.exp(np.concatenate(
        [np.zeros((1, returns.n_columns)), np.cumsum(returns.values, axis=0)]
    ))
    dates = np.concatenate([[returns.dates[0] - np.timedelta64(1, "D")], returns.dates])
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    _write_prices_csv(out, dates, levels, returns.labels)
    print(f"wrote {out} ({spec.kind}, T={spec.T}, n={spec.n}, seed={spec.seed})")
    if args.true_zeta:
        from .synth import true_zeta_path

        zeta = true_zeta_path(path)
        rows = ["date,zeta"]
        for i in range(len(returns)):
            z = zeta[i]
            rows.append(f"{returns.dates[i]},{repr(float(z)) if np.isfinite(z) else ''}")
        Path(args.true_zeta).write_text("\n".join(rows) + "\n", encoding="utf-8")
        print(f"wrote {args.true_zeta}")
    return EXIT_OK


def _cmd_run(args) -> int:
    config = PipelineConfig.from_json(args.config)
    overrides = {
        "input_path": args.input,
        "output_dir": args.output_dir,
        "q": args.q,
        "lam": args.lam,
        "replications": args.replications,
        "coverage": args.coverage,
        "seed": args.seed,
        "workers": args.workers,
        "min_run": args.min_run,
    }
    updates = {k: v for k, v in overrides.items() if v is not None}
    if updates:
        merged = asdict(config)
        merged.update(updates)
        config = PipelineConfig.from_dict(merged)
    result = run_pipeline(config)
    print(f"pipeline complete: VAR({result.q}), {len(result.segments)} segments, "
          f"{len(result.artifacts)} artifacts in {config.output_dir}")
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "unitroot": _cmd_unitroot,
    "var": _cmd_var,
    "tvvar": _cmd_tvvar,
    "bootstrap": _cmd_bootstrap,
    "segments": _cmd_segments,
    "report": _cmd_report,
    "synth": _cmd_synth,
    "run": _cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        inner = exc.original
        return EXIT_NUMERICAL if isinstance(inner, NumericalError) else EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
