"""Residual-bootstrap confidence bands and efficiency classification.

Bands are built under the null that every time-varying slope is zero:
pseudo-samples add the sample mean back to return vectors resampled
jointly with replacement (joint resampling keeps the contemporaneous
cross-correlation intact).  Each replication re-runs the full
time-varying fit, intercept included, and the per-period efficiency
degrees are reduced to equal-tail empirical quantiles.

Replications draw from streams pre-assigned by spawning the master seed,
and results are aggregated by replication index, so serial and threaded
runs produce bit-identical bands.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series import ReturnMatrix
from .tvvar import EfficiencyPath, solve_tvvar, tv_efficiency_path, zeta_from_coefficient_stack

__all__ = [
    "BootstrapSpec",
    "RegimeSummary",
    "Segment",
    "bootstrap_bands",
    "classify_segments",
    "regime_volatility",
]


@dataclass
class BootstrapSpec:
    """Settings for the efficiency-degree bootstrap.

    Whole return vectors are the resampling unit.  ``workers`` > 1 runs
    replications on a thread pool without changing any output bit.
    """

    replications: int = 5000
    coverage: float = 0.95
    seed: int = 0
    lam: float = 1.0
    q: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise DataError(f"replications must be >= 100, got {self.replications}")
        if not 0.0 < self.coverage < 1.0:
            raise DataError(f"coverage must be in (0, 1), got {self.coverage}")
        if self.lam <= 0:
            raise DataError("lam must be positive")
        if self.q < 1:
            raise DataError("q must be >= 1")
        if self.workers < 1:
            raise DataError("workers must be >= 1")

    def band_order_statistics(self) -> tuple[int, int]:
        """1-based order statistics (lower, upper) of the per-period bands.

        With B replications and tail mass a = (1-coverage)/2 these are
        floor(B*a) and B - floor(B*a); B*a must be at least 5 so the
        requested tails are resolvable.
        """
        tail = self.replications * (1.0 - self.coverage) / 2.0
        if tail < 5.0:
            raise DataError(
                "too few replications for the requested coverage: "
                f"B*(1-coverage)/2 = {tail:.3f} < 5"
            )
        k_lo = int(np.floor(tail))
        return k_lo, self.replications - k_lo


@dataclass
class Segment:
    """One maximal run of equal efficiency classification."""

    start: object  # date label of the first period
    end: object  # date label of the last period (inclusive)
    label: str  # "efficient" | "inefficient"
    start_index: int
    end_index: int
    mean_zeta: float


@dataclass
class RegimeSummary:
    """Volatility of the efficiency degree inside breakpoint-defined regimes."""

    breakpoints: list
    starts: list
    ends: list
    sd: np.ndarray  # sample SD of zeta per regime
    efficient_share: np.ndarray
    counts: np.ndarray


def _null_zeta_paths(
    values: np.ndarray, spec: BootstrapSpec
) -> np.ndarray:
    """(B, m) efficiency degrees of null-resampled pseudo-samples."""
    T, n = values.shape
    mean = values.mean(axis=0)
    centered = values - mean
    streams = np.random.SeedSequence(spec.seed).spawn(spec.replications)
    m = T - spec.q
    zstar = np.empty((spec.replications, m))

    def one(b: int) -> None:
        rng = np.random.default_rng(streams[b])
        idx = rng.integers(0, T, size=T)
        pseudo = mean[None, :] + centered[idx]
        fit = solve_tvvar(pseudo, q=spec.q, lam=spec.lam)
        zeta, _ = zeta_from_coefficient_stack(fit.A_path)
        zstar[b] = zeta

    if spec.workers == 1:
        for b in range(spec.replications):
            one(b)
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            list(pool.map(one, range(spec.replications)))
    return zstar


def bootstrap_bands(
    X: ReturnMatrix | np.ndarray,
    spec: BootstrapSpec,
    pretested: bool = False,
) -> EfficiencyPath:
    """Efficiency path of ``X`` with equal-tail null bands attached.

    ``pretested=False`` warns that stationarity was not checked first.
    A zero-variance input yields the degenerate all-zero path with
    zero-width bands rather than an error.
    """
    if not pretested:
        warnings.warn(
            "returns were not stationarity-pretested; run the unit-root test first",
            UserWarning,
            stacklevel=2,
        )
    k_lo, k_hi = spec.band_order_statistics()

    if isinstance(X, ReturnMatrix):
        values = X.values
    else:
        values = np.atleast_2d(np.asarray(X, dtype=np.float64))
        X = ReturnMatrix(
            dates=np.datetime64("2000-01-03") + np.arange(values.shape[0]),
            values=values,
            labels=tuple(f"x{j + 1}" for j in range(values.shape[1])),
        )

    fit = solve_tvvar(X, q=spec.q, lam=spec.lam)
    path = tv_efficiency_path(fit)

    zstar = _null_zeta_paths(values, spec)
    zsorted = np.sort(zstar, axis=0)
    lower = zsorted[k_lo - 1]
    upper = zsorted[k_hi - 1]
    return path.with_bands(lower, upper)


def classify_segments(path: EfficiencyPath, min_run: int = 20) -> list[Segment]:
    """Maximal efficient/inefficient runs with short runs absorbed.

    Runs shorter than ``min_run`` merge into the run on their left (the
    first run, having no left neighbour, merges rightward); merged
    neighbours coalesce and the scan restarts, so the result is
    deterministic.  Flagged (NaN) periods count as not-efficient.
    """
    if not path.has_bands or path.efficient_flag is None:
        raise DataError("path has no bands; run bootstrap_bands first")
    if min_run < 1:
        raise DataError("min_run must be >= 1")
    flags = np.asarray(path.efficient_flag, dtype=bool)
    if flags.size == 0:
        return []

    runs: list[tuple[bool, int, int]] = []  # (flag, start, end) inclusive
    start = 0
    for i in range(1, flags.size):
        if flags[i] != flags[start]:
            runs.append((bool(flags[start]), start, i - 1))
            start = i
    runs.append((bool(flags[start]), start, flags.size - 1))

    def run_length(r: tuple[bool, int, int]) -> int:
        return r[2] - r[1] + 1

    changed = True
    while changed and len(runs) > 1:
        changed = False
        for i, run in enumerate(runs):
            if run_length(run) >= min_run:
                continue
            if i > 0:
                absorbed = (runs[i - 1][0], runs[i - 1][1], run[2])
                runs[i - 1: i + 1] = [absorbed]
            else:
                absorbed = (runs[1][0], run[1], runs[1][2])
                runs[0:2] = [absorbed]
            # coalesce equal-label neighbours created by the merge
            j = 0
            while j + 1 < len(runs):
                if runs[j][0] == runs[j + 1][0]:
                    runs[j: j + 2] = [(runs[j][0], runs[j][1], runs[j + 1][2])]
                else:
                    j += 1
            changed = True
            break

    segments = []
    for flag, s, e in runs:
        zeta_slice = path.zeta[s: e + 1]
        finite = zeta_slice[np.isfinite(zeta_slice)]
        segments.append(
            Segment(
                start=path.dates[s],
                end=path.dates[e],
                label="efficient" if flag else "inefficient",
                start_index=s,
                end_index=e,
                mean_zeta=float(finite.mean()) if finite.size else float("nan"),
            )
        )
    return segments


def regime_volatility(path: EfficiencyPath, breakpoints: list) -> RegimeSummary:
    """Sample SD of the efficiency degree between breakpoints.

    A breakpoint date starts a new regime; regimes partition the sample
    as [start, b1), [b1, b2), ..., [bk, end].  A breakpoint at the very
    first date simply starts regime one there, so k breakpoints name k
    regimes; otherwise the stretch before b1 is its own regime.  Empty
    regimes are rejected.
    """
    dates = np.asarray(path.dates)
    if dates.dtype.kind == "M":
        bps = np.array([np.datetime64(b, "D") for b in breakpoints], dtype="datetime64[D]")
    else:
        bps = np.asarray(breakpoints, dtype=dates.dtype)
    if bps.size and not (np.diff(bps) > np.timedelta64(0, "D") if bps.dtype.kind == "M"
                         else np.diff(bps) > 0).all():
        raise DataError("breakpoints must be strictly increasing")
    for b in bps:
        if b < dates[0] or b > dates[-1]:
            raise DataError(f"breakpoint {b} outside the sample")

    if bps.size and bps[0] == dates[0]:
        edges = np.concatenate([bps, [dates[-1]]])
    else:
        edges = np.concatenate([[dates[0]], bps, [dates[-1]]])
    starts, ends, sds, shares, counts = [], [], [], [], []
    for r in range(len(edges) - 1):
        lo, hi = edges[r], edges[r + 1]
        if r == len(edges) - 2:
            sel = (dates >= lo) & (dates <= hi)
        else:
            sel = (dates >= lo) & (dates < hi)
        if not sel.any():
            raise DataError(f"regime {r + 1} is empty")
        zeta = path.zeta[sel]
        finite = zeta[np.isfinite(zeta)]
        if finite.size == 0:
            raise DataError(f"regime {r + 1} has no defined efficiency values")
        sds.append(float(finite.std(ddof=1)) if finite.size > 1 else 0.0)
        if path.efficient_flag is not None:
            shares.append(float(np.mean(path.efficient_flag[sel])))
        else:
            shares.append(float("nan"))
        counts.append(int(sel.sum()))
        starts.append(dates[sel][0])
        ends.append(dates[sel][-1])
    return RegimeSummary(
        breakpoints=list(bps),
        starts=starts,
        ends=ends,
        sd=np.asarray(sds),
        efficient_share=np.asarray(shares),
        counts=np.asarray(counts),
    )
