"""Time-varying VAR estimated as one penalized least-squares problem.

Slope coefficients follow independent random walks while the intercept
stays constant, so each equation solves

    min over (nu, beta_{1..m})  sum_t (y_t - nu - z_t' beta_t)^2
                                + lam^2 * sum_t ||beta_t - beta_{t-1}||^2

with z_t the stacked lagged returns and ``lam`` the ratio of observation
to coefficient-innovation noise.  The normal equations are block
tridiagonal with k = n*q sized blocks; they are factorized as a banded
Cholesky in O(m * k^3) time and O(m * k^2) memory per equation, with the
intercept folded in afterwards through Schur-complement bordering.  The
first period carries no extra prior, so initialization is diffuse: the
first smoothness term simply couples periods one and two.

Regressor components that are identically zero over the whole sample are
anchored at zero (a lam^2 weight on their initial state), which keeps the
system positive definite and yields the natural all-zero path for them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import DataError, NumericalError
from .series import ReturnMatrix

__all__ = [
    "StackedSystem",
    "TvVarFit",
    "EfficiencyPath",
    "build_stacked_system",
    "solve_tvvar",
    "tv_efficiency_path",
]

_COND_LIMIT = 1e12


@dataclass
class StackedSystem:
    """Per-equation normal equations in banded-plus-border form.

    ``band`` stores the lower band of the block-tridiagonal matrix M
    (scipy layout: band[i, j] = M[j+i, j]); ``border`` is the column
    coupling the states to the shared intercept, whose own diagonal
    entry is ``corner``.  Right-hand sides are per equation.
    """

    band: np.ndarray  # (k+1, m*k)
    border: np.ndarray  # (m*k,)
    corner: float
    rhs: np.ndarray  # (m*k, n)
    rhs_border: np.ndarray  # (n,)
    m: int
    k: int
    lam: float
    regressors: np.ndarray = field(repr=False)  # (m, k)
    targets: np.ndarray = field(repr=False)  # (m, n)

    def dense(self, equation: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Assemble the full bordered normal matrix and one equation's rhs.

        Unknown order: beta_1 .. beta_m, then the intercept.  Intended
        for small instances and reference checks.
        """
        N = self.m * self.k
        M = np.zeros((N + 1, N + 1))
        for i in range(self.band.shape[0]):
            for j in range(N - i):
                M[j + i, j] = self.band[i, j]
                M[j, j + i] = self.band[i, j]
        M[:N, N] = self.border
        M[N, :N] = self.border
        M[N, N] = self.corner
        b = np.concatenate([self.rhs[:, equation], [self.rhs_border[equation]]])
        return M, b


@dataclass
class TvVarFit:
    """Per-period VAR slopes with a constant intercept.

    ``A_path[t, l]`` is the lag-(l+1) coefficient matrix for fitted row
    t (rows start at the q+1-th observation), rows of each matrix
    indexing equations.
    """

    q: int
    nu: np.ndarray  # (n,)
    A_path: np.ndarray  # (m, q, n, n)
    lam: float
    residuals: np.ndarray  # (m, n)
    labels: tuple[str, ...]
    dates: np.ndarray | None  # (m,) datetime64 or None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_series(self) -> int:
        return self.nu.shape[0]

    @property
    def nobs(self) -> int:
        return self.A_path.shape[0]

    def smoothness(self) -> float:
        """Sum of squared coefficient increments along the path."""
        if self.nobs < 2:
            return 0.0
        return float(np.sum(np.diff(self.A_path, axis=0) ** 2))


@dataclass
class EfficiencyPath:
    """Efficiency-degree series with optional bootstrap bands.

    ``zeta`` is NaN at periods flagged numerically singular.  When bands
    are present, ``efficient_flag`` is False exactly where zeta falls
    outside [band_lower, band_upper] (flagged periods are also False:
    they certify nothing).
    """

    dates: np.ndarray  # (m,) datetime64 or integer positions
    zeta: np.ndarray  # (m,)
    flagged: np.ndarray  # (m,) bool: numerically singular periods
    band_lower: np.ndarray | None = None
    band_upper: np.ndarray | None = None
    efficient_flag: np.ndarray | None = None

    def __len__(self) -> int:
        return self.zeta.shape[0]

    @property
    def has_bands(self) -> bool:
        return self.band_lower is not None and self.band_upper is not None

    def with_bands(self, lower: np.ndarray, upper: np.ndarray) -> "EfficiencyPath":
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        if lower.shape != self.zeta.shape or upper.shape != self.zeta.shape:
            raise DataError("band shapes do not match the path")
        with np.errstate(invalid="ignore"):
            efficient = (self.zeta >= lower) & (self.zeta <= upper)
        efficient &= ~self.flagged
        return EfficiencyPath(
            dates=self.dates,
            zeta=self.zeta,
            flagged=self.flagged,
            band_lower=lower,
            band_upper=upper,
            efficient_flag=efficient,
        )


def _coerce_values(X: ReturnMatrix | np.ndarray) -> tuple[np.ndarray, tuple[str, ...], np.ndarray | None]:
    if isinstance(X, ReturnMatrix):
        return X.values, X.labels, X.dates
    values = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return values, tuple(f"x{j + 1}" for j in range(values.shape[1])), None


def build_stacked_system(X: ReturnMatrix | np.ndarray, q: int, lam: float) -> StackedSystem:
    """Assemble the penalized normal equations for every equation at once.

    The regressors are shared across equations, so a single band and
    border serve all right-hand sides.
    """
    values, _, _ = _coerce_values(X)
    T, n = values.shape
    if q < 1:
        raise DataError("q must be >= 1")
    if lam <= 0:
        raise DataError(f"lambda must be positive, got {lam}")
    m = T - q
    if m < 2:
        raise DataError(f"need at least q+2 observations, got T={T}")
    k = n * q

    Z = np.empty((m, k))
    for l in range(1, q + 1):
        Z[:, (l - 1) * n: l * n] = values[q - l: T - l]
    Y = values[q:]

    lam2 = lam * lam
    penalty_count = np.full(m, 2.0)
    penalty_count[0] = 1.0
    penalty_count[-1] = 1.0

    band = np.zeros((k + 1, m * k))
    diag = (Z * Z) + lam2 * penalty_count[:, None]
    zero_cols = ~np.any(Z != 0.0, axis=0)
    if zero_cols.any():
        diag[0, zero_cols] += lam2  # anchor data-free components at zero
    band[0] = diag.ravel()
    for i in range(1, k):
        within = np.zeros((m, k))
        within[:, : k - i] = Z[:, i:] * Z[:, : k - i]
        band[i] = within.ravel()
    cross = np.zeros((m, k))
    cross[: m - 1, :] = -lam2
    band[k] = cross.ravel()

    rhs = (Z[:, :, None] * Y[:, None, :]).reshape(m * k, n)
    return StackedSystem(
        band=band,
        border=Z.ravel().copy(),
        corner=float(m),
        rhs=rhs,
        rhs_border=Y.sum(axis=0),
        m=m,
        k=k,
        lam=lam,
        regressors=Z,
        targets=Y,
    )


def solve_tvvar(X: ReturnMatrix | np.ndarray, q: int, lam: float = 1.0) -> TvVarFit:
    """Fit the time-varying VAR by banded Cholesky with intercept bordering.

    Output is deterministic: identical inputs give bit-identical paths
    regardless of caller threading.
    """
    values, labels, dates = _coerce_values(X)
    T, n = values.shape
    if T - q < 5 * n * q:
        raise DataError(
            f"sample too short for TV-VAR: T-q={T - q} < 5*n*q={5 * n * q}"
        )
    system = build_stacked_system(values, q, lam)
    m, k = system.m, system.k

    t0 = time.perf_counter()
    try:
        factor = cholesky_banded(system.band, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "normal matrix is not positive definite "
            f"(m={m}, k={k}, lam={lam}); regressors may be collinear"
        ) from exc
    fdiag = factor[0]
    cond_est = float((fdiag.max() / fdiag.min()) ** 2)
    if not np.isfinite(cond_est) or cond_est > 1e30:
        raise NumericalError(f"normal matrix numerically singular (cond~{cond_est:.3e})")

    rhs_all = np.column_stack([system.rhs, system.border])
    sol = cho_solve_banded((factor, True), rhs_all)
    U, w = sol[:, :n], sol[:, n]

    denom = system.corner - float(system.border @ w)
    if denom <= 0:
        raise NumericalError("intercept Schur complement is not positive")
    nu = (system.rhs_border - system.border @ U) / denom
    beta = U - np.outer(w, nu)  # (m*k, n)

    path4 = beta.reshape(m, q, n, n)  # axes: period, lag, regressor col, equation
    A_path = np.transpose(path4, (0, 1, 3, 2)).copy()
    fitted = nu[None, :] + np.einsum("rk,rki->ri", system.regressors, beta.reshape(m, k, n))
    residuals = system.targets - fitted
    solve_seconds = time.perf_counter() - t0

    return TvVarFit(
        q=q,
        nu=nu,
        A_path=A_path,
        lam=lam,
        residuals=residuals,
        labels=labels,
        dates=None if dates is None else dates[q:].copy(),
        diagnostics={"condition_estimate": cond_est, "solve_seconds": solve_seconds},
    )


def zeta_from_coefficient_stack(A_stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Efficiency degree per period from a (m, q, n, n) coefficient stack.

    Periods where ``I - sum_l A_l`` is numerically singular are flagged
    and reported as NaN instead of aborting the whole path.
    """
    m, _, n, _ = A_stack.shape
    S = np.eye(n)[None, :, :] - A_stack.sum(axis=1)
    sv = np.linalg.svd(S, compute_uv=False)  # (m, n), descending
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = sv[:, 0] / sv[:, -1]
    flagged = ~np.isfinite(cond) | (cond > _COND_LIMIT)
    zeta = np.full(m, np.nan)
    ok = ~flagged
    if ok.any():
        phi = np.linalg.inv(S[ok])
        dev = phi - np.eye(n)[None, :, :]
        zeta[ok] = np.linalg.svd(dev, compute_uv=False)[:, 0]
    return zeta, flagged


def tv_efficiency_path(fit: TvVarFit) -> EfficiencyPath:
    """Per-period efficiency degree of a fitted time-varying VAR."""
    zeta, flagged = zeta_from_coefficient_stack(fit.A_path)
    dates = fit.dates if fit.dates is not None else np.arange(fit.nobs)
    return EfficiencyPath(dates=dates, zeta=zeta, flagged=flagged)
