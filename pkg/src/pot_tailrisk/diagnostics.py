"""Threshold-choice diagnostics: mean residual life, qq points, sweeps.

Sweep bootstraps resample the full catalog and re-apply each threshold,
so the tail size and the body fraction vary together across replicates.
All thresholds of one sweep share the same replicate catalogs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from .bootstrap import BootstrapSummary, bootstrap_vector
from .catalog import CatalogError, SeverityCatalog, exceedances, tail_count
from .distributions import DiscretePowerLawParams, dpl_cdf, gpd_cdf, gpd_quantile
from .fitting import FitError, GpdFit, PowerLawFit, fit_dpl_alpha, fit_gpd, ks_statistic, powerlaw_reduction_stat
from .rare_event import EventProbabilityInput, dpl_event_probability, event_probability

__all__ = [
    "MRL_LEVEL",
    "DiagnosticsWarning",
    "InsufficientDataError",
    "MrlCurve",
    "SweepRow",
    "PowerLawSweepRow",
    "default_grid",
    "mrl_curve",
    "qq_points",
    "threshold_sweep",
    "dpl_sweep",
]

MRL_LEVEL = 0.90
GPD_QUANTITIES = ("xi", "sigma", "reduction_stat", "prob_event")
DPL_QUANTITIES = ("alpha", "prob_event")


class DiagnosticsWarning(UserWarning):
    pass


class InsufficientDataError(CatalogError):
    pass


@dataclass(frozen=True)
class MrlCurve:
    thresholds: np.ndarray
    mean_excess: np.ndarray
    ci_half_width: np.ndarray
    n_exceed: np.ndarray

    @property
    def lo(self) -> np.ndarray:
        return self.mean_excess - self.ci_half_width

    @property
    def hi(self) -> np.ndarray:
        return self.mean_excess + self.ci_half_width


def default_grid(lo: float = 10.0, hi: float = 100.0, count: int = 19) -> np.ndarray:
    return np.linspace(lo, hi, count)


def mrl_curve(catalog: SeverityCatalog, grid: Sequence[float]) -> MrlCurve:
    """Empirical mean excess ``mean(y - u | y > u)`` with a 90% normal band.

    Grid points with fewer than two exceedances are dropped with a
    :class:`DiagnosticsWarning`.
    """
    grid = np.sort(np.asarray(grid, dtype=float).ravel())
    if grid.size == 0:
        raise InsufficientDataError("empty threshold grid")
    y = catalog.sorted_severities
    z = norm.ppf(0.5 + MRL_LEVEL / 2)
    rows = []
    dropped = []
    for u in grid:
        exc = y[np.searchsorted(y, u, side="right"):] - u
        if exc.size < 2:
            dropped.append(u)
            continue
        rows.append((u, exc.mean(), z * exc.std(ddof=1) / math.sqrt(exc.size), exc.size))
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} threshold(s) with fewer than 2 exceedances (from {dropped[0]:g})",
            DiagnosticsWarning,
            stacklevel=2,
        )
    if not rows:
        raise InsufficientDataError("no threshold in the grid has 2 or more exceedances")
    u, m, h, k = map(np.array, zip(*rows))
    return MrlCurve(u.astype(float), m.astype(float), h.astype(float), k.astype(int))


def qq_points(fit: GpdFit, exceedances_: Sequence[float]) -> np.ndarray:
    """``(n, 2)`` array of (model quantile at ``(i - 0.5)/n``, i-th order statistic)."""
    y = np.sort(np.asarray(exceedances_, dtype=float).ravel())
    n = y.size
    q = (np.arange(1, n + 1) - 0.5) / n
    return np.column_stack([np.atleast_1d(gpd_quantile(q, fit.params)), y])


@dataclass
class SweepRow:
    mu: float
    n_tail: int
    tail_fraction: float
    fit: Optional[GpdFit]
    reduction_stat: float = math.nan
    ks: float = math.nan
    prob_event: float = math.nan
    intervals: dict = field(default_factory=dict)
    n_failed: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.fit is not None and self.fit.converged


@dataclass
class PowerLawSweepRow:
    xmin: int
    n_tail: int
    tail_fraction: float
    fit: Optional[PowerLawFit]
    prob_event: float = math.nan
    intervals: dict = field(default_factory=dict)
    n_failed: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.fit is not None


def _gpd_point(catalog: SeverityCatalog, mu: float, y: float, n: Optional[int]):
    tail = exceedances(catalog, mu)
    fit = fit_gpd(tail, mu)
    count, frac = tail_count(catalog, mu)
    n_events = catalog.n if n is None else n
    prob = event_probability(EventProbabilityInput(y, n_events, 1.0 - frac, fit))
    return tail, fit, frac, prob


class _GpdSweepEstimator:
    # Module-level class so replicate workers can pickle it.
    def __init__(self, grid, y, n):
        self.grid = grid
        self.y = y
        self.n = n

    def __call__(self, catalog: SeverityCatalog) -> np.ndarray:
        out = np.full((len(self.grid), len(GPD_QUANTITIES)), np.nan)
        for j, mu in enumerate(self.grid):
            try:
                _, fit, _, prob = _gpd_point(catalog, mu, self.y, self.n)
            except (CatalogError, FitError, ValueError):
                continue
            if fit.converged:
                out[j] = (fit.xi, fit.sigma, powerlaw_reduction_stat(fit), prob)
        return out.ravel()


def _row_points(rows, values, width):
    out = []
    for r in rows:
        out.extend(values(r) if r.fit is not None else (math.nan,) * width)
    return out


def _attach(rows, names, summaries):
    k = len(names)
    for j, row in enumerate(rows):
        for q, name in enumerate(names):
            s: Optional[BootstrapSummary] = summaries[j * k + q]
            if s is None:
                row.intervals[name] = None
                row.n_failed[name] = None
            else:
                row.intervals[name] = (s.lo, s.hi)
                row.n_failed[name] = s.n_failed


def threshold_sweep(
    catalog: SeverityCatalog,
    grid: Sequence[float],
    event_size: float = 2749.0,
    replicates: int = 0,
    seed: int = 0,
    level: float = 0.90,
    n: Optional[int] = None,
    jobs: int = 1,
) -> list[SweepRow]:
    """GPD fit, reduction statistic, KS and event probability per threshold.

    Parameters
    ----------
    catalog : SeverityCatalog
    grid : sequence of float
        Thresholds ``mu``.
    event_size : float
        ``y`` in the event probability.
    replicates : int
        Bootstrap replicates; 0 skips intervals.
    seed : int
        Master seed shared by all thresholds.
    level : float
        Percentile interval coverage.
    n : int, optional
        Number of events for the probability; defaults to the catalog size.
    jobs : int
        Worker processes for the bootstrap.

    Returns
    -------
    list of SweepRow
        A threshold whose point fit fails is reported with ``fit=None`` and
        an ``error`` message instead of aborting the sweep.
    """
    grid = [float(u) for u in grid]
    rows = []
    for mu in grid:
        count, frac = tail_count(catalog, mu)
        try:
            tail, fit, frac, prob = _gpd_point(catalog, mu, event_size, n)
        except (CatalogError, FitError, ValueError) as exc:
            rows.append(SweepRow(mu, count, frac, None, error=f"{type(exc).__name__}: {exc}"))
            continue
        ks = ks_statistic(tail, lambda v, p=fit.params: gpd_cdf(v, p))
        rows.append(SweepRow(mu, count, frac, fit, powerlaw_reduction_stat(fit), ks, prob))
    if replicates > 0:
        point = _row_points(rows, lambda r: (r.fit.xi, r.fit.sigma, r.reduction_stat, r.prob_event), 4)
        summaries = bootstrap_vector(catalog, _GpdSweepEstimator(grid, event_size, n), replicates, level, seed, jobs,
                                     point=point)
        _attach(rows, GPD_QUANTITIES, summaries)
    return rows


def _dpl_point(catalog: SeverityCatalog, xmin: int, y: float, n: Optional[int]):
    x = catalog.sorted_severities
    tail = x[np.searchsorted(x, xmin, side="left"):]
    alpha = fit_dpl_alpha(tail, xmin)
    params = DiscretePowerLawParams(alpha, xmin)
    frac = tail.size / catalog.n
    prob = dpl_event_probability(params, frac, y, catalog.n if n is None else n)
    return tail, params, frac, prob


class _DplSweepEstimator:
    def __init__(self, grid, y, n):
        self.grid = grid
        self.y = y
        self.n = n

    def __call__(self, catalog: SeverityCatalog) -> np.ndarray:
        out = np.full((len(self.grid), len(DPL_QUANTITIES)), np.nan)
        for j, xmin in enumerate(self.grid):
            try:
                _, params, _, prob = _dpl_point(catalog, xmin, self.y, self.n)
            except (CatalogError, ValueError):
                continue
            out[j] = (params.alpha, prob)
        return out.ravel()


def dpl_sweep(
    catalog: SeverityCatalog,
    grid: Sequence[int],
    event_size: float = 2749.0,
    replicates: int = 0,
    seed: int = 0,
    level: float = 0.90,
    n: Optional[int] = None,
    jobs: int = 1,
) -> list[PowerLawSweepRow]:
    """Discrete power-law exponent and event probability for each fixed ``xmin``.

    Tails are ``{x >= xmin}``; arguments mirror :func:`threshold_sweep`.
    """
    grid = sorted({int(v) for v in grid})
    rows = []
    for xmin in grid:
        try:
            tail, params, frac, prob = _dpl_point(catalog, xmin, event_size, n)
        except (CatalogError, ValueError) as exc:
            x = catalog.sorted_severities
            count = int(x.size - np.searchsorted(x, xmin, side="left"))
            rows.append(PowerLawSweepRow(xmin, count, count / catalog.n, None, error=f"{type(exc).__name__}: {exc}"))
            continue
        ks = ks_statistic(tail, lambda v, p=params: dpl_cdf(v, p), discrete=True)
        rows.append(PowerLawSweepRow(xmin, int(tail.size), frac, PowerLawFit(params, int(tail.size), ks), prob))
    if replicates > 0:
        point = _row_points(rows, lambda r: (r.fit.alpha, r.prob_event), 2)
        summaries = bootstrap_vector(catalog, _DplSweepEstimator(grid, event_size, n), replicates, level, seed, jobs,
                                     point=point)
        _attach(rows, DPL_QUANTITIES, summaries)
    return rows
