"""Maximum-likelihood tail fits.

``fit_gpd`` estimates GPD scale and shape over exceedances of a fixed
threshold with a bounded Nelder-Mead simplex in ``(log sigma, xi)``,
multi-started, with infeasible parameters scored as likelihood ``-inf``.
``fit_dpl_alpha`` and ``select_xmin_ks`` fit the discrete power law used
as the comparison model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .catalog import CatalogError, InsufficientTailError
from .distributions import (
    XI_SWITCH,
    DiscretePowerLawParams,
    GpdParams,
    dpl_cdf,
    hurwitz_zeta,
)

__all__ = [
    "FitError",
    "DegenerateDataError",
    "GpdFit",
    "PowerLawFit",
    "gpd_loglik",
    "fit_gpd",
    "powerlaw_reduction_stat",
    "dpl_loglik",
    "fit_dpl_alpha",
    "ks_statistic",
    "select_xmin_ks",
]

XI_BOUNDS = (-5.0, 5.0)
XI_STARTS = (-0.2, 0.1, 0.5)
SIMPLEX_XATOL = 1e-8
MAX_ITER = 500
ALPHA_BOUNDS = (1.0 + 1e-9, 10.0)
MIN_KS_TAIL = 10


class FitError(ArithmeticError):
    """Numerical failure of an estimator."""


class DegenerateDataError(CatalogError):
    """All tail values equal; the likelihood has no interior maximum."""


@dataclass(frozen=True)
class GpdFit:
    params: GpdParams
    n_tail: int
    log_likelihood: float
    converged: bool
    optimizer_iterations: int

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def sigma(self) -> float:
        return self.params.sigma

    @property
    def xi(self) -> float:
        return self.params.xi


@dataclass(frozen=True)
class PowerLawFit:
    params: DiscretePowerLawParams
    n_tail: int
    ks_statistic: float

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def xmin(self) -> int:
        return self.params.xmin


def _excess_loglik(excess: np.ndarray, log_sigma: float, xi: float, max_excess: float) -> float:
    sigma = math.exp(log_sigma)
    t = excess / sigma
    n = excess.size
    if abs(xi) < XI_SWITCH:
        s = t.sum()
        return -n * log_sigma - s - xi * (s - 0.5 * np.dot(t, t))
    if 1.0 + xi * max_excess / sigma <= 0.0:
        return -math.inf
    return -n * log_sigma - (1.0 + 1.0 / xi) * float(np.log1p(xi * t).sum())


def gpd_loglik(exceedances, params: GpdParams) -> float:
    """GPD log-likelihood of ``exceedances``; ``-inf`` outside the support."""
    y = np.asarray(exceedances, dtype=float)
    excess = y - params.mu
    if np.any(excess < 0):
        return -math.inf
    return _excess_loglik(excess, math.log(params.sigma), params.xi, float(excess.max()))


def _tail_array(exceedances, mu: float) -> np.ndarray:
    y = np.asarray(exceedances, dtype=float).ravel()
    if y.size < 2:
        raise InsufficientTailError(f"need at least 2 exceedances, got {y.size}")
    if np.any(y <= mu):
        raise CatalogError(f"all exceedances must be > mu={mu:g}")
    if np.all(y == y[0]):
        raise DegenerateDataError("all exceedances are equal")
    return y


def fit_gpd(exceedances, mu: float) -> GpdFit:
    """GPD maximum-likelihood fit of ``sigma`` and ``xi`` for a fixed ``mu``.

    Three Nelder-Mead runs start from ``xi`` in (-0.2, 0.1, 0.5) with
    ``sigma`` at the mean excess (raised where needed so every start is
    feasible). Each run stops once the simplex spans less than 1e-8 in
    ``(log sigma, xi)`` or after 500 iterations. The best converged run
    is kept.

    Parameters
    ----------
    exceedances : array-like
        Values strictly above ``mu``; at least two, not all equal.
    mu : float
        Threshold, taken as the GPD lower bound.

    Returns
    -------
    GpdFit
        ``converged`` is False when no run met the tolerance or the shape
        estimate sits on the ``[-5, 5]`` box.
    """
    y = _tail_array(exceedances, mu)
    excess = y - mu
    max_excess = float(excess.max())
    mean_excess = float(excess.mean())

    def objective(theta):
        return -_excess_loglik(excess, theta[0], theta[1], max_excess)

    runs = []
    for xi0 in XI_STARTS:
        sigma0 = mean_excess if xi0 >= 0 else max(mean_excess, -xi0 * max_excess * 1.1)
        theta0 = np.array([math.log(sigma0), xi0])
        simplex = np.array([theta0, theta0 + [0.1, 0.0], theta0 + [0.0, 0.1]])
        res = minimize(
            objective,
            theta0,
            method="Nelder-Mead",
            bounds=[(None, None), XI_BOUNDS],
            options={
                "initial_simplex": simplex,
                "xatol": SIMPLEX_XATOL,
                "fatol": math.inf,
                "maxiter": MAX_ITER,
                "maxfev": 4 * MAX_ITER,
            },
        )
        ll = -float(res.fun)
        on_box = min(abs(res.x[1] - b) for b in XI_BOUNDS) < 1e-6
        ok = res.status == 0 and math.isfinite(ll) and not on_box
        runs.append((ok, ll, res))

    good = [r for r in runs if r[0]]
    pool = good if good else runs
    ok, ll, res = max(pool, key=lambda r: r[1])
    if not math.isfinite(ll):
        raise FitError(f"no feasible GPD fit found at mu={mu:g}")
    params = GpdParams(mu=float(mu), sigma=math.exp(res.x[0]), xi=float(res.x[1]))
    return GpdFit(params, int(y.size), ll, bool(ok), int(res.nit))


def powerlaw_reduction_stat(fit: GpdFit) -> float:
    """``sigma - mu * xi``; zero when the GPD tail is a continuous power law."""
    return fit.sigma - fit.mu * fit.xi


def dpl_loglik(alpha: float, n: int, sum_log: float, xmin: int) -> float:
    return -n * math.log(hurwitz_zeta(alpha, xmin)) - alpha * sum_log


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-7) -> float:
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (a + b) / 2


def fit_dpl_alpha(tail, xmin: int) -> float:
    """MLE of the discrete power-law exponent on ``alpha in (1, 10]``."""
    x = np.asarray(tail, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientTailError(f"need at least 2 tail values, got {x.size}")
    if np.any(x < xmin):
        raise CatalogError(f"tail values must be >= xmin={xmin}")
    if np.all(x == x[0]):
        raise DegenerateDataError("all tail values are equal")
    n = x.size
    sum_log = float(np.log(x).sum())
    return _golden_max(lambda a: dpl_loglik(a, n, sum_log, xmin), *ALPHA_BOUNDS)


def ks_statistic(tail, cdf: Callable[[np.ndarray], np.ndarray], discrete: bool = False) -> float:
    """Kolmogorov-Smirnov distance between the sample and ``cdf``.

    Evaluated at the observations. The continuous form is the max over
    sorted ``y_i`` of ``|i/n - F(y_i)|`` and ``|(i-1)/n - F(y_i)|``.

    With ``discrete=True`` the sample and ``cdf`` are both step functions
    on the integers, and the distance is ``max |S(y) - F(y)|`` over the
    distinct observed values, ``S`` being the empirical CDF. Applying the
    continuous form to tied data would charge the whole probability mass
    of a tied value as a deviation.
    """
    y = np.sort(np.asarray(tail, dtype=float).ravel())
    n = y.size
    if n == 0:
        raise ValueError("ks_statistic needs a nonempty sample")
    if discrete:
        values, counts = np.unique(y, return_counts=True)
        F = np.asarray(cdf(values), dtype=float)
        return float(np.max(np.abs(np.cumsum(counts) / n - F)))
    F = np.asarray(cdf(y), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))


def select_xmin_ks(data, grid: Iterable[int], min_tail: int = MIN_KS_TAIL) -> PowerLawFit:
    """Choose ``xmin`` from ``grid`` minimizing the KS distance of the fitted tail.

    For each candidate the tail is ``{x >= xmin}``; candidates leaving
    fewer than ``min_tail`` points are skipped. Ties go to the smaller
    ``xmin``.
    """
    x = np.sort(np.asarray(data, dtype=float).ravel())
    best = None
    for xmin in sorted({int(v) for v in grid}):
        tail = x[np.searchsorted(x, xmin, side="left"):]
        if tail.size < min_tail:
            continue
        try:
            alpha = fit_dpl_alpha(tail, xmin)
        except DegenerateDataError:
            continue
        params = DiscretePowerLawParams(alpha, xmin)
        d = ks_statistic(tail, lambda v: dpl_cdf(v, params), discrete=True)
        if best is None or d < best.ks_statistic:
            best = PowerLawFit(params, int(tail.size), d)
    if best is None:
        raise InsufficientTailError(f"no xmin candidate leaves {min_tail} or more tail points")
    return best
