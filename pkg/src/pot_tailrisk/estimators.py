"""scikit-learn style estimators over the functional API.

The estimators take a 1-D array of severities (or a column vector, or a
:class:`~pot_tailrisk.catalog.SeverityCatalog`) and expose their fitted
state through trailing-underscore attributes, so they work with
``sklearn.base.clone``, ``get_params`` and ``set_params``::

    est = GeneralizedParetoTail(threshold=10).fit(severities)
    est.xi_, est.sigma_, est.event_probability(2749)
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .catalog import SeverityCatalog, exceedances, tail_count
from .diagnostics import qq_points
from .distributions import DiscretePowerLawParams, dpl_cdf, gpd_cdf, gpd_logpdf, gpd_quantile
from .fitting import PowerLawFit, fit_dpl_alpha, fit_gpd, ks_statistic, powerlaw_reduction_stat, select_xmin_ks
from .rare_event import EventProbabilityInput, dpl_event_probability, event_probability

__all__ = ["check_severities", "GeneralizedParetoTail", "DiscretePowerLawTail"]


def check_severities(X) -> SeverityCatalog:
    """Validate severities and wrap them as a :class:`SeverityCatalog`."""
    if isinstance(X, SeverityCatalog):
        return X
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column of severities, got shape {arr.shape}")
        arr = arr[:, 0]
    return SeverityCatalog(arr)


class GeneralizedParetoTail(BaseEstimator):
    """Peaks-over-threshold GPD tail model.

    Parameters
    ----------
    threshold : float
        Lower bound ``mu``; only severities strictly above it enter the fit.
    event_size : float
        Default event size for :meth:`event_probability`.

    Attributes
    ----------
    fit_ : GpdFit
    sigma_, xi_ : float
    n_tail_ : int
    tail_fraction_ : float
        Fraction of events above the threshold.
    n_events_ : int
    reduction_stat_ : float
        ``sigma_ - threshold * xi_``.
    """

    def __init__(self, threshold: float = 10.0, event_size: float = 2749.0):
        self.threshold = threshold
        self.event_size = event_size

    def fit(self, X, y=None):
        catalog = check_severities(X)
        tail = exceedances(catalog, self.threshold)
        self.fit_ = fit_gpd(tail, self.threshold)
        self.sigma_ = self.fit_.sigma
        self.xi_ = self.fit_.xi
        self.n_tail_, self.tail_fraction_ = tail_count(catalog, self.threshold)
        self.n_events_ = catalog.n
        self.converged_ = self.fit_.converged
        self.log_likelihood_ = self.fit_.log_likelihood
        self.reduction_stat_ = powerlaw_reduction_stat(self.fit_)
        self.ks_statistic_ = ks_statistic(tail, lambda v: gpd_cdf(v, self.fit_.params))
        self.exceedances_ = tail
        return self

    def event_probability(self, y: Optional[float] = None, n: Optional[int] = None) -> float:
        check_is_fitted(self, "fit_")
        inp = EventProbabilityInput(
            self.event_size if y is None else y,
            self.n_events_ if n is None else n,
            1.0 - self.tail_fraction_,
            self.fit_,
        )
        return event_probability(inp)

    def tail_cdf(self, y):
        check_is_fitted(self, "fit_")
        return gpd_cdf(y, self.fit_.params)

    def quantile(self, q):
        check_is_fitted(self, "fit_")
        return gpd_quantile(q, self.fit_.params)

    def score_samples(self, X):
        """GPD log-density of each exceedance in ``X``; values at or below the threshold are dropped."""
        check_is_fitted(self, "fit_")
        y = np.asarray(check_severities(X).severities)
        return np.atleast_1d(gpd_logpdf(y[y > self.threshold], self.fit_.params))

    def score(self, X, y=None) -> float:
        return float(np.mean(self.score_samples(X)))

    def qq_points(self, X=None) -> np.ndarray:
        check_is_fitted(self, "fit_")
        tail = self.exceedances_ if X is None else exceedances(check_severities(X), self.threshold)
        return qq_points(self.fit_, tail)


class DiscretePowerLawTail(BaseEstimator):
    """Discrete power law above ``xmin``.

    Parameters
    ----------
    xmin : int or "ks"
        Fixed lower cutoff, or ``"ks"`` to choose it from ``xmin_grid`` by
        minimum Kolmogorov-Smirnov distance.
    xmin_grid : sequence of int, optional
        Candidates for ``xmin="ks"``; defaults to 1..200.
    event_size : float
    """

    def __init__(self, xmin="ks", xmin_grid=None, event_size: float = 2749.0):
        self.xmin = xmin
        self.xmin_grid = xmin_grid
        self.event_size = event_size

    def fit(self, X, y=None):
        catalog = check_severities(X)
        data = catalog.sorted_severities
        if self.xmin == "ks":
            grid = range(1, 201) if self.xmin_grid is None else self.xmin_grid
            self.fit_ = select_xmin_ks(data, grid)
        else:
            xmin = int(self.xmin)
            tail = data[np.searchsorted(data, xmin, side="left"):]
            params = DiscretePowerLawParams(fit_dpl_alpha(tail, xmin), xmin)
            ks = ks_statistic(tail, lambda v: dpl_cdf(v, params), discrete=True)
            self.fit_ = PowerLawFit(params, int(tail.size), ks)
        self.alpha_ = self.fit_.alpha
        self.xmin_ = self.fit_.xmin
        self.n_tail_ = self.fit_.n_tail
        self.tail_fraction_ = self.n_tail_ / catalog.n
        self.n_events_ = catalog.n
        self.ks_statistic_ = self.fit_.ks_statistic
        return self

    def event_probability(self, y: Optional[float] = None, n: Optional[int] = None) -> float:
        check_is_fitted(self, "fit_")
        return dpl_event_probability(
            self.fit_.params,
            self.tail_fraction_,
            self.event_size if y is None else y,
            self.n_events_ if n is None else n,
        )
