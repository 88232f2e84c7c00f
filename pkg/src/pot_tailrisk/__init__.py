"""Peaks-over-threshold tail risk for event-severity catalogs."""

__version__ = "0.1.0"

from .bootstrap import BootstrapSummary, bootstrap_estimate, percentile_interval, resample
from .catalog import (
    EventRecord,
    ExclusionRule,
    SeverityCatalog,
    exceedances,
    exclude,
    parse_catalog,
    read_catalog,
    serialize_catalog,
    tail_count,
)
from .diagnostics import MrlCurve, SweepRow, dpl_sweep, mrl_curve, qq_points, threshold_sweep
from .distributions import (
    DiscretePowerLawParams,
    GpdParams,
    dpl_cdf,
    dpl_pmf,
    gpd_cdf,
    gpd_quantile,
    gpd_sample,
    gpd_sf,
    gpd_support_upper,
    hurwitz_zeta,
    pareto_cdf,
)
from .estimators import DiscretePowerLawTail, GeneralizedParetoTail
from .fitting import GpdFit, PowerLawFit, fit_dpl_alpha, fit_gpd, ks_statistic, powerlaw_reduction_stat, select_xmin_ks
from .rare_event import EventProbabilityInput, event_probability, per_event_cdf
