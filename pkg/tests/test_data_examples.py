"""Qualitative checks on the RAND-MIPT catalog; skipped when the file is not configured."""
import numpy as np
import pytest

from pot_tailrisk.catalog import exceedances
from pot_tailrisk.diagnostics import qq_points, threshold_sweep
from pot_tailrisk.fitting import fit_gpd, select_xmin_ks

pytestmark = pytest.mark.data


def test_raw_catalog_has_single_largest_record(rand_mipt):
    raw, excluded = rand_mipt
    assert raw.n - excluded.n == 1
    assert raw.sorted_severities[-1] == 2749


def test_low_threshold_overestimates_upper_quantiles(rand_mipt):
    _, catalog = rand_mipt
    tail = exceedances(catalog, 10)
    pts = qq_points(fit_gpd(tail, 10), tail)
    assert np.all(pts[-5:, 0] > pts[-5:, 1])


def test_shape_falls_below_zero_by_mu_100(rand_mipt):
    _, catalog = rand_mipt
    rows = threshold_sweep(catalog, [10, 100])
    assert rows[0].fit.xi > 0.5
    assert rows[1].fit.xi < 0.05  # reference point estimate is -0.03


def test_probability_declines_across_sweep(rand_mipt):
    _, catalog = rand_mipt
    rows = threshold_sweep(catalog, range(10, 101, 10), n=13_274)
    probs = [r.prob_event for r in rows]
    assert probs[0] > 0.05 and probs[-1] < 1e-3


def test_ks_choice_of_xmin_is_near_ten(rand_mipt):
    _, catalog = rand_mipt
    fit = select_xmin_ks(catalog.severities, range(1, 201))
    assert 5 <= fit.xmin <= 20
