import functools
import os
import time
from pathlib import Path

import numpy as np
import pytest

from pot_tailrisk.catalog import ExclusionRule, SeverityCatalog, exclude, read_catalog
from pot_tailrisk.distributions import GpdParams, gpd_sample

DATA_ENV = "POT_TAILRISK_DATA"
DATA_FORMAT_ENV = "POT_TAILRISK_DATA_FORMAT"

_ACCEPTANCE_LINES: list[str] = []
_SESSION_START = time.perf_counter()
SUITE_BUDGET_S = 180.0


def record_acceptance(criterion: str, status: str, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"[{status}] {criterion}" + (f": {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _SESSION_START
    status = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"[{status}] 6 full suite runtime: {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


@functools.lru_cache(maxsize=None)
def load_rand_mipt():
    """(raw, excluded) RAND-MIPT catalogs, or None when the data file is not configured."""
    path = os.environ.get(DATA_ENV)
    if not path or not Path(path).is_file():
        return None
    raw = read_catalog(path, os.environ.get(DATA_FORMAT_ENV, "col1"))
    return raw, exclude(raw, ExclusionRule(severity=2749))


@pytest.fixture(scope="session")
def rand_mipt():
    """RAND-MIPT catalog with the 2749-death record removed; skips when the file is absent."""
    data = load_rand_mipt()
    if data is None:
        pytest.skip(f"set {DATA_ENV} to the RAND-MIPT severity file to run data-dependent checks")
    return data


def synthetic_catalog(seed=5, n_body=12421, n_tail=853, params=GpdParams(10, 9.47, 0.56)):
    """Integer catalog: uniform body on 1..10 plus a GPD tail above 10."""
    rng = np.random.default_rng(seed)
    body = rng.integers(1, 11, n_body)
    tail = np.floor(gpd_sample(n_tail, params, rng)) + 1
    x = np.concatenate([body, tail])
    rng.shuffle(x)
    return SeverityCatalog(x.astype(float), tuple(f"ev{i}" for i in range(x.size)), "synthetic")


@pytest.fixture(scope="session")
def synthetic():
    return synthetic_catalog()


@pytest.fixture
def synthetic_file(tmp_path, synthetic):
    path = tmp_path / "catalog.tsv"
    lines = [f"{int(s)}\t{t}" for s, t in zip(synthetic.severities, synthetic.tags)]
    lines.append("2749\t9/11")
    path.write_text("# synthetic catalog\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return path
