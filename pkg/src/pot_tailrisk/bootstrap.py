"""Seeded nonparametric bootstrap with percentile intervals.

Replicate ``i`` always resamples with ``rng.stream(seed, i)``, so results
depend only on ``(catalog, estimator, B, seed)`` and never on ``jobs`` or
on completion order. Estimators may return a scalar or a fixed-length
vector; a vector entry that is NaN counts as a failure for that entry only,
while an exception fails the whole replicate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .catalog import SeverityCatalog
from .rng import stream

__all__ = [
    "BootstrapError",
    "BootstrapSummary",
    "resample",
    "percentile_interval",
    "run_replicates",
    "summarize",
    "bootstrap_estimate",
    "bootstrap_vector",
]

Estimator = Callable[[SeverityCatalog], object]


class BootstrapError(RuntimeError):
    """Every bootstrap replicate failed."""


@dataclass(frozen=True)
class BootstrapSummary:
    point: float
    replicates: np.ndarray
    level: float
    lo: float
    hi: float
    n_failed: int

    @property
    def B(self) -> int:
        return int(self.replicates.size) + self.n_failed

    def interval(self, level: float) -> tuple[float, float]:
        return percentile_interval(self.replicates, level)


def resample(catalog: SeverityCatalog, rng: np.random.Generator) -> SeverityCatalog:
    """Draw ``n`` events with replacement."""
    idx = rng.integers(0, catalog.n, size=catalog.n)
    return catalog.take(idx)


def percentile_interval(values, level: float) -> tuple[float, float]:
    """Linear-interpolation quantiles at ``(1 - level)/2`` and ``(1 + level)/2``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("percentile_interval needs at least one value")
    if not 0.0 < level <= 1.0:
        raise ValueError("level must lie in (0, 1]")
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(v, [a, 1.0 - a])
    return float(lo), float(hi)


def _replicate_block(catalog, estimator, seed, indices):
    out = []
    for i in indices:
        try:
            value = estimator(resample(catalog, stream(seed, i)))
            out.append((i, np.atleast_1d(np.asarray(value, dtype=float)), None))
        except Exception as exc:  # noqa: BLE001 - failures are counted, not raised
            out.append((i, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_replicates(
    catalog: SeverityCatalog,
    estimator: Estimator,
    B: int,
    seed: int,
    jobs: int = 1,
) -> tuple[list[Optional[np.ndarray]], list[Optional[str]]]:
    """Evaluate ``estimator`` on ``B`` resamples.

    Returns per-replicate values (None on failure) and error messages,
    both ordered by replicate index.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    jobs = max(1, min(int(jobs), B))
    blocks = [[int(i) for i in b] for b in np.array_split(np.arange(B), jobs)]
    if jobs == 1:
        results = [_replicate_block(catalog, estimator, seed, blocks[0])]
    else:
        results = Parallel(n_jobs=jobs)(delayed(_replicate_block)(catalog, estimator, seed, b) for b in blocks)
    values: list = [None] * B
    errors: list = [None] * B
    for block in results:
        for i, v, err in block:
            values[i] = v
            errors[i] = err
    return values, errors


def summarize(point: float, replicates: Sequence[float], level: float, n_failed: int = 0) -> BootstrapSummary:
    reps = np.asarray(replicates, dtype=float)
    lo, hi = percentile_interval(reps, level)
    return BootstrapSummary(float(point), reps, float(level), lo, hi, int(n_failed))


def bootstrap_vector(
    catalog: SeverityCatalog,
    estimator: Estimator,
    B: int = 2000,
    level: float = 0.90,
    seed: int = 0,
    jobs: int = 1,
    point=None,
) -> list[Optional[BootstrapSummary]]:
    """Per-component summaries for a vector-valued estimator.

    ``point`` may carry estimates already computed on ``catalog``. A
    component whose replicates all failed yields ``None`` in its slot.
    """
    if point is None:
        point = estimator(catalog)
    point = np.atleast_1d(np.asarray(point, dtype=float))
    values, errors = run_replicates(catalog, estimator, B, seed, jobs)
    if all(v is None for v in values):
        first = next(e for e in errors if e is not None)
        raise BootstrapError(f"all {B} bootstrap replicates failed; first error: {first}")
    summaries = []
    for k in range(point.size):
        reps = [v[k] for v in values if v is not None and np.isfinite(v[k])]
        if not reps:
            summaries.append(None)
            continue
        summaries.append(summarize(point[k], reps, level, B - len(reps)))
    return summaries


def bootstrap_estimate(
    catalog: SeverityCatalog,
    estimator: Callable[[SeverityCatalog], float],
    B: int = 2000,
    level: float = 0.90,
    seed: int = 0,
    jobs: int = 1,
) -> BootstrapSummary:
    """Percentile bootstrap for a scalar catalog statistic.

    Parameters
    ----------
    catalog : SeverityCatalog
    estimator : callable
        Maps a catalog to a float. Replicates where it raises (or returns
        NaN) are dropped and counted in ``n_failed``.
    B : int
        Number of replicates.
    level : float
        Interval coverage, e.g. 0.90.
    seed : int
        Master seed; replicate ``i`` uses the stream ``(seed, i)``.
    jobs : int
        Worker processes. Output does not depend on it.

    Raises
    ------
    BootstrapError
        If every replicate fails.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    (summary,) = bootstrap_vector(catalog, estimator, B, level, seed, jobs)
    if summary is None:
        raise BootstrapError(f"all {B} bootstrap replicates returned NaN")
    return summary
