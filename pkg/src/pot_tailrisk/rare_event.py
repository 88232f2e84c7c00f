"""Probability of at least one event of a given size among ``n`` events.

Each event is drawn from a mixture of the empirical body (mass ``p_hat``
at or below the threshold ``mu``) and the fitted GPD tail, so

    Pr(max <= y) = [p_hat + (1 - p_hat) F(y)] ** n

``p_hat`` is the catalog fraction with severity <= ``mu`` (one minus the
tail fraction), not the fraction at or below ``y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .catalog import SeverityCatalog, tail_count
from .distributions import DiscretePowerLawParams, DomainError, gpd_cdf, gpd_sf, hurwitz_zeta
from .fitting import GpdFit

__all__ = [
    "EventProbabilityInput",
    "per_event_cdf",
    "event_probability",
    "event_probability_from_catalog",
    "prob_at_least_one",
    "dpl_event_probability",
]


@dataclass(frozen=True)
class EventProbabilityInput:
    y: float
    n: int
    p_hat: float
    fit: GpdFit

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError("p_hat must be a probability")
        if self.y < self.fit.mu:
            raise DomainError(f"event size {self.y:g} is below the threshold {self.fit.mu:g}")


def per_event_cdf(y: float, inp: EventProbabilityInput) -> float:
    """``p_hat + (1 - p_hat) * F(y)`` for one event."""
    return inp.p_hat + (1.0 - inp.p_hat) * float(gpd_cdf(y, inp.fit.params))


def event_probability(inp: EventProbabilityInput) -> float:
    """``1 - per_event_cdf(y) ** n``, evaluated in the log domain.

    Uses the per-event exceedance probability ``(1 - p_hat) * sf(y)``
    directly, so results stay accurate when the per-event CDF is within
    1e-15 of one.
    """
    return prob_at_least_one((1.0 - inp.p_hat) * float(gpd_sf(inp.y, inp.fit.params)), inp.n)


def prob_at_least_one(per_event: float, n: int) -> float:
    """``1 - (1 - per_event) ** n`` without cancellation."""
    if n == 0 or per_event <= 0.0:
        return 0.0
    if per_event >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-per_event))


def event_probability_from_catalog(catalog: SeverityCatalog, fit: GpdFit, y: float, n: int | None = None) -> float:
    """Convenience wrapper taking ``p_hat`` from the catalog and ``n`` from its size by default."""
    _, frac = tail_count(catalog, fit.mu)
    return event_probability(EventProbabilityInput(y, catalog.n if n is None else n, 1.0 - frac, fit))


def dpl_event_probability(params: DiscretePowerLawParams, tail_fraction: float, y: float, n: int) -> float:
    """Same mixture with a discrete power-law tail above ``xmin``.

    An event of size ``y`` means at least ``ceil(y)`` deaths;
    ``tail_fraction`` is the catalog fraction with severity >= ``xmin``.
    """
    k = math.ceil(y)
    if k <= params.xmin:
        sf = 1.0
    else:
        sf = hurwitz_zeta(params.alpha, k) / hurwitz_zeta(params.alpha, params.xmin)
    return prob_at_least_one(tail_fraction * sf, n)
