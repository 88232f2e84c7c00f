"""Event-severity catalogs: parsing, exclusion rules and tail counts.

A catalog is an immutable multiset of per-event severities (deaths per event),
optionally carrying an opaque tag per event. Tail membership is strict:
an event with severity exactly ``mu`` is *not* in the tail.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "CatalogError",
    "CatalogParseError",
    "EmptyCatalogError",
    "AmbiguousExclusionError",
    "InsufficientTailError",
    "ExclusionWarning",
    "EventRecord",
    "SeverityCatalog",
    "ExclusionRule",
    "parse_catalog",
    "read_catalog",
    "serialize_catalog",
    "exclude",
    "tail_count",
    "exceedances",
]

FORMATS = ("col1", "col2")


class CatalogError(ValueError):
    """Base class for data errors raised while handling catalogs."""


class CatalogParseError(CatalogError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class EmptyCatalogError(CatalogError):
    pass


class AmbiguousExclusionError(CatalogError):
    pass


class InsufficientTailError(CatalogError):
    pass


class ExclusionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EventRecord:
    severity: float
    tag: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SeverityCatalog:
    """Immutable catalog of event severities.

    Parameters
    ----------
    severities : array-like
        Per-event severities, each >= 1. Stored as a read-only float array
        (integer-valued unless the catalog was jittered).
    tags : sequence of str or None, optional
        One tag per event, used only by exclusion rules. Stored as a
        read-only object array.
    source : str
        Free-text provenance (path, checksum, applied exclusions).
    """

    severities: np.ndarray
    tags: Optional[np.ndarray] = None
    source: str = ""
    _sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sev = np.array(self.severities, dtype=float).ravel()
        if sev.size == 0:
            raise EmptyCatalogError("catalog has no events")
        if not np.all(np.isfinite(sev)) or np.any(sev < 1):
            raise CatalogError("severities must be finite and >= 1")
        sev.setflags(write=False)
        object.__setattr__(self, "severities", sev)
        if self.tags is not None:
            tags = np.empty(len(self.tags), dtype=object)
            tags[:] = list(self.tags)
            tags.setflags(write=False)
            if tags.size != sev.size:
                raise CatalogError("tags and severities differ in length")
            object.__setattr__(self, "tags", tags)
        srt = np.sort(sev)
        srt.setflags(write=False)
        object.__setattr__(self, "_sorted", srt)

    @property
    def n(self) -> int:
        return int(self.severities.size)

    def __len__(self) -> int:
        return self.n

    @property
    def events(self) -> list[EventRecord]:
        tags = self.tags if self.tags is not None else (None,) * self.n
        return [EventRecord(float(s), None if t is None else str(t)) for s, t in zip(self.severities, tags)]

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.events)

    @property
    def sorted_severities(self) -> np.ndarray:
        return self._sorted

    def take(self, index: np.ndarray, source: Optional[str] = None) -> "SeverityCatalog":
        """Catalog made of the events at ``index`` (repeats allowed)."""
        index = np.asarray(index, dtype=np.intp)
        tags = None if self.tags is None else self.tags[index]
        return SeverityCatalog(self.severities[index], tags, self.source if source is None else source)

    def jittered(self, rng: np.random.Generator) -> "SeverityCatalog":
        """Copy with uniform(0, 1) noise added to every severity."""
        noisy = self.severities + rng.random(self.n)
        return SeverityCatalog(noisy, self.tags, self.source + " [jittered]")


@dataclass(frozen=True)
class ExclusionRule:
    """Remove events by tag (all matches) or by exact severity.

    A severity rule must match exactly ``multiplicity`` records; with
    ``multiplicity=None`` it must match exactly one.
    """

    tag: Optional[str] = None
    severity: Optional[float] = None
    multiplicity: Optional[int] = None

    def __post_init__(self):
        if (self.tag is None) == (self.severity is None):
            raise ValueError("exclusion rule needs exactly one of tag or severity")

    def describe(self) -> str:
        if self.tag is not None:
            return f"tag={self.tag}"
        return f"severity={self.severity:g}"


def parse_catalog(text: str | Iterable[str], format: str = "col1", source: str = "") -> SeverityCatalog:
    """Parse catalog text.

    ``col1`` lines hold ``<severity>``; ``col2`` lines hold
    ``<severity>\\t<tag>``. Blank lines and lines starting with ``#`` are
    skipped. Severities must be integers >= 1.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown catalog format {format!r}; expected one of {FORMATS}")
    lines = text.splitlines() if isinstance(text, str) else text
    sev = []
    tags = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        if format == "col2":
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise CatalogParseError(lineno, "expected '<severity>\\t<tag>'")
            field_, tag = parts
        else:
            field_, tag = line, None
        try:
            value = int(field_.strip())
        except ValueError:
            raise CatalogParseError(lineno, f"severity {field_.strip()!r} is not an integer") from None
        if value < 1:
            raise CatalogParseError(lineno, f"severity {value} < 1")
        sev.append(value)
        tags.append(tag)
    if not sev:
        raise EmptyCatalogError("catalog input contains no events")
    return SeverityCatalog(np.array(sev, dtype=float), tuple(tags) if format == "col2" else None, source)


def read_catalog(path: str, format: str = "col1") -> SeverityCatalog:
    """Read a catalog file; ``source`` records the path and its SHA-256."""
    with open(path, "rb") as fh:
        blob = fh.read()
    digest = hashlib.sha256(blob).hexdigest()
    return parse_catalog(blob.decode("utf-8"), format, source=f"{path} sha256={digest}")


def serialize_catalog(catalog: SeverityCatalog) -> str:
    """Inverse of :func:`parse_catalog` for integer-valued catalogs."""
    if np.any(catalog.severities != np.round(catalog.severities)):
        raise CatalogError("only integer-valued catalogs can be serialized")
    if catalog.tags is None:
        return "".join(f"{int(s)}\n" for s in catalog.severities)
    return "".join(f"{int(s)}\t{t}\n" for s, t in zip(catalog.severities, catalog.tags))


def exclude(catalog: SeverityCatalog, rule: ExclusionRule) -> SeverityCatalog:
    """New catalog without the events matched by ``rule``.

    A rule matching nothing emits :class:`ExclusionWarning` and returns the
    catalog unchanged.
    """
    if rule.tag is not None:
        if catalog.tags is None:
            mask = np.zeros(catalog.n, dtype=bool)
        else:
            mask = catalog.tags == rule.tag
    else:
        mask = catalog.severities == float(rule.severity)
    hits = int(mask.sum())
    if hits == 0:
        warnings.warn(f"exclusion rule {rule.describe()} matched no events", ExclusionWarning, stacklevel=2)
        return catalog
    if rule.severity is not None:
        expected = 1 if rule.multiplicity is None else rule.multiplicity
        if hits != expected:
            raise AmbiguousExclusionError(
                f"exclusion rule {rule.describe()} matched {hits} events, expected {expected}"
            )
    keep = np.flatnonzero(~mask)
    return catalog.take(keep, source=f"{catalog.source} [excluded {rule.describe()} x{hits}]".strip())


def _sorted_values(data) -> np.ndarray:
    if isinstance(data, SeverityCatalog):
        return data.sorted_severities
    return np.sort(np.asarray(data, dtype=float).ravel())


def tail_count(catalog: SeverityCatalog | Sequence[float], threshold: float) -> tuple[int, float]:
    """Number and fraction of events with severity strictly above ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    srt = _sorted_values(catalog)
    count = int(srt.size - np.searchsorted(srt, threshold, side="right"))
    return count, count / srt.size


def exceedances(catalog: SeverityCatalog | Sequence[float], threshold: float, min_count: int = 2) -> np.ndarray:
    """Ascending severities strictly above ``threshold`` (not shifted by it)."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    srt = _sorted_values(catalog)
    tail = srt[np.searchsorted(srt, threshold, side="right"):]
    if tail.size < min_count:
        raise InsufficientTailError(
            f"only {tail.size} events exceed threshold {threshold:g}; need at least {min_count}"
        )
    return tail.copy()
