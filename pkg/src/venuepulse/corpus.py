"""Paper records, the validated corpus, and per venue-year aggregates."""

from __future__ import annotations

import hashlib
import re
import string
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping

DEFAULT_WINDOW = (2014, 2024)
DEFAULT_VENUES = ("ACL", "EMNLP", "NAACL", "AAAI", "IJCAI", "ICLR", "NeurIPS")

# Field names of the raw ledger schema.
KNOWN_FIELDS = {
    "paperId",
    "title",
    "venue",
    "year",
    "ai_category",
    "notes",
    "citationCount",
    "top_conf_citations",
    "top_journal_citations",
}
ANNUAL_PREFIX = "citations_"
_ANNUAL_RE = re.compile(r"^citations_(\d{4})$")


class VenuePulseError(Exception):
    """Base class for every error raised by the package."""


class UnknownVenue(VenuePulseError, KeyError):
    def __str__(self) -> str:
        return f"unknown venue: {self.args[0]!r}"


class YearOutOfWindow(VenuePulseError, ValueError):
    pass


@dataclass(frozen=True)
class Issue:
    """One problem found while validating a raw row."""

    kind: str  # MissingField, NegativeCount, YearOutOfWindow, InconsistentCounts, BadValue, UnknownVenue
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}({self.field}): {self.message}"


class RecordValidationError(VenuePulseError, ValueError):
    def __init__(self, issues: list[Issue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))

    @property
    def kinds(self) -> set[str]:
        return {i.kind for i in self.issues}


class DuplicateRecord(VenuePulseError, ValueError):
    pass


def normalize_title(title: str) -> str:
    """Lowercase, collapse internal whitespace, strip trailing punctuation."""
    t = " ".join(title.lower().split())
    return t.rstrip(string.punctuation + " ").strip()


def window_years(window: tuple[int, int]) -> range:
    return range(window[0], window[1] + 1)


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    venue: str
    year: int
    citation_count: int
    annual_citations: Mapping[int, int]
    top_conf_citations: int = 0
    top_journal_citations: int = 0
    ai_category: str | None = None
    notes: str | None = None
    extra: Mapping[str, Any] = field(default_factory=dict, compare=True)

    def __post_init__(self) -> None:
        # Freeze mappings so records can be shared between workers.
        object.__setattr__(self, "annual_citations", MappingProxyType(dict(sorted(self.annual_citations.items()))))
        object.__setattr__(self, "extra", MappingProxyType(dict(self.extra)))

    def __hash__(self) -> int:
        return hash((self.paper_id, self.venue, self.year))

    @property
    def key(self) -> tuple[str, str, int]:
        """Deduplication key: normalized (title, venue, year)."""
        return normalize_title(self.title), self.venue, self.year

    def citations_in(self, year: int) -> int:
        return self.annual_citations.get(year, 0)

    def to_row(self, window: tuple[int, int] = DEFAULT_WINDOW) -> dict[str, Any]:
        """Raw-schema field map; inverse of :func:`validate_record`."""
        row: dict[str, Any] = {
            "paperId": self.paper_id,
            "title": self.title,
            "venue": self.venue,
            "year": self.year,
            "ai_category": self.ai_category,
            "notes": self.notes,
            "citationCount": self.citation_count,
            "top_conf_citations": self.top_conf_citations,
            "top_journal_citations": self.top_journal_citations,
        }
        for y in window_years(window):
            row[f"{ANNUAL_PREFIX}{y}"] = self.citations_in(y)
        row.update(self.extra)
        return row


def _blank(value: Any) -> bool:
    return value is None or (isinstance(value, str) and value.strip() == "")


def _as_int(value: Any, name: str, issues: list[Issue]) -> int | None:
    if isinstance(value, bool):
        issues.append(Issue("BadValue", name, f"expected integer, got {value!r}"))
        return None
    if isinstance(value, int):
        return value
    try:
        f = float(str(value).strip())
    except ValueError:
        issues.append(Issue("BadValue", name, f"expected integer, got {value!r}"))
        return None
    if not f.is_integer():
        issues.append(Issue("BadValue", name, f"expected integer, got {value!r}"))
        return None
    return int(f)


def _in_window_slice(key: Any, window: tuple[int, int]) -> bool:
    # Slices outside the window are kept as opaque extra columns.
    m = _ANNUAL_RE.match(str(key))
    return bool(m) and window[0] <= int(m.group(1)) <= window[1]


def auto_paper_id(title: str, venue: str, year: int) -> str:
    digest = hashlib.sha1(f"{normalize_title(title)}|{venue}|{year}".encode()).hexdigest()
    return f"auto:{digest[:16]}"


def validate_record(
    raw: Mapping[str, Any],
    window: tuple[int, int] = DEFAULT_WINDOW,
    venues: Iterable[str] | None = None,
    default_venue: str | None = None,
) -> PaperRecord:
    """Validate one raw row into a :class:`PaperRecord`.

    Every problem in the row is collected before raising, so a single
    :class:`RecordValidationError` lists all of them. Missing annual slices
    default to 0; a missing ``citationCount`` defaults to the sum of the annual
    slices; a missing ``paperId`` is derived from the dedup key.
    """
    issues: list[Issue] = []

    title = raw.get("title")
    if _blank(title):
        issues.append(Issue("MissingField", "title", "title is required"))
    venue = raw.get("venue")
    if _blank(venue):
        venue = default_venue
    if _blank(venue):
        issues.append(Issue("MissingField", "venue", "venue is required"))
    else:
        venue = str(venue).strip()
        if venues is not None and venue not in set(venues):
            issues.append(Issue("UnknownVenue", "venue", f"{venue!r} is not a configured venue"))

    year = None
    if _blank(raw.get("year")):
        issues.append(Issue("MissingField", "year", "year is required"))
    else:
        year = _as_int(raw["year"], "year", issues)
        if year is not None and not (window[0] <= year <= window[1]):
            issues.append(Issue("YearOutOfWindow", "year", f"{year} outside {window[0]}-{window[1]}"))
            year = None

    annual: dict[int, int] = {}
    for key, value in raw.items():
        m = _ANNUAL_RE.match(str(key))
        if not m:
            continue
        y = int(m.group(1))
        if _blank(value):
            continue
        n = _as_int(value, key, issues)
        if n is None:
            continue
        if n < 0:
            issues.append(Issue("NegativeCount", key, f"{n} < 0"))
            continue
        if window[0] <= y <= window[1]:
            annual[y] = n
    for y in window_years(window):
        annual.setdefault(y, 0)

    counts: dict[str, int] = {}
    for name in ("citationCount", "top_conf_citations", "top_journal_citations"):
        value = raw.get(name)
        if _blank(value):
            continue
        n = _as_int(value, name, issues)
        if n is None:
            continue
        if n < 0:
            issues.append(Issue("NegativeCount", name, f"{n} < 0"))
            continue
        counts[name] = n

    total = counts.get("citationCount", sum(annual.values()))
    for name in ("top_conf_citations", "top_journal_citations"):
        if counts.get(name, 0) > total:
            issues.append(Issue("InconsistentCounts", name, f"{counts[name]} exceeds citationCount {total}"))
    if "citationCount" in counts and sum(annual.values()) > total:
        issues.append(
            Issue("InconsistentCounts", "citationCount", f"annual slices sum to {sum(annual.values())} > {total}")
        )

    if issues:
        raise RecordValidationError(issues)

    paper_id = raw.get("paperId")
    paper_id = auto_paper_id(title, venue, year) if _blank(paper_id) else str(paper_id).strip()
    ai_category = None if _blank(raw.get("ai_category")) else str(raw["ai_category"])
    notes = None if _blank(raw.get("notes")) else str(raw["notes"])
    extra = {
        k: v for k, v in raw.items()
        if k not in KNOWN_FIELDS and not _blank(v) and not _in_window_slice(k, window)
    }

    return PaperRecord(
        paper_id=paper_id,
        title=str(title),
        venue=venue,
        year=year,
        citation_count=total,
        annual_citations=annual,
        top_conf_citations=counts.get("top_conf_citations", 0),
        top_journal_citations=counts.get("top_journal_citations", 0),
        ai_category=ai_category,
        notes=notes,
        extra=extra,
    )


@dataclass(frozen=True)
class VenueYearAggregate:
    venue: str
    year: int
    n_t: int
    c_t: int
    citation_vector: tuple[int, ...] = ()


class Corpus:
    """Immutable, deduplicated collection of records indexed by venue and year."""

    def __init__(self, records: Iterable[PaperRecord] = (), window: tuple[int, int] = DEFAULT_WINDOW):
        if window[0] > window[1]:
            raise ValueError(f"bad window {window}")
        self.window = (int(window[0]), int(window[1]))
        self.records: tuple[PaperRecord, ...] = tuple(records)
        ids: set[str] = set()
        keys: set[tuple[str, str, int]] = set()
        index: dict[str, dict[int, list[PaperRecord]]] = defaultdict(lambda: defaultdict(list))
        for rec in self.records:
            if rec.paper_id in ids:
                raise DuplicateRecord(f"duplicate paperId {rec.paper_id!r}")
            if rec.key in keys:
                raise DuplicateRecord(f"duplicate (title, venue, year) for {rec.title!r} at {rec.venue} {rec.year}")
            if not (self.window[0] <= rec.year <= self.window[1]):
                raise YearOutOfWindow(f"{rec.paper_id}: year {rec.year} outside {self.window}")
            ids.add(rec.paper_id)
            keys.add(rec.key)
            index[rec.venue][rec.year].append(rec)
        self.venue_index: Mapping[str, Mapping[int, tuple[PaperRecord, ...]]] = {
            v: {y: tuple(rs) for y, rs in sorted(by_year.items())} for v, by_year in sorted(index.items())
        }

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.window == other.window and self.records == other.records

    def __repr__(self) -> str:
        return f"Corpus({len(self.records)} records, venues={list(self.venue_index)}, window={self.window})"

    @property
    def venues(self) -> list[str]:
        return list(self.venue_index)

    @property
    def years(self) -> range:
        return window_years(self.window)

    @property
    def categories(self) -> list[str]:
        return sorted({r.ai_category for r in self.records if r.ai_category is not None})

    def venue_records(self, venue: str) -> list[PaperRecord]:
        if venue not in self.venue_index:
            raise UnknownVenue(venue)
        return [r for rs in self.venue_index[venue].values() for r in rs]

    def _check_year(self, year: int) -> None:
        if not (self.window[0] <= year <= self.window[1]):
            raise YearOutOfWindow(f"{year} outside {self.window[0]}-{self.window[1]}")


def citation_mass(records: Iterable[PaperRecord], year: int) -> int:
    """Citations received in ``year`` by every record published in or before it."""
    return sum(r.citations_in(year) for r in records if r.year <= year)


def venue_year_aggregate(corpus: Corpus, venue: str, year: int, known_venues: Iterable[str] = ()) -> VenueYearAggregate:
    """N_t and C_t for one venue-year.

    A venue that is configured (``known_venues``) but has no records yields
    an all-zero aggregate instead of :class:`UnknownVenue`.
    """
    corpus._check_year(year)
    if venue not in corpus.venue_index:
        if venue in set(known_venues) or not corpus.records:
            return VenueYearAggregate(venue, year, 0, 0, ())
        raise UnknownVenue(venue)
    by_year = corpus.venue_index[venue]
    published = by_year.get(year, ())
    c_t = sum(r.citations_in(year) for y, rs in by_year.items() if y <= year for r in rs)
    vector = tuple(sorted(r.citations_in(year) for r in published))
    return VenueYearAggregate(venue, year, len(published), c_t, vector)


def venue_aggregates(corpus: Corpus, venue: str) -> list[VenueYearAggregate]:
    return [venue_year_aggregate(corpus, venue, y) for y in corpus.years]


CUMULATIVE = "cumulative"


def citation_vector(corpus: Corpus, venue: str, window_mode: str | int = CUMULATIVE) -> list[int]:
    """Sorted per-paper citation values for a venue.

    ``window_mode`` is ``"cumulative"`` (each paper's total count) or a year
    ``t`` for the single-year window (citations received in ``t`` by papers
    published in ``t``).
    """
    if venue not in corpus.venue_index:
        raise UnknownVenue(venue)
    by_year = corpus.venue_index[venue]
    if window_mode == CUMULATIVE:
        return sorted(r.citation_count for rs in by_year.values() for r in rs)
    t = int(window_mode)
    corpus._check_year(t)
    return sorted(r.citations_in(t) for r in by_year.get(t, ()))
