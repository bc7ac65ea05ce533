"""End-to-end ingestion: fetch, match, consolidate, deduplicate, validate."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from ..corpus import (
    ANNUAL_PREFIX,
    DEFAULT_WINDOW,
    Corpus,
    PaperRecord,
    RecordValidationError,
    validate_record,
    window_years,
)
from .client import SourceClient, fetch_batch
from .matching import DuplicateReport, VenueYearMismatch, consolidate, deduplicate

log = logging.getLogger(__name__)

Query = tuple[str, str, int]


@dataclass
class IngestReport:
    queries: int = 0
    primary_matched: int = 0
    supplemental_matched: int = 0
    consolidated: int = 0
    unresolved: list[Query] = field(default_factory=list)
    rejected: list[tuple[Query, str]] = field(default_factory=list)
    duplicates: list[DuplicateReport] = field(default_factory=list)

    @property
    def primary_coverage(self) -> float:
        return 100.0 * self.primary_matched / self.queries if self.queries else 0.0

    def lines(self) -> list[str]:
        out = [
            f"queries: {self.queries}",
            f"primary matched: {self.primary_matched} ({self.primary_coverage:.1f}%)",
            f"supplemental matched: {self.supplemental_matched}",
            f"consolidated with supplemental: {self.consolidated}",
            f"duplicates removed: {len(self.duplicates)}",
        ]
        out += [f"unresolved: {t!r} ({v} {y})" for t, v, y in self.unresolved]
        out += [f"rejected: {q[0]!r} ({q[1]} {q[2]}): {why}" for q, why in self.rejected]
        out += [f"duplicate: kept {d.kept} removed {d.removed} ({d.reason})" for d in self.duplicates]
        return out


def read_proceedings(path: str | Path) -> list[Query]:
    """Proceedings title list: CSV with ``title``, ``venue`` and ``year`` columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [(r["title"], r["venue"].strip(), int(r["year"])) for r in rows]


def _has_gaps(row: dict[str, Any], window: tuple[int, int]) -> bool:
    names = ["citationCount"] + [f"{ANNUAL_PREFIX}{y}" for y in window_years(window)]
    return any(row.get(n) in (None, "") for n in names)


def run_ingest(
    queries: Sequence[Query],
    primary: SourceClient,
    supplemental: SourceClient | None = None,
    window: tuple[int, int] = DEFAULT_WINDOW,
    venues: Iterable[str] | None = None,
    workers: int = 1,
    canonical_venue: Callable[[str], str | None] | None = None,
) -> tuple[Corpus, IngestReport]:
    """Build a clean corpus from a proceedings title list.

    Every query goes to the primary source. Unmatched queries, and matched
    rows with missing citation fields, are sent to the supplemental source;
    its rows only fill gaps.
    """
    venues = list(venues) if venues is not None else None
    report = IngestReport(queries=len(queries))
    first = fetch_batch(primary, queries, workers, canonical_venue)
    primary_rows: dict[Query, dict[str, Any]] = {o.query: o.row for o in first if o.ok}
    report.primary_matched = len(primary_rows)

    follow_up = [q for q in queries if q not in primary_rows or _has_gaps(primary_rows[q], window)]
    supplemental_rows: dict[Query, dict[str, Any]] = {}
    if supplemental is not None and follow_up:
        for o in fetch_batch(supplemental, follow_up, workers, canonical_venue):
            if o.ok:
                supplemental_rows[o.query] = o.row

    records: list[PaperRecord] = []
    for q in queries:
        p, s = primary_rows.get(q), supplemental_rows.get(q)
        try:
            if p is not None and s is not None:
                records.append(consolidate(p, s, window, venues))
                report.consolidated += 1
            elif p is not None:
                records.append(validate_record(p, window, venues))
            elif s is not None:
                records.append(validate_record(s, window, venues))
                report.supplemental_matched += 1
            else:
                report.unresolved.append(q)
        except (RecordValidationError, VenueYearMismatch) as exc:
            log.warning("dropping %r: %s", q, exc)
            report.rejected.append((q, str(exc)))

    survivors, report.duplicates = deduplicate(records)
    return Corpus(survivors, window), report
